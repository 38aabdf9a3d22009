#include <atomic>
#include <cstdlib>
#include <string>

#include "lensless/errors.hpp"
#include "lensless/kernels.hpp"

namespace lensless::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(LENSLESS_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool has = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return has;
#else
  return false;
#endif
}

Backend detect() {
  if (const char* env = std::getenv("LENSLESS_SIMD"); env != nullptr && *env != '\0') {
    const Backend b = parse_backend(env);
    if (backend_available(b)) return b;
  }
  if (backend_available(Backend::Avx2)) return Backend::Avx2;
  if (backend_available(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

struct Active {
  std::atomic<Backend> backend;
  std::atomic<const KernelTable*> table;
};

Active& current() {
  static Active a{detect(), nullptr};
  static const bool init = [] {
    a.table.store(&table(a.backend.load()));
    return true;
  }();
  (void)init;
  return a;
}

}  // namespace

bool backend_available(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
      return cpu_has_avx2();
    case Backend::Neon:
#if defined(LENSLESS_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Backend b) {
  if (!backend_available(b)) {
    throw ConfigError("SIMD backend '" + std::string(backend_name(b)) + "' is not available");
  }
  switch (b) {
#if defined(LENSLESS_HAVE_AVX2)
    case Backend::Avx2:
      return avx2::kTable;
#endif
#if defined(LENSLESS_HAVE_NEON)
    case Backend::Neon:
      return neon::kTable;
#endif
    default:
      return scalar::kTable;
  }
}

Backend active_backend() { return current().backend.load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (!backend_available(b)) {
    throw ConfigError("SIMD backend '" + std::string(backend_name(b)) + "' is not available");
  }
  Active& a = current();
  a.backend.store(b, std::memory_order_relaxed);
  a.table.store(&table(b), std::memory_order_relaxed);
}

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

Backend parse_backend(std::string_view name) {
  if (name == "scalar") return Backend::Scalar;
  if (name == "avx2") return Backend::Avx2;
  if (name == "neon") return Backend::Neon;
  throw ConfigError("unknown SIMD backend '" + std::string(name) + "'");
}

namespace detail {
const KernelTable& active_table() { return *current().table.load(std::memory_order_relaxed); }
}  // namespace detail

}  // namespace lensless::kernels
