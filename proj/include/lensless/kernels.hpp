#pragma once

// Data-parallel inner loops shared by the imaging and recognizer code.
//
// Every kernel has a scalar reference implementation and vectorized variants
// (AVX2+FMA on x86-64, NEON on AArch64). The active variant is chosen once at
// startup from the CPU feature set and can be overridden with the
// LENSLESS_SIMD environment variable ("scalar", "avx2", "neon") or
// set_backend(). Vectorized reductions sum in a different order than the
// scalar loop, so results agree to rounding, not bitwise; a given backend is
// deterministic.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace lensless::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*sum_squares)(const double* a, std::size_t n);
  // out[i] = (conj_a ? conj(a[i]) : a[i]) * b[i]; out may alias a or b.
  void (*complex_multiply)(const std::complex<double>* a, const std::complex<double>* b,
                           std::complex<double>* out, std::size_t n, bool conj_a);
};

bool backend_available(Backend b);
const KernelTable& table(Backend b);

Backend active_backend();
// Throws ConfigError when the backend is not available on this CPU/build.
void set_backend(Backend b);

std::string_view backend_name(Backend b);
Backend parse_backend(std::string_view name);

namespace detail {
const KernelTable& active_table();
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  return detail::active_table().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  detail::active_table().axpy(alpha, x.data(), y.data(), x.size());
}

inline double sum_squares(std::span<const double> a) {
  return detail::active_table().sum_squares(a.data(), a.size());
}

inline void complex_multiply(std::span<const std::complex<double>> a,
                             std::span<const std::complex<double>> b,
                             std::span<std::complex<double>> out, bool conj_a = false) {
  detail::active_table().complex_multiply(a.data(), b.data(), out.data(), a.size(), conj_a);
}

// Per-backend tables; the vectorized ones only exist when compiled in.
namespace scalar {
extern const KernelTable kTable;
}
#if defined(LENSLESS_HAVE_AVX2)
namespace avx2 {
extern const KernelTable kTable;
}
#endif
#if defined(LENSLESS_HAVE_NEON)
namespace neon {
extern const KernelTable kTable;
}
#endif

}  // namespace lensless::kernels
