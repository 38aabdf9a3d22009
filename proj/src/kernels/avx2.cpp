// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "lensless/kernels.hpp"

#include <immintrin.h>

namespace lensless::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i + 4,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_squares(const double* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d v0 = _mm256_loadu_pd(a + i);
    const __m256d v1 = _mm256_loadu_pd(a + i + 4);
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
    acc1 = _mm256_fmadd_pd(v1, v1, acc1);
  }
  if (i + 4 <= n) {
    const __m256d v0 = _mm256_loadu_pd(a + i);
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
    i += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

// Two complex values per register: [re0, im0, re1, im1].
void complex_multiply(const std::complex<double>* a, const std::complex<double>* b,
                      std::complex<double>* out, std::size_t n, bool conj_a) {
  const auto* pa = reinterpret_cast<const double*>(a);
  const auto* pb = reinterpret_cast<const double*>(b);
  auto* po = reinterpret_cast<double*>(out);
  // Flips the sign of the imaginary lanes of a when conjugating.
  const __m256d conj_mask = conj_a ? _mm256_set_pd(-0.0, 0.0, -0.0, 0.0) : _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_xor_pd(_mm256_loadu_pd(pa + 2 * i), conj_mask);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    const __m256d a_re = _mm256_movedup_pd(va);         // [ar, ar, ...]
    const __m256d a_im = _mm256_permute_pd(va, 0b1111);  // [ai, ai, ...]
    const __m256d b_sw = _mm256_permute_pd(vb, 0b0101);  // [bi, br, ...]
    // [ar*br - ai*bi, ar*bi + ai*br]
    _mm256_storeu_pd(po + 2 * i, _mm256_fmaddsub_pd(a_re, vb, _mm256_mul_pd(a_im, b_sw)));
  }
  for (; i < n; ++i) {
    const double ar = a[i].real();
    const double ai = conj_a ? -a[i].imag() : a[i].imag();
    const double br = b[i].real();
    const double bi = b[i].imag();
    out[i] = {ar * br - ai * bi, ar * bi + ai * br};
  }
}

}  // namespace

const KernelTable kTable{dot, axpy, sum_squares, complex_multiply};

}  // namespace lensless::kernels::avx2
