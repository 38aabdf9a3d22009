#include "lensless/kernels.hpp"

#include <arm_neon.h>

namespace lensless::kernels::neon {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_squares(const double* a, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t v0 = vld1q_f64(a + i);
    const float64x2_t v1 = vld1q_f64(a + i + 2);
    acc0 = vfmaq_f64(acc0, v0, v0);
    acc1 = vfmaq_f64(acc1, v1, v1);
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

void complex_multiply(const std::complex<double>* a, const std::complex<double>* b,
                      std::complex<double>* out, std::size_t n, bool conj_a) {
  const auto* pa = reinterpret_cast<const double*>(a);
  const auto* pb = reinterpret_cast<const double*>(b);
  auto* po = reinterpret_cast<double*>(out);
  const double sign = conj_a ? -1.0 : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const float64x2_t vb = vld1q_f64(pb + 2 * i);           // [br, bi]
    const float64x2_t vb_sw = vextq_f64(vb, vb, 1);          // [bi, br]
    const float64x2_t ar = vdupq_n_f64(pa[2 * i]);
    const float64x2_t ai = vdupq_n_f64(sign * pa[2 * i + 1]);
    const float64x2_t flip = {-1.0, 1.0};
    // [ar*br - ai*bi, ar*bi + ai*br]
    vst1q_f64(po + 2 * i, vfmaq_f64(vmulq_f64(ar, vb), vmulq_f64(ai, vb_sw), flip));
  }
}

}  // namespace

const KernelTable kTable{dot, axpy, sum_squares, complex_multiply};

}  // namespace lensless::kernels::neon
