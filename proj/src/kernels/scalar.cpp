#include "lensless/kernels.hpp"

namespace lensless::kernels::scalar {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum_squares(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

void complex_multiply(const std::complex<double>* a, const std::complex<double>* b,
                      std::complex<double>* out, std::size_t n, bool conj_a) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real();
    const double ai = conj_a ? -a[i].imag() : a[i].imag();
    const double br = b[i].real();
    const double bi = b[i].imag();
    out[i] = {ar * br - ai * bi, ar * bi + ai * br};
  }
}

}  // namespace

const KernelTable kTable{dot, axpy, sum_squares, complex_multiply};

}  // namespace lensless::kernels::scalar
