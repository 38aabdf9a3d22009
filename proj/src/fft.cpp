#include "lensless/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>


namespace lensless {
namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Fft2d::Fft2d(std::size_t n) : n_(n) {
  const int ni = static_cast<int>(n);
  std::vector<double> real(n * n);
  std::vector<fftw_complex> cplx(spectrum_size());
  // Unaligned plans keep codelet selection independent of buffer addresses,
  // so results are bit-reproducible.
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft_r2c_2d(ni, ni, real.data(), cplx.data(), flags);
  inverse_plan_ = fftw_plan_dft_c2r_2d(ni, ni, cplx.data(), real.data(), flags);
  if (forward_plan_ == nullptr || inverse_plan_ == nullptr) {
    throw Error("failed to create FFT plans");
  }
}

Fft2d::~Fft2d() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

const Fft2d& Fft2d::for_size(std::size_t n) {
  if (n == 0) throw DimensionError("FFT size must be positive");
  static std::map<std::size_t, std::unique_ptr<Fft2d>> cache;
  std::lock_guard lock(planner_mutex());
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, std::unique_ptr<Fft2d>(new Fft2d(n))).first;
  }
  return *it->second;
}

Spectrum Fft2d::forward(std::span<const double> pixels) const {
  if (pixels.size() != n_ * n_) throw DimensionError("FFT input has the wrong size");
  Spectrum out(spectrum_size());
  // r2c does not modify its input.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(pixels.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

RealGrid Fft2d::inverse(Spectrum spectrum) const {
  if (spectrum.size() != spectrum_size()) throw DimensionError("spectrum has the wrong size");
  RealGrid out = RealGrid::square(n_);
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(spectrum.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n_ * n_);
  for (double& v : out.span()) v *= scale;
  return out;
}

}  // namespace lensless
