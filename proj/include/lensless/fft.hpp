#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "lensless/grid.hpp"

namespace lensless {

using Spectrum = std::vector<std::complex<double>>;

// Real-to-complex 2-D DFT of a square n×n grid, backed by FFTW. Plans are
// created once per size and shared; execution is thread-safe.
class Fft2d {
 public:
  static const Fft2d& for_size(std::size_t n);

  std::size_t size() const { return n_; }
  // Number of complex bins in the half spectrum: n * (n/2 + 1).
  std::size_t spectrum_size() const { return n_ * (n_ / 2 + 1); }

  Spectrum forward(std::span<const double> pixels) const;
  // Inverse transform including the 1/n² normalization.
  RealGrid inverse(Spectrum spectrum) const;

  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;
  ~Fft2d();

 private:
  explicit Fft2d(std::size_t n);

  std::size_t n_;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

}  // namespace lensless
