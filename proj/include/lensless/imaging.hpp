#pragma once

// Lensless capture model: the sensor sees the scene circularly convolved with
// the mask kernel, y = H * x (+ optional Gaussian noise).
//
// Convolution convention: y[p] = sum_{a,b} k[a,b] * x[(p - (a,b)) mod n].
// Mask cell (0,0) is lag (0,0); the m×m kernel is zero-padded to n×n.

#include <cstddef>
#include <cstdint>
#include <string>

#include "lensless/fft.hpp"
#include "lensless/grid.hpp"

namespace lensless {

// Square grayscale scene with pixels in [0,1].
class Image {
 public:
  explicit Image(RealGrid pixels);
  static Image constant(std::size_t n, double value);

  std::size_t size() const { return pixels_.rows(); }
  const RealGrid& pixels() const { return pixels_; }
  double operator()(std::size_t r, std::size_t c) const { return pixels_(r, c); }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  RealGrid pixels_;
};

// Square binary aperture pattern.
class CodedMask {
 public:
  explicit CodedMask(Grid<std::uint8_t> cells);
  // Every value must be exactly 0.0 or 1.0.
  static CodedMask from_real(const RealGrid& values);

  std::size_t size() const { return cells_.rows(); }
  bool open(std::size_t r, std::size_t c) const { return cells_(r, c) != 0; }
  std::size_t open_count() const;
  const Grid<std::uint8_t>& cells() const { return cells_; }
  RealGrid to_real() const;
  // Stable content identifier, e.g. "m8-3f2a...".
  std::string id() const;

  friend bool operator==(const CodedMask&, const CodedMask&) = default;

 private:
  Grid<std::uint8_t> cells_;
};

struct CaptureConfig {
  bool normalize_mask = true;
  double noise_std = 0.0;

  void validate() const;
};

struct Measurement {
  RealGrid pixels;
  std::string mask_id;
  bool normalized = true;

  std::size_t size() const { return pixels.rows(); }
};

// Kernel from a (possibly relaxed) mask. With normalization the kernel is
// mask / sum(mask); an all-zero mask stays zero.
RealGrid build_kernel(const RealGrid& mask, bool normalize);

// Chain rule through build_kernel: maps dL/dkernel to dL/dmask.
RealGrid kernel_backward(const RealGrid& mask, const RealGrid& grad_kernel, bool normalize);

// Circular convolution operator for one kernel on n×n scenes. The kernel
// spectrum is computed once.
class CircularConvolution {
 public:
  CircularConvolution(std::size_t n, const RealGrid& kernel);

  std::size_t size() const { return n_; }
  RealGrid apply(const RealGrid& x) const;
  // Same, reusing a precomputed scene spectrum.
  RealGrid apply_spectrum(const Spectrum& x_hat) const;

 private:
  std::size_t n_;
  Spectrum kernel_hat_;
};

RealGrid convolve(const RealGrid& x, const RealGrid& kernel);

// Adjoint of convolution with respect to the kernel, restricted to the m×m
// support: c[a,b] = sum_p g[p] * x[(p - (a,b)) mod n].
RealGrid correlate(const RealGrid& x, const RealGrid& g, std::size_t m);
RealGrid correlate_spectrum(const Spectrum& x_hat, const RealGrid& g, std::size_t m);

Measurement capture(const Image& x, const CodedMask& h, const CaptureConfig& cfg,
                    std::uint64_t rng_seed = 0);

// Capture through a relaxed real-valued mask; never adds noise.
RealGrid capture_relaxed(const RealGrid& x, const RealGrid& mask, const CaptureConfig& cfg);

inline constexpr double kDefaultEpsilon = 1e-10;

// ||H*x||² / (||x||² + epsilon); noise is never applied.
double energy_ratio(const Image& x, const CodedMask& h, const CaptureConfig& cfg,
                    double epsilon = kDefaultEpsilon);
double energy_ratio(const RealGrid& x, const RealGrid& mask, const CaptureConfig& cfg,
                    double epsilon = kDefaultEpsilon);

}  // namespace lensless
