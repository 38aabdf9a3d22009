#include "lensless/imaging.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "lensless/kernels.hpp"

namespace lensless {

Image::Image(RealGrid pixels) : pixels_(std::move(pixels)) {
  if (pixels_.rows() != pixels_.cols()) throw DimensionError("image must be square");
  if (pixels_.rows() < 2) throw DimensionError("image side must be at least 2");
  for (double v : pixels_.span()) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvariantError("image pixel outside [0,1]");
  }
}

Image Image::constant(std::size_t n, double value) { return Image(RealGrid::square(n, value)); }

CodedMask::CodedMask(Grid<std::uint8_t> cells) : cells_(std::move(cells)) {
  if (cells_.rows() != cells_.cols()) throw DimensionError("mask must be square");
  if (cells_.rows() < 1) throw DimensionError("mask side must be at least 1");
  for (std::uint8_t v : cells_.span()) {
    if (v > 1) throw InvariantError("mask cell is not binary");
  }
}

CodedMask CodedMask::from_real(const RealGrid& values) {
  Grid<std::uint8_t> cells(values.rows(), values.cols());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == 1.0) {
      cells[i] = 1;
    } else if (values[i] != 0.0) {
      throw InvariantError("mask cell is not binary");
    }
  }
  return CodedMask(std::move(cells));
}

std::size_t CodedMask::open_count() const {
  std::size_t n = 0;
  for (std::uint8_t v : cells_.span()) n += v;
  return n;
}

RealGrid CodedMask::to_real() const {
  RealGrid out(cells_.rows(), cells_.cols());
  for (std::size_t i = 0; i < cells_.size(); ++i) out[i] = cells_[i];
  return out;
}

std::string CodedMask::id() const {
  // FNV-1a over the cell bytes.
  std::uint64_t h = 1469598103934665603ULL;
  for (std::uint8_t v : cells_.span()) {
    h ^= v;
    h *= 1099511628211ULL;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "m%zu-%016llx", size(), static_cast<unsigned long long>(h));
  return buf;
}

void CaptureConfig::validate() const {
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw ConfigError("noise_std must be a finite value >= 0");
  }
}

RealGrid build_kernel(const RealGrid& mask, bool normalize) {
  RealGrid k = mask;
  if (!normalize) return k;
  double total = 0.0;
  for (double v : mask.span()) total += v;
  if (total == 0.0) return k;
  for (double& v : k.span()) v /= total;
  return k;
}

RealGrid kernel_backward(const RealGrid& mask, const RealGrid& grad_kernel, bool normalize) {
  if (!mask.same_shape(grad_kernel)) throw DimensionError("kernel gradient shape mismatch");
  if (!normalize) return grad_kernel;
  double total = 0.0;
  for (double v : mask.span()) total += v;
  if (total == 0.0) return grad_kernel;
  // k = h / S  =>  dL/dh_j = (g_j - sum_i g_i k_i) / S
  double weighted = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) weighted += grad_kernel[i] * (mask[i] / total);
  RealGrid out(mask.rows(), mask.cols());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = (grad_kernel[i] - weighted) / total;
  return out;
}

namespace {

RealGrid pad_kernel(const RealGrid& kernel, std::size_t n) {
  if (kernel.rows() != kernel.cols()) throw DimensionError("kernel must be square");
  if (kernel.rows() > n) throw DimensionError("mask is larger than the image");
  RealGrid padded = RealGrid::square(n);
  for (std::size_t r = 0; r < kernel.rows(); ++r) {
    for (std::size_t c = 0; c < kernel.cols(); ++c) padded(r, c) = kernel(r, c);
  }
  return padded;
}

void require_square(const RealGrid& x) {
  if (x.rows() != x.cols() || x.rows() == 0) throw DimensionError("scene must be square");
}

}  // namespace

CircularConvolution::CircularConvolution(std::size_t n, const RealGrid& kernel) : n_(n) {
  kernel_hat_ = Fft2d::for_size(n).forward(pad_kernel(kernel, n).span());
}

RealGrid CircularConvolution::apply(const RealGrid& x) const {
  require_square(x);
  if (x.rows() != n_) throw DimensionError("scene size does not match the operator");
  return apply_spectrum(Fft2d::for_size(n_).forward(x.span()));
}

RealGrid CircularConvolution::apply_spectrum(const Spectrum& x_hat) const {
  if (x_hat.size() != kernel_hat_.size()) throw DimensionError("spectrum size mismatch");
  Spectrum prod(x_hat.size());
  kernels::complex_multiply(kernel_hat_, x_hat, prod);
  return Fft2d::for_size(n_).inverse(std::move(prod));
}

RealGrid convolve(const RealGrid& x, const RealGrid& kernel) {
  require_square(x);
  // A single-tap kernel is a scaled circular shift; do it exactly.
  std::size_t taps = 0, at = 0;
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    if (kernel[i] != 0.0) ++taps, at = i;
  }
  if (taps == 1 && kernel.rows() <= x.rows() && kernel.cols() <= x.cols()) {
    const std::size_t n = x.rows();
    const std::size_t a = at / kernel.cols(), b = at % kernel.cols();
    const double w = kernel[at];
    RealGrid y = RealGrid::square(n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) y((r + a) % n, (c + b) % n) = w == 1.0 ? x(r, c) : w * x(r, c);
    }
    return y;
  }
  return CircularConvolution(x.rows(), kernel).apply(x);
}

RealGrid correlate_spectrum(const Spectrum& x_hat, const RealGrid& g, std::size_t m) {
  require_square(g);
  const std::size_t n = g.rows();
  if (m > n) throw DimensionError("mask is larger than the image");
  const Fft2d& fft = Fft2d::for_size(n);
  if (x_hat.size() != fft.spectrum_size()) throw DimensionError("spectrum size mismatch");
  Spectrum g_hat = fft.forward(g.span());
  // C(f) = conj(X(f)) G(f) for real x.
  kernels::complex_multiply(x_hat, g_hat, g_hat, /*conj_a=*/true);
  const RealGrid full = fft.inverse(std::move(g_hat));
  RealGrid out = RealGrid::square(m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) out(a, b) = full(a, b);
  }
  return out;
}

RealGrid correlate(const RealGrid& x, const RealGrid& g, std::size_t m) {
  require_square(x);
  if (!x.same_shape(g)) throw DimensionError("correlation operands differ in shape");
  return correlate_spectrum(Fft2d::for_size(x.rows()).forward(x.span()), g, m);
}

Measurement capture(const Image& x, const CodedMask& h, const CaptureConfig& cfg,
                    std::uint64_t rng_seed) {
  cfg.validate();
  if (h.size() > x.size()) throw DimensionError("mask is larger than the image");
  Measurement y;
  y.pixels = convolve(x.pixels(), build_kernel(h.to_real(), cfg.normalize_mask));
  y.mask_id = h.id();
  y.normalized = cfg.normalize_mask;
  if (cfg.noise_std > 0.0) {
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> noise(0.0, cfg.noise_std);
    for (double& v : y.pixels.span()) v += noise(rng);
  }
  return y;
}

RealGrid capture_relaxed(const RealGrid& x, const RealGrid& mask, const CaptureConfig& cfg) {
  cfg.validate();
  return convolve(x, build_kernel(mask, cfg.normalize_mask));
}

double energy_ratio(const RealGrid& x, const RealGrid& mask, const CaptureConfig& cfg,
                    double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  const RealGrid y = capture_relaxed(x, mask, cfg);
  return kernels::sum_squares(y.span()) / (kernels::sum_squares(x.span()) + epsilon);
}

double energy_ratio(const Image& x, const CodedMask& h, const CaptureConfig& cfg, double epsilon) {
  if (h.size() > x.size()) throw DimensionError("mask is larger than the image");
  return energy_ratio(x.pixels(), h.to_real(), cfg, epsilon);
}

}  // namespace lensless
