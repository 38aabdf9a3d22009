#include "lensless/losses.hpp"

#include <cmath>
#include <string>

#include "lensless/kernels.hpp"

namespace lensless {

std::string_view to_string(HiKind kind) {
  switch (kind) {
    case HiKind::None:
      return "none";
    case HiKind::Sim:
      return "sim";
    case HiKind::TV:
      return "tv";
    case HiKind::Inv:
      return "inv";
    case HiKind::RIP:
      return "rip";
  }
  return "unknown";
}

HiKind parse_hi_kind(std::string_view name) {
  if (name == "none") return HiKind::None;
  if (name == "sim") return HiKind::Sim;
  if (name == "tv") return HiKind::TV;
  if (name == "inv") return HiKind::Inv;
  if (name == "rip") return HiKind::RIP;
  throw ConfigError("unknown human-imperceptibility loss '" + std::string(name) + "'");
}

bool is_batch_sum(HiKind kind) { return kind == HiKind::Sim || kind == HiKind::RIP; }

double objective_sign(HiKind kind) { return kind == HiKind::RIP ? -1.0 : 1.0; }

void LossWeights::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be finite and >= 0");
}

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void require_square_mask(const RealGrid& h) {
  if (h.rows() != h.cols() || h.rows() == 0) throw DimensionError("mask must be square");
}

void require_batch(const RealGrid& h, std::span<const Image> batch) {
  require_square_mask(h);
  if (batch.empty()) throw DimensionError("loss batch is empty");
  const std::size_t n = batch.front().size();
  for (const Image& x : batch) {
    if (x.size() != n) throw DimensionError("batch images differ in size");
  }
  if (h.rows() > n) throw DimensionError("mask is larger than the image");
}

}  // namespace

MaskGradients mask_gradients(const RealGrid& h) {
  require_square_mask(h);
  const std::size_t m = h.rows();
  if (m < 2) throw DimensionError("mask gradients need m >= 2");
  MaskGradients g{RealGrid(m, m - 1), RealGrid(m - 1, m)};
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c + 1 < m; ++c) g.dx(r, c) = h(r, c + 1) - h(r, c);
  }
  for (std::size_t r = 0; r + 1 < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) g.dy(r, c) = h(r + 1, c) - h(r, c);
  }
  return g;
}

LossValue sim_loss(const RealGrid& h, std::span<const Image> batch, const CaptureConfig& cfg) {
  require_batch(h, batch);
  cfg.validate();
  const std::size_t n = batch.front().size();
  const std::size_t m = h.rows();
  const CircularConvolution learned(n, build_kernel(h, cfg.normalize_mask));
  const CircularConvolution open(n, build_kernel(RealGrid::square(m, 1.0), cfg.normalize_mask));
  const Fft2d& fft = Fft2d::for_size(n);

  LossValue out{0.0, RealGrid::square(m)};
  for (const Image& x : batch) {
    const Spectrum x_hat = fft.forward(x.pixels().span());
    RealGrid residual = learned.apply_spectrum(x_hat);
    const RealGrid reference = open.apply_spectrum(x_hat);
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= reference[i];
    out.value += kernels::sum_squares(residual.span());
    const RealGrid g = correlate_spectrum(x_hat, residual, m);
    kernels::axpy(2.0, g.span(), out.grad_mask.span());
  }
  out.grad_mask = kernel_backward(h, out.grad_mask, cfg.normalize_mask);
  return out;
}

LossValue tv_loss(const RealGrid& h) {
  require_square_mask(h);
  const std::size_t m = h.rows();
  if (m < 2) throw DimensionError("TV loss needs m >= 2");
  LossValue out{0.0, RealGrid::square(m)};
  auto edge = [&](std::size_t from, std::size_t to) {
    const double d = h[to] - h[from];
    out.value -= std::abs(d);
    out.grad_mask[to] -= sign(d);
    out.grad_mask[from] += sign(d);
  };
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c + 1 < m; ++c) edge(r * m + c, r * m + c + 1);
  }
  for (std::size_t r = 0; r + 1 < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) edge(r * m + c, (r + 1) * m + c);
  }
  return out;
}

LossValue inv_loss(const RealGrid& h) {
  require_square_mask(h);
  LossValue out{0.0, RealGrid(h.rows(), h.cols())};
  for (std::size_t i = 0; i < h.size(); ++i) {
    out.value -= std::abs(h[i]);
    out.grad_mask[i] = -sign(h[i]);
  }
  return out;
}

LossValue rip_loss(const RealGrid& h, std::span<const Image> batch, const CaptureConfig& cfg,
                   double epsilon) {
  require_batch(h, batch);
  cfg.validate();
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  const std::size_t n = batch.front().size();
  const std::size_t m = h.rows();
  const CircularConvolution op(n, build_kernel(h, cfg.normalize_mask));
  const Fft2d& fft = Fft2d::for_size(n);

  LossValue out{0.0, RealGrid::square(m)};
  for (const Image& x : batch) {
    const Spectrum x_hat = fft.forward(x.pixels().span());
    const RealGrid y = op.apply_spectrum(x_hat);
    const double denom = kernels::sum_squares(x.pixels().span()) + epsilon;
    out.value -= kernels::sum_squares(y.span()) / denom;
    const RealGrid g = correlate_spectrum(x_hat, y, m);
    kernels::axpy(-2.0 / denom, g.span(), out.grad_mask.span());
  }
  out.grad_mask = kernel_backward(h, out.grad_mask, cfg.normalize_mask);
  return out;
}

LossValue hi_loss(HiKind kind, const RealGrid& h, std::span<const Image> batch,
                  const CaptureConfig& cfg, double epsilon) {
  switch (kind) {
    case HiKind::None:
      return LossValue{0.0, RealGrid(h.rows(), h.cols())};
    case HiKind::Sim:
      return sim_loss(h, batch, cfg);
    case HiKind::TV:
      return tv_loss(h);
    case HiKind::Inv:
      return inv_loss(h);
    case HiKind::RIP:
      return rip_loss(h, batch, cfg, epsilon);
  }
  throw ConfigError("unknown loss kind");
}

LossValue total_loss(const LossValue& rec, const LossValue& hi, const LossWeights& w) {
  w.validate();
  if (w.hi_kind == HiKind::None) return rec;
  if (!rec.grad_mask.same_shape(hi.grad_mask)) throw DimensionError("loss gradient shape mismatch");
  LossValue out = rec;
  out.value += w.alpha * hi.value;
  kernels::axpy(w.alpha, hi.grad_mask.span(), out.grad_mask.span());
  return out;
}

}  // namespace lensless
