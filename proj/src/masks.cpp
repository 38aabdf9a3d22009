#include "lensless/masks.hpp"

#include <random>
#include <string>

namespace lensless {

MaskLogits::MaskLogits(RealGrid logits) : logits_(std::move(logits)) {
  if (logits_.rows() != logits_.cols() || logits_.rows() == 0) {
    throw DimensionError("mask logits must be a non-empty square grid");
  }
  for (double v : logits_.span()) {
    if (!std::isfinite(v)) throw InvariantError("non-finite mask logit");
  }
}

MaskLogits MaskLogits::from_mask(const CodedMask& mask, double magnitude) {
  RealGrid w = RealGrid::square(mask.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = mask.cells()[i] ? magnitude : -magnitude;
  return MaskLogits(std::move(w));
}

MaskLogits MaskLogits::uniform(std::size_t m, std::uint64_t seed, double spread) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-spread, spread);
  RealGrid w = RealGrid::square(m);
  for (double& v : w.span()) v = dist(rng);
  return MaskLogits(std::move(w));
}

std::string_view to_string(MaskKind kind) {
  switch (kind) {
    case MaskKind::Pinhole:
      return "pinhole";
    case MaskKind::FullOpen:
      return "full-open";
    case MaskKind::Random:
      return "random";
    case MaskKind::Learned:
      return "learned";
  }
  return "unknown";
}

MaskKind parse_mask_kind(std::string_view name) {
  if (name == "pinhole") return MaskKind::Pinhole;
  if (name == "full-open") return MaskKind::FullOpen;
  if (name == "random") return MaskKind::Random;
  if (name == "learned") return MaskKind::Learned;
  throw ConfigError("unknown pattern '" + std::string(name) + "'");
}

namespace {
void require_side(int m) {
  if (m < 1) throw DimensionError("mask side must be at least 1");
}
}  // namespace

CodedMask make_pinhole(int m) {
  require_side(m);
  const auto side = static_cast<std::size_t>(m);
  Grid<std::uint8_t> cells(side, side, 0);
  cells(side / 2, side / 2) = 1;
  return CodedMask(std::move(cells));
}

CodedMask make_full_open(int m) {
  require_side(m);
  const auto side = static_cast<std::size_t>(m);
  return CodedMask(Grid<std::uint8_t>(side, side, 1));
}

CodedMask make_random(int m, double ratio, std::uint64_t seed) {
  require_side(m);
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("random mask ratio must lie in (0,1)");
  const auto side = static_cast<std::size_t>(m);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution open(ratio);
  Grid<std::uint8_t> cells(side, side, 0);
  for (auto& c : cells.span()) c = open(rng) ? 1 : 0;
  return CodedMask(std::move(cells));
}

RealGrid relax(const MaskLogits& w) {
  RealGrid out = w.values();
  for (double& v : out.span()) v = sigmoid(v);
  return out;
}

CodedMask binarize(const MaskLogits& w) {
  const RealGrid& v = w.values();
  Grid<std::uint8_t> cells(v.rows(), v.cols(), 0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw InvariantError("non-finite mask logit");
    cells[i] = v[i] > 0.0 ? 1 : 0;
  }
  return CodedMask(std::move(cells));
}

RealGrid ste_backward(const MaskLogits& w, const RealGrid& grad_wrt_mask) {
  if (!w.values().same_shape(grad_wrt_mask)) throw DimensionError("STE gradient shape mismatch");
  RealGrid out(grad_wrt_mask.rows(), grad_wrt_mask.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double s = sigmoid(w.values()[i]);
    out[i] = grad_wrt_mask[i] * s * (1.0 - s);
  }
  return out;
}

double aperture_ratio(const CodedMask& h) {
  return static_cast<double>(h.open_count()) / static_cast<double>(h.cells().size());
}

}  // namespace lensless
