#include "lensless/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace lensless {
namespace {

constexpr int kBlurTaps = 9;

// 9-tap moving average along one axis with edge replication.
RealGrid box_along(const RealGrid& img, bool vertical) {
  const auto rows = static_cast<long>(img.rows());
  const auto cols = static_cast<long>(img.cols());
  RealGrid out(img.rows(), img.cols());
  constexpr long half = kBlurTaps / 2;
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      double s = 0.0;
      for (long t = -half; t <= half; ++t) {
        const long rr = vertical ? std::clamp(r + t, 0L, rows - 1) : r;
        const long cc = vertical ? c : std::clamp(c + t, 0L, cols - 1);
        s += img(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
      }
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = s / kBlurTaps;
    }
  }
  return out;
}

double axis_blur(const RealGrid& img, bool vertical) {
  const RealGrid blurred = box_along(img, vertical);
  double sum_diff = 0.0;
  double sum_var = 0.0;
  const std::size_t r0 = vertical ? 1 : 0;
  const std::size_t c0 = vertical ? 0 : 1;
  for (std::size_t r = r0; r < img.rows(); ++r) {
    for (std::size_t c = c0; c < img.cols(); ++c) {
      const std::size_t pr = vertical ? r - 1 : r;
      const std::size_t pc = vertical ? c : c - 1;
      const double d_img = std::abs(img(r, c) - img(pr, pc));
      const double d_blur = std::abs(blurred(r, c) - blurred(pr, pc));
      sum_diff += d_img;
      sum_var += std::max(0.0, d_img - d_blur);
    }
  }
  if (sum_diff == 0.0) return 1.0;
  return (sum_diff - sum_var) / sum_diff;
}

}  // namespace

double blurriness(const RealGrid& img) {
  if (img.rows() < 10 || img.cols() < 10) throw DimensionError("blurriness needs at least 10×10");
  const double b = std::max(axis_blur(img, false), axis_blur(img, true));
  return std::clamp(b, 0.0, 1.0);
}

BlurReport blur_report(const CodedMask& h, std::span<const Image> images, const CaptureConfig& cfg) {
  if (images.empty()) throw DimensionError("blur report needs at least one image");
  BlurReport report;
  report.mask_id = h.id();
  CaptureConfig clean = cfg;
  clean.noise_std = 0.0;
  for (const Image& x : images) report.scores.push_back(blurriness(capture(x, h, clean).pixels));
  double total = 0.0;
  for (double s : report.scores) total += s;
  report.mean = total / static_cast<double>(report.scores.size());
  return report;
}

std::vector<double> uniform_delta_grid(std::size_t points) {
  if (points < 2) throw ConfigError("delta grid needs at least 2 points");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return grid;
}

namespace {
void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw ConfigError("delta grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) throw ConfigError("delta grid leaves [0,1]");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ConfigError("delta grid must be strictly increasing");
  }
}
}  // namespace

RipCurve rip_curve_from_ratios(std::span<const double> ratios, std::span<const double> delta_grid) {
  if (ratios.empty()) throw DimensionError("RIP curve needs at least one sample");
  check_grid(delta_grid);
  RipCurve curve;
  curve.delta_grid.assign(delta_grid.begin(), delta_grid.end());
  for (double delta : delta_grid) {
    const double threshold = (1.0 - delta) - kRipTolerance;
    std::size_t pass = 0;
    for (double r : ratios) pass += r >= threshold ? 1 : 0;
    curve.satisfaction.push_back(static_cast<double>(pass) / static_cast<double>(ratios.size()));
  }
  if (delta_grid.front() == 0.0 && delta_grid.back() == 1.0) auc_rip(curve);
  return curve;
}

RipCurve rip_curve(const CodedMask& h, std::span<const Image> images,
                   std::span<const double> delta_grid, const CaptureConfig& cfg, double epsilon) {
  if (images.empty()) throw DimensionError("RIP curve needs at least one image");
  std::vector<double> ratios;
  ratios.reserve(images.size());
  for (const Image& x : images) ratios.push_back(energy_ratio(x, h, cfg, epsilon));
  RipCurve curve = rip_curve_from_ratios(ratios, delta_grid);
  curve.normalized = cfg.normalize_mask;
  return curve;
}

double auc_rip(RipCurve& curve) {
  const auto& g = curve.delta_grid;
  if (g.size() < 2 || g.size() != curve.satisfaction.size()) {
    throw DimensionError("RIP curve grid and values disagree");
  }
  if (g.front() != 0.0 || g.back() != 1.0) throw ConfigError("delta grid must cover [0,1]");
  double area = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    area += 0.5 * (g[i] - g[i - 1]) * (curve.satisfaction[i] + curve.satisfaction[i - 1]);
  }
  curve.auc = area;
  return area;
}

}  // namespace lensless
