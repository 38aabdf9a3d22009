#pragma once

// Objective privacy scores: a no-reference blurriness estimate and the
// RIP satisfaction curve with its area (AUC-RIP). Smaller AUC-RIP means the
// measurement operator is harder to invert.

#include <span>
#include <string>
#include <vector>

#include "lensless/imaging.hpp"

namespace lensless {

// Blur score in [0,1], higher is blurrier: the fraction of neighbor-difference
// energy that survives an extra 9-tap averaging, taken as the max over the
// horizontal and vertical axes. Requires n >= 10. A flat image scores 1.
double blurriness(const RealGrid& img);
inline double blurriness(const Image& img) { return blurriness(img.pixels()); }

struct BlurReport {
  std::vector<double> scores;
  double mean = 0.0;
  std::string mask_id;
};

// Blurriness of each image's measurement through the mask.
BlurReport blur_report(const CodedMask& h, std::span<const Image> images, const CaptureConfig& cfg);

struct RipCurve {
  std::vector<double> delta_grid;
  std::vector<double> satisfaction;
  double auc = 0.0;
  bool normalized = true;
};

std::vector<double> uniform_delta_grid(std::size_t points = 101);

// An energy ratio passes at delta when ratio >= (1 - delta) - kRipTolerance.
inline constexpr double kRipTolerance = 1e-9;

RipCurve rip_curve_from_ratios(std::span<const double> ratios, std::span<const double> delta_grid);
RipCurve rip_curve(const CodedMask& h, std::span<const Image> images,
                   std::span<const double> delta_grid, const CaptureConfig& cfg,
                   double epsilon = kDefaultEpsilon);

// Trapezoidal area over the grid, which must start at 0 and end at 1.
// Stores the result in curve.auc.
double auc_rip(RipCurve& curve);

}  // namespace lensless
