#pragma once

// Run directories, checkpoints, metric files and the experiment grid.
//
// A training run directory holds:
//   manifest.json         resolved config, build id, seed, paths, timings, status
//   config.json           the exact resolved TrainConfig
//   history.csv           one row per epoch
//   mask_final.pbm(.json) binarized mask of the selected epoch
//   mask_relaxed.f64      sigmoid(logits) of the selected epoch
//   checkpoint_best.bin   logits and recognizer weights of the selected epoch
//   metrics.json          top1, auc_rip, mean_blur, aperture_ratio (test split)
//   rip_curve.csv, blur.csv, rip_curve.svg

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lensless/datasets.hpp"
#include "lensless/metrics.hpp"
#include "lensless/trainer.hpp"

namespace lensless::report {

namespace fs = std::filesystem;
using nlohmann::json;

// git describe of the source tree at configure time, or "unknown".
std::string build_id();

// Display name of a benchmark configuration: pinhole, full-open, random,
// LwoC, LwC-Sim, LwC-TV, LwC-Inv, LwC-RIP.
std::string method_name(MaskKind pattern, HiKind hi);

struct MaskMetrics {
  std::optional<double> top1;  // present when a recognizer was evaluated
  RipCurve rip;
  BlurReport blur;
  double aperture_ratio = 0.0;
  double area_ratio = 0.0;  // m² / n²
  std::string mask_id;
};

// RIP curve, blurriness and aperture of a mask on a set of scenes, plus
// top-1 when params is given.
MaskMetrics evaluate_mask(const CodedMask& mask, const Dataset& ds, const CaptureConfig& cfg,
                          const RecognizerParams* params = nullptr,
                          double epsilon = kDefaultEpsilon);

json metrics_json(const MaskMetrics& m);
void write_metrics(const fs::path& dir, const MaskMetrics& m, const std::string& svg_title);

void write_rip_csv(const fs::path& path, const RipCurve& curve);
RipCurve read_rip_csv(const fs::path& path);
void write_blur_csv(const fs::path& path, const BlurReport& blur);
void write_history_csv(const fs::path& path, const std::vector<EpochRecord>& history,
                       const TrainConfig& cfg);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Static line plot (or markers only when lines is false) on [0,1]-style axes
// scaled to the data.
std::string svg_plot(const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<Series>& series,
                     bool lines = true);

struct Checkpoint {
  MaskLogits logits{RealGrid::square(2)};
  RecognizerParams params;
  std::size_t best_epoch = 0;
  double best_top1 = 0.0;
  json config;
};

void write_checkpoint(const fs::path& path, const TrainedModel& model);
Checkpoint read_checkpoint(const fs::path& path);

struct RunResult {
  TrainedModel model;
  MaskMetrics metrics;
  fs::path dir;
};

// Splits the dataset, trains and writes the full run directory. The manifest
// is written with status "running" before training and updated to
// "complete" or "failed" afterwards.
RunResult run_training(const Dataset& dataset, const TrainConfig& cfg, const fs::path& dir,
                       const EpochObserver& observer = {});

struct GridCell {
  MaskKind pattern = MaskKind::Learned;
  HiKind hi = HiKind::None;
  double alpha = 1.0;
  std::uint64_t seed = 1;

  std::string method() const { return method_name(pattern, hi); }
  // Directory-safe identifier, e.g. "learned-rip-a1-s2".
  std::string id() const;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

// The eight benchmark configurations, each at every seed.
std::vector<GridCell> default_grid(const std::vector<std::uint64_t>& seeds, double alpha = 1.0);

struct GridRow {
  GridCell cell;
  bool ok = false;
  std::string error;
  double top1 = 0.0;
  double auc_rip = 0.0;
  double mean_blur = 0.0;
  double aperture_ratio = 0.0;
  double seconds = 0.0;
};

struct GridOptions {
  std::size_t workers = 1;
  bool quiet = true;
};

// Runs every cell (cells must be unique) in a worker pool, one run directory
// per cell under out_dir, and writes summary.csv and summary.svg. Failed
// cells are reported in their row and never abort the others.
std::vector<GridRow> run_grid(const Dataset& dataset, const std::vector<GridCell>& cells,
                              const TrainConfig& base, const fs::path& out_dir,
                              const GridOptions& opt = {});

// Columns: pattern, hi, alpha, seed, top1, auc_rip, mean_blur, aperture_ratio,
// formatted with the same shortest round-trip text as metrics.json.
std::string summary_csv(const std::vector<GridRow>& rows);

struct MethodSummary {
  std::string method;
  std::size_t runs = 0;
  double median_top1 = 0.0;
  double median_auc_rip = 0.0;
  double median_blur = 0.0;
};

// Medians over seeds of the successful rows, in first-appearance order.
std::vector<MethodSummary> summarize(const std::vector<GridRow>& rows);

double median(std::vector<double> values);

}  // namespace lensless::report
