#pragma once

// Joint optimization of the mask logits and the recognizer under
// L = L_rec + alpha * L_hi, with step-decayed SGD and best-epoch selection.

#include <cstdint>
#include <functional>
#include <vector>

#include "json.hpp"
#include "lensless/datasets.hpp"
#include "lensless/losses.hpp"
#include "lensless/masks.hpp"
#include "lensless/recognizer.hpp"

namespace lensless {

// How the mask enters the capture during training.
enum class ForwardMode {
  Relaxed,  // sigmoid(logits)
  Hard,     // binarize(logits), straight-through backward
};

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double lr_initial = 0.05;
  double lr_decay_factor = 0.2;
  std::size_t lr_decay_every = 100;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  double alpha = 1.0;
  HiKind hi_kind = HiKind::None;
  std::uint64_t seed = 1;
  bool normalize_mask = true;
  bool paper_defaults = false;

  MaskKind pattern = MaskKind::Learned;
  double random_ratio = 0.5;
  std::size_t mask_size = 8;
  std::size_t hidden_units = 256;
  ForwardMode forward_mode = ForwardMode::Relaxed;
  // Divide batch-summed hi losses (sim, rip) by the batch size.
  bool hi_batch_mean = true;
  // Mask logits use lr * mask_lr_scale and no weight decay.
  double mask_lr_scale = 10.0;
  double epsilon = kDefaultEpsilon;
  bool augment = true;
  AugmentOptions augment_options;
  double train_fraction = 0.95;

  // Small-scale profile used by the tests and the default CLI runs.
  static TrainConfig desk();
  // 600 epochs, batch 128, lr 0.2 divided by 5 every 100 epochs,
  // momentum 0.9, weight decay 5e-4, one learning rate for all parameters.
  static TrainConfig paper();

  void validate() const;
  bool learnable() const { return pattern == MaskKind::Learned; }
  LossWeights loss_weights() const { return {alpha, hi_kind}; }
  CaptureConfig capture_config() const { return {normalize_mask, 0.0}; }
};

nlohmann::json to_json(const TrainConfig& cfg);
// Fields absent from j keep their value in base.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base);

double lr_schedule(std::size_t epoch, const TrainConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;
  double rec_loss = 0.0;     // batch mean, averaged over steps
  double hi_loss = 0.0;      // term combined into the objective: total = rec + alpha * hi
  double hi_loss_sum = 0.0;  // same term before the batch-mean division
  double total = 0.0;
  double lr = 0.0;
  double train_top1 = 0.0;
  double test_top1 = 0.0;
  double aperture_ratio = 0.0;
};

struct TrainedModel {
  CodedMask mask;        // binarized mask of the selected epoch
  MaskLogits logits;     // logits of the selected epoch
  RecognizerParams params;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_top1 = 0.0;
  TrainConfig config;
};

using EpochObserver = std::function<void(const EpochRecord&)>;

// The fixed mask for a non-learnable pattern (pinhole, full-open, random).
CodedMask fixed_mask(const TrainConfig& cfg);

TrainedModel train(const Dataset& train_set, const Dataset& test_set, const TrainConfig& cfg,
                   const EpochObserver& observer = {});
// Splits with cfg.train_fraction and cfg.seed first.
TrainedModel train(const Dataset& dataset, const TrainConfig& cfg, const EpochObserver& observer = {});

// Contrast-stretched measurements of images through a real-valued mask.
std::vector<RealGrid> recognizer_inputs(const RealGrid& mask, std::span<const Image> images,
                                        const CaptureConfig& cfg);

double evaluate_top1(const RecognizerParams& params, const RealGrid& mask, const Dataset& ds,
                     const CaptureConfig& cfg);
// Hard binary mask when use_binary_mask, otherwise the relaxed sigmoid mask.
double evaluate_top1(const TrainedModel& model, const Dataset& ds, bool use_binary_mask);

}  // namespace lensless

namespace lensless {

// One evaluation of the joint objective on a mini-batch.
struct JointStep {
  double rec_loss = 0.0;
  double hi_loss_sum = 0.0;  // objective-signed hi value before batch-mean division
  LossValue hi;              // objective-signed, after optional division
  LossValue total;           // grad_mask is dL/dmask
  RealGrid grad_logits;      // dL/dlogits through the straight-through estimator
  RecognizerGradients recognizer;
  std::size_t correct = 0;
};

// Captures images through mask, stretches contrast, runs the recognizer and
// the hi loss, and backpropagates. Mask gradients are produced only when
// logits is non-null.
JointStep joint_step(const RealGrid& mask, const MaskLogits* logits, const RecognizerParams& params,
                     std::span<const Image> images, std::span<const std::size_t> labels,
                     const TrainConfig& cfg);

}  // namespace lensless
