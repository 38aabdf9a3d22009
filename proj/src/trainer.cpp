#include "lensless/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "lensless/kernels.hpp"

namespace lensless {

using nlohmann::json;

TrainConfig TrainConfig::desk() { return TrainConfig{}; }

TrainConfig TrainConfig::paper() {
  TrainConfig cfg;
  cfg.paper_defaults = true;
  cfg.epochs = 600;
  cfg.batch_size = 128;
  cfg.lr_initial = 0.2;
  cfg.lr_decay_factor = 0.2;
  cfg.lr_decay_every = 100;
  cfg.momentum = 0.9;
  cfg.weight_decay = 5e-4;
  cfg.mask_lr_scale = 1.0;
  return cfg;
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(lr_initial > 0.0)) throw ConfigError("lr_initial must be positive");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0)) {
    throw ConfigError("lr_decay_factor must lie in (0,1]");
  }
  if (lr_decay_every == 0) throw ConfigError("lr_decay_every must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0,1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(mask_lr_scale >= 0.0)) throw ConfigError("mask_lr_scale must be >= 0");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (mask_size < 2) throw ConfigError("mask_size must be at least 2");
  if (hidden_units == 0) throw ConfigError("hidden_units must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie in (0,1)");
  }
  if (pattern == MaskKind::Random && !(random_ratio > 0.0 && random_ratio < 1.0)) {
    throw ConfigError("random_ratio must lie in (0,1)");
  }
  loss_weights().validate();
  if (!learnable() && hi_kind != HiKind::None) {
    throw ConfigError("hi losses require a learnable pattern");
  }
}

json to_json(const TrainConfig& c) {
  return json{{"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"lr_initial", c.lr_initial},
              {"lr_decay_factor", c.lr_decay_factor},
              {"lr_decay_every", c.lr_decay_every},
              {"momentum", c.momentum},
              {"weight_decay", c.weight_decay},
              {"alpha", c.alpha},
              {"hi_kind", std::string(to_string(c.hi_kind))},
              {"seed", c.seed},
              {"normalize_mask", c.normalize_mask},
              {"paper_defaults", c.paper_defaults},
              {"pattern", std::string(to_string(c.pattern))},
              {"random_ratio", c.random_ratio},
              {"mask_size", c.mask_size},
              {"hidden_units", c.hidden_units},
              {"forward_mode", c.forward_mode == ForwardMode::Relaxed ? "relaxed" : "hard"},
              {"hi_batch_mean", c.hi_batch_mean},
              {"mask_lr_scale", c.mask_lr_scale},
              {"epsilon", c.epsilon},
              {"augment", c.augment},
              {"augment_padding", c.augment_options.padding},
              {"vertical_flip", c.augment_options.vertical_flip},
              {"flip_probability", c.augment_options.flip_probability},
              {"train_fraction", c.train_fraction}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  if (!j.is_object()) throw ConfigError("training config must be a JSON object");
  static const char* const kKnown[] = {
      "epochs",       "batch_size",     "lr_initial",      "lr_decay_factor", "lr_decay_every",
      "momentum",     "weight_decay",   "alpha",           "hi_kind",         "seed",
      "normalize_mask", "paper_defaults", "pattern",       "random_ratio",    "mask_size",
      "hidden_units", "forward_mode",   "hi_batch_mean",   "mask_lr_scale",   "epsilon",
      "augment",      "augment_padding", "vertical_flip",  "flip_probability", "train_fraction"};
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(std::begin(kKnown), std::end(kKnown),
                     [&](const char* k) { return key == k; }) == std::end(kKnown)) {
      throw ConfigError("unknown training config key '" + key + "'");
    }
  }
  try {
    if (j.value("paper_defaults", false)) {
      const TrainConfig p = TrainConfig::paper();
      c.paper_defaults = true;
      c.epochs = p.epochs;
      c.batch_size = p.batch_size;
      c.lr_initial = p.lr_initial;
      c.lr_decay_factor = p.lr_decay_factor;
      c.lr_decay_every = p.lr_decay_every;
      c.momentum = p.momentum;
      c.weight_decay = p.weight_decay;
      c.mask_lr_scale = p.mask_lr_scale;
    }
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.lr_initial = j.value("lr_initial", c.lr_initial);
    c.lr_decay_factor = j.value("lr_decay_factor", c.lr_decay_factor);
    c.lr_decay_every = j.value("lr_decay_every", c.lr_decay_every);
    c.momentum = j.value("momentum", c.momentum);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.alpha = j.value("alpha", c.alpha);
    if (j.contains("hi_kind")) c.hi_kind = parse_hi_kind(j.at("hi_kind").get<std::string>());
    c.seed = j.value("seed", c.seed);
    c.normalize_mask = j.value("normalize_mask", c.normalize_mask);
    if (j.contains("pattern")) c.pattern = parse_mask_kind(j.at("pattern").get<std::string>());
    c.random_ratio = j.value("random_ratio", c.random_ratio);
    c.mask_size = j.value("mask_size", c.mask_size);
    c.hidden_units = j.value("hidden_units", c.hidden_units);
    if (j.contains("forward_mode")) {
      const auto mode = j.at("forward_mode").get<std::string>();
      if (mode == "relaxed") {
        c.forward_mode = ForwardMode::Relaxed;
      } else if (mode == "hard") {
        c.forward_mode = ForwardMode::Hard;
      } else {
        throw ConfigError("forward_mode must be 'relaxed' or 'hard'");
      }
    }
    c.hi_batch_mean = j.value("hi_batch_mean", c.hi_batch_mean);
    c.mask_lr_scale = j.value("mask_lr_scale", c.mask_lr_scale);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.augment = j.value("augment", c.augment);
    c.augment_options.padding = j.value("augment_padding", c.augment_options.padding);
    c.augment_options.vertical_flip = j.value("vertical_flip", c.augment_options.vertical_flip);
    c.augment_options.flip_probability =
        j.value("flip_probability", c.augment_options.flip_probability);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad training config value: ") + e.what());
  }
  return c;
}

double lr_schedule(std::size_t epoch, const TrainConfig& cfg) {
  const auto stage = static_cast<double>(epoch / cfg.lr_decay_every);
  return cfg.lr_initial * std::pow(cfg.lr_decay_factor, stage);
}

CodedMask fixed_mask(const TrainConfig& cfg) {
  const int m = static_cast<int>(cfg.mask_size);
  switch (cfg.pattern) {
    case MaskKind::Pinhole:
      return make_pinhole(m);
    case MaskKind::FullOpen:
      return make_full_open(m);
    case MaskKind::Random:
      return make_random(m, cfg.random_ratio, cfg.seed);
    case MaskKind::Learned:
      break;
  }
  throw ConfigError("learned patterns have no fixed mask");
}

std::vector<RealGrid> recognizer_inputs(const RealGrid& mask, std::span<const Image> images,
                                        const CaptureConfig& cfg) {
  if (images.empty()) return {};
  const CircularConvolution op(images.front().size(), build_kernel(mask, cfg.normalize_mask));
  std::vector<RealGrid> out;
  out.reserve(images.size());
  for (const Image& x : images) out.push_back(contrast_stretch(op.apply(x.pixels())).output);
  return out;
}

JointStep joint_step(const RealGrid& mask, const MaskLogits* logits, const RecognizerParams& params,
                     std::span<const Image> images, std::span<const std::size_t> labels,
                     const TrainConfig& cfg) {
  if (images.empty() || images.size() != labels.size()) {
    throw DimensionError("mini-batch images and labels disagree");
  }
  const CaptureConfig capture_cfg = cfg.capture_config();
  const std::size_t n = images.front().size();
  const std::size_t m = mask.rows();
  const Fft2d& fft = Fft2d::for_size(n);
  const CircularConvolution op(n, build_kernel(mask, capture_cfg.normalize_mask));

  std::vector<Spectrum> spectra;
  std::vector<ContrastStretch> stretched;
  std::vector<RealGrid> inputs;
  spectra.reserve(images.size());
  stretched.reserve(images.size());
  inputs.reserve(images.size());
  for (const Image& x : images) {
    if (x.size() != n) throw DimensionError("mini-batch images differ in size");
    spectra.push_back(fft.forward(x.pixels().span()));
    stretched.push_back(contrast_stretch(op.apply_spectrum(spectra.back())));
    inputs.push_back(stretched.back().output);
  }

  const ForwardPass pass = forward(params, inputs);
  const CrossEntropy ce = cross_entropy(pass.logits(), labels);
  JointStep step;
  step.rec_loss = ce.loss;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    if (argmax_row(pass.logits(), b) == labels[b]) ++step.correct;
  }
  step.recognizer = backward(params, pass, ce.grad_logits, n, n);

  if (logits == nullptr) {
    step.total = LossValue{ce.loss, RealGrid(m, m)};
    return step;
  }

  RealGrid grad_kernel = RealGrid::square(m);
  for (std::size_t b = 0; b < images.size(); ++b) {
    const RealGrid g_y = contrast_stretch_backward(stretched[b], step.recognizer.inputs[b]);
    const RealGrid g_k = correlate_spectrum(spectra[b], g_y, m);
    kernels::axpy(1.0, g_k.span(), grad_kernel.span());
  }
  const LossValue rec{ce.loss, kernel_backward(mask, grad_kernel, capture_cfg.normalize_mask)};

  step.hi = hi_loss(cfg.hi_kind, mask, images, capture_cfg, cfg.epsilon);
  const double sign = objective_sign(cfg.hi_kind);
  step.hi_loss_sum = sign * step.hi.value;
  const double scale =
      sign * (cfg.hi_batch_mean && is_batch_sum(cfg.hi_kind) ? 1.0 / static_cast<double>(images.size())
                                                             : 1.0);
  if (scale != 1.0) {
    step.hi.value *= scale;
    for (double& g : step.hi.grad_mask.span()) g *= scale;
  }
  step.total = total_loss(rec, step.hi, cfg.loss_weights());
  step.grad_logits = ste_backward(*logits, step.total.grad_mask);
  return step;
}

double evaluate_top1(const RecognizerParams& params, const RealGrid& mask, const Dataset& ds,
                     const CaptureConfig& cfg) {
  if (ds.samples.empty()) throw DimensionError("cannot evaluate on an empty set");
  constexpr std::size_t kChunk = 256;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < ds.samples.size(); start += kChunk) {
    const std::size_t end = std::min(ds.samples.size(), start + kChunk);
    std::vector<Image> images;
    for (std::size_t i = start; i < end; ++i) images.push_back(ds.samples[i].image);
    const ForwardPass pass = forward(params, recognizer_inputs(mask, images, cfg));
    for (std::size_t i = start; i < end; ++i) {
      if (argmax_row(pass.logits(), i - start) == ds.samples[i].label) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(ds.samples.size());
}

double evaluate_top1(const TrainedModel& model, const Dataset& ds, bool use_binary_mask) {
  const RealGrid mask = use_binary_mask ? model.mask.to_real() : relax(model.logits);
  return evaluate_top1(model.params, mask, ds, model.config.capture_config());
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent seeded streams for each consumer of randomness.
enum class Stream : std::uint64_t { Recognizer = 1, Mask = 2, Shuffle = 3, Augment = 4 };

std::uint64_t stream_seed(std::uint64_t seed, Stream s) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(s)));
}

std::string dump_state(std::size_t epoch, std::size_t step, double lr, const JointStep& js,
                       const MaskLogits& w) {
  std::ostringstream ss;
  double lo = w.values()[0];
  double hi = lo;
  for (double v : w.values().span()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  ss << "non-finite loss at epoch " << epoch << " step " << step << " (lr " << lr
     << ", rec " << js.rec_loss << ", hi " << js.hi.value << ", total " << js.total.value
     << ", logits in [" << lo << ", " << hi << "])";
  return ss.str();
}

}  // namespace

TrainedModel train(const Dataset& train_set, const Dataset& test_set, const TrainConfig& cfg,
                   const EpochObserver& observer) {
  cfg.validate();
  train_set.validate();
  test_set.validate();
  if (train_set.num_classes < 2) throw InvariantError("training needs at least 2 classes");
  if (test_set.image_size() != train_set.image_size()) {
    throw DimensionError("train and test images differ in size");
  }
  const std::size_t n = train_set.image_size();
  const std::size_t m = cfg.mask_size;
  if (m > n) throw DimensionError("mask is larger than the image");
  const CaptureConfig capture_cfg = cfg.capture_config();

  RecognizerParams params = RecognizerParams::mlp(n * n, cfg.hidden_units, train_set.num_classes,
                                                  stream_seed(cfg.seed, Stream::Recognizer));
  MaskLogits logits = cfg.learnable()
                          ? MaskLogits::uniform(m, stream_seed(cfg.seed, Stream::Mask))
                          : MaskLogits::from_mask(fixed_mask(cfg));
  SgdState recognizer_state;
  RealGrid mask_velocity = RealGrid::square(m);
  std::mt19937_64 shuffle_rng(stream_seed(cfg.seed, Stream::Shuffle));
  std::mt19937_64 augment_rng(stream_seed(cfg.seed, Stream::Augment));

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainedModel best{binarize(logits), logits, params, {}, 0, -1.0, cfg};
  best.history.reserve(cfg.epochs);
  std::vector<EpochRecord> history;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_schedule(epoch, cfg);
    const SgdOptions recognizer_opt{lr, cfg.momentum, cfg.weight_decay};
    const SgdOptions mask_opt{lr * cfg.mask_lr_scale, cfg.momentum, 0.0};
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    std::size_t steps = 0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++steps) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<Image> images;
      std::vector<std::size_t> labels;
      images.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const Sample& s = train_set.samples[order[i]];
        images.push_back(cfg.augment ? augment(s.image, augment_rng, cfg.augment_options) : s.image);
        labels.push_back(s.label);
      }

      const bool learn_mask = cfg.learnable();
      const RealGrid mask = !learn_mask || cfg.forward_mode == ForwardMode::Hard
                                ? binarize(logits).to_real()
                                : relax(logits);
      const JointStep js =
          joint_step(mask, learn_mask ? &logits : nullptr, params, images, labels, cfg);
      if (!std::isfinite(js.total.value)) throw NumericError(dump_state(epoch, steps, lr, js, logits));

      rec.rec_loss += js.rec_loss;
      rec.hi_loss += js.hi.value;
      rec.hi_loss_sum += js.hi_loss_sum;
      rec.total += js.total.value;
      correct += js.correct;

      sgd_step(params, js.recognizer, recognizer_state, recognizer_opt);
      if (learn_mask) {
        sgd_update(logits.mutable_values().span(), js.grad_logits.span(), mask_velocity.span(),
                   mask_opt);
      }
    }
    const double inv_steps = 1.0 / static_cast<double>(steps);
    rec.rec_loss *= inv_steps;
    rec.hi_loss *= inv_steps;
    rec.hi_loss_sum *= inv_steps;
    rec.total *= inv_steps;
    rec.train_top1 = static_cast<double>(correct) / static_cast<double>(train_set.size());

    const CodedMask hard = binarize(logits);
    rec.aperture_ratio = aperture_ratio(hard);
    rec.test_top1 = evaluate_top1(params, hard.to_real(), test_set, capture_cfg);
    history.push_back(rec);
    if (rec.test_top1 > best.best_top1) {
      best.mask = hard;
      best.logits = logits;
      best.params = params;
      best.best_epoch = epoch;
      best.best_top1 = rec.test_top1;
    }
    if (observer) observer(rec);
  }
  best.history = std::move(history);
  return best;
}

TrainedModel train(const Dataset& dataset, const TrainConfig& cfg, const EpochObserver& observer) {
  cfg.validate();
  const auto [train_set, test_set] = split(dataset, SplitSpec{cfg.train_fraction, cfg.seed});
  return train(train_set, test_set, cfg, observer);
}

}  // namespace lensless
