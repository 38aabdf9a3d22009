#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "lensless/metrics.hpp"
#include "lensless/trainer.hpp"
#include "oracles.hpp"

using namespace lensless;

namespace {

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  cfg.mask_size = 4;
  cfg.hidden_units = 16;
  return cfg;
}

Dataset small_dataset() { return gen_synthetic(3, 12, 12, 5); }

}  // namespace

TEST_CASE("learning-rate schedule") {
  const TrainConfig paper = TrainConfig::paper();
  CHECK(lr_schedule(0, paper) == 0.2);
  CHECK(lr_schedule(99, paper) == 0.2);
  CHECK(lr_schedule(100, paper) == doctest::Approx(0.04).epsilon(1e-15));
  CHECK(lr_schedule(200, paper) == doctest::Approx(0.008).epsilon(1e-15));
  CHECK(lr_schedule(250, paper) == doctest::Approx(0.008).epsilon(1e-15));
  double prev = lr_schedule(0, paper);
  for (std::size_t e = 1; e < 600; ++e) {
    CHECK(lr_schedule(e, paper) <= prev);
    prev = lr_schedule(e, paper);
  }
  CHECK(paper.epochs == 600);
  CHECK(paper.batch_size == 128);
  CHECK(paper.momentum == 0.9);
  CHECK(paper.weight_decay == 5e-4);
  const TrainConfig desk = TrainConfig::desk();
  CHECK(desk.epochs == 50);
  CHECK(desk.batch_size == 32);
  CHECK(desk.mask_size == 8);
}

TEST_CASE("config validation and JSON") {
  TrainConfig cfg;
  cfg.pattern = MaskKind::Pinhole;
  cfg.hi_kind = HiKind::TV;
  CHECK_THROWS_WITH_AS(cfg.validate(), "hi losses require a learnable pattern", ConfigError);
  cfg.hi_kind = HiKind::None;
  CHECK_NOTHROW(cfg.validate());
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  TrainConfig a;
  a.hi_kind = HiKind::RIP;
  a.alpha = 0.25;
  a.forward_mode = ForwardMode::Hard;
  a.seed = 99;
  const TrainConfig b = train_config_from_json(to_json(a), TrainConfig{});
  CHECK(to_json(b) == to_json(a));
  CHECK_THROWS_AS(train_config_from_json({{"epoch", 3}}, TrainConfig{}), ConfigError);
  CHECK_THROWS_AS(train_config_from_json({{"epochs", "many"}}, TrainConfig{}), ConfigError);
  const TrainConfig p = train_config_from_json({{"paper_defaults", true}, {"epochs", 7}}, TrainConfig{});
  CHECK(p.epochs == 7);
  CHECK(p.batch_size == 128);
  CHECK(p.lr_initial == 0.2);
}

TEST_CASE("training is deterministic per seed") {
  const Dataset ds = small_dataset();
  TrainConfig cfg = small_config();
  cfg.hi_kind = HiKind::RIP;
  const TrainedModel a = train(ds, cfg);
  const TrainedModel b = train(ds, cfg);
  CHECK(a.mask == b.mask);
  CHECK(a.logits == b.logits);
  CHECK(a.params == b.params);
  REQUIRE(a.history.size() == cfg.epochs);
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    CHECK(a.history[e].test_top1 == b.history[e].test_top1);
    CHECK(a.history[e].total == b.history[e].total);
  }
  cfg.seed = 2;
  const TrainedModel c = train(ds, cfg);
  CHECK_FALSE(c.logits == a.logits);
}

TEST_CASE("alpha = 0 reproduces the unconstrained run bit for bit") {
  const Dataset ds = small_dataset();
  TrainConfig none = small_config();
  TrainConfig zero = none;
  zero.hi_kind = HiKind::Sim;
  zero.alpha = 0.0;
  const TrainedModel a = train(ds, none);
  const TrainedModel b = train(ds, zero);
  CHECK(a.logits == b.logits);
  CHECK(a.params == b.params);
  for (std::size_t e = 0; e < none.epochs; ++e) {
    CHECK(a.history[e].rec_loss == b.history[e].rec_loss);
    CHECK(a.history[e].total == b.history[e].total);
    CHECK(a.history[e].test_top1 == b.history[e].test_top1);
  }
}

TEST_CASE("fixed patterns never touch the logits") {
  const Dataset ds = small_dataset();
  for (MaskKind kind : {MaskKind::Pinhole, MaskKind::FullOpen, MaskKind::Random}) {
    TrainConfig cfg = small_config();
    cfg.pattern = kind;
    const TrainedModel m = train(ds, cfg);
    CHECK(m.logits == MaskLogits::from_mask(fixed_mask(cfg)));
    CHECK(m.mask == fixed_mask(cfg));
  }
  TrainConfig learned = small_config();
  CHECK_THROWS_AS(fixed_mask(learned), ConfigError);
}

TEST_CASE("best epoch is the maximum of the history") {
  const Dataset ds = small_dataset();
  TrainConfig cfg = small_config();
  cfg.epochs = 6;
  std::size_t seen = 0;
  const TrainedModel m = train(ds, cfg, [&](const EpochRecord& r) { CHECK(r.epoch == seen++); });
  CHECK(seen == 6);
  double best = 0.0;
  for (const EpochRecord& r : m.history) best = std::max(best, r.test_top1);
  CHECK(m.best_top1 == best);
  CHECK(m.history[m.best_epoch].test_top1 == best);
  for (std::size_t e = 0; e < m.best_epoch; ++e) CHECK(m.history[e].test_top1 < best);
  const auto [train_set, test_set] = split(ds, {cfg.train_fraction, cfg.seed});
  CHECK(evaluate_top1(m, test_set, true) == m.best_top1);
  for (const EpochRecord& r : m.history) {
    CHECK(r.total == doctest::Approx(r.rec_loss + cfg.alpha * r.hi_loss).epsilon(1e-12));
  }
}

TEST_CASE("degenerate inputs are rejected") {
  Dataset one;
  one.num_classes = 1;
  one.class_names = {"only"};
  std::mt19937_64 rng(1);
  for (int i = 0; i < 6; ++i) one.samples.push_back({oracle::random_image(12, rng), 0});
  CHECK_THROWS_AS(train(one, small_config()), InvariantError);

  TrainConfig big_mask = small_config();
  big_mask.mask_size = 20;
  CHECK_THROWS_AS(train(small_dataset(), big_mask), DimensionError);

  TrainConfig wild = small_config();
  wild.lr_initial = 1e200;
  wild.mask_lr_scale = 1.0;
  CHECK_THROWS_AS(train(small_dataset(), wild), NumericError);
}

TEST_CASE("end-to-end mask logit gradient matches finite differences") {
  const Dataset ds = gen_synthetic(3, 2, 12, 9);
  const std::vector<Image> images = ds.images();
  std::vector<std::size_t> labels;
  for (const Sample& s : ds.samples) labels.push_back(s.label);
  const RecognizerParams params = RecognizerParams::mlp(144, 10, 3, 4);
  const MaskLogits logits = MaskLogits::uniform(4, 8, 1.5);

  for (HiKind kind : {HiKind::None, HiKind::Sim, HiKind::TV, HiKind::Inv, HiKind::RIP}) {
    CAPTURE(to_string(kind));
    TrainConfig cfg = small_config();
    cfg.hi_kind = kind;
    cfg.alpha = 0.7;
    const JointStep js = joint_step(relax(logits), &logits, params, images, labels, cfg);
    const RealGrid fd = oracle::central_difference(
        [&](const RealGrid& w) {
          const MaskLogits ml(w);
          return joint_step(relax(ml), nullptr, params, images, labels, cfg).rec_loss +
                 cfg.alpha * objective_sign(kind) *
                     (hi_loss(kind, relax(ml), images, cfg.capture_config()).value /
                      (is_batch_sum(kind) ? static_cast<double>(images.size()) : 1.0));
        },
        logits.values());
    CHECK(oracle::rel_error(js.grad_logits, fd) < 1e-5);
    CHECK(js.total.value == doctest::Approx(js.rec_loss + 0.7 * js.hi.value).epsilon(1e-14));
  }
}

TEST_CASE("evaluate_top1 on an oracle and a chance recognizer") {
  // Two classes with disjoint bright halves and a linear template matcher.
  Dataset toy;
  toy.num_classes = 2;
  toy.class_names = {"left", "right"};
  for (int i = 0; i < 10; ++i) {
    for (std::size_t label = 0; label < 2; ++label) {
      RealGrid px = RealGrid::square(12);
      for (std::size_t r = 0; r < 12; ++r) {
        for (std::size_t c = 0; c < 12; ++c) {
          const bool lit = label == 0 ? c < 6 : c >= 6;
          px(r, c) = lit ? 0.5 + 0.04 * i : 0.0;
        }
      }
      toy.samples.push_back({Image(px), label});
    }
  }
  const RealGrid mask = make_pinhole(4).to_real();
  const auto inputs = recognizer_inputs(mask, toy.images(), {});
  const std::vector<LayerSpec> arch{{2, Activation::None}};
  RecognizerParams oracle_net = RecognizerParams::init(144, arch, 1);
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t i = 0; i < 144; ++i) oracle_net.layers[0].weights(k, i) = inputs[k][i];
  }
  CHECK(evaluate_top1(oracle_net, mask, toy, {}) == 1.0);

  // Labels drawn independently of the images: accuracy is Binomial(n, 1/10) / n.
  Dataset shuffled = gen_synthetic(10, 100, 12, 2);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, 9);
  for (Sample& s : shuffled.samples) s.label = pick(rng);
  const RecognizerParams chance = RecognizerParams::mlp(144, 16, 10, 5);
  const double acc = evaluate_top1(chance, make_pinhole(4).to_real(), shuffled, {});
  const double sigma = std::sqrt(0.1 * 0.9 / 1000.0);
  CHECK(std::abs(acc - 0.1) <= 3.0 * sigma);

  Dataset empty;
  CHECK_THROWS_AS(evaluate_top1(chance, mask, empty, {}), DimensionError);
}

TEST_CASE("desk profile: pinhole separates the synthetic classes and RIP lowers AUC-RIP") {
  const Dataset ds = gen_synthetic(10, 100, 24, 7);
  TrainConfig pin = TrainConfig::desk();
  pin.pattern = MaskKind::Pinhole;
  CHECK(train(ds, pin).best_top1 > 0.90);

  TrainConfig lwoc = TrainConfig::desk();
  TrainConfig rip = lwoc;
  rip.hi_kind = HiKind::RIP;
  const auto [train_set, test_set] = split(ds, {lwoc.train_fraction, lwoc.seed});
  const auto images = test_set.images();
  const auto grid = uniform_delta_grid();
  const double auc_none = rip_curve(train(train_set, test_set, lwoc).mask, images, grid, {}).auc;
  const double auc_rip = rip_curve(train(train_set, test_set, rip).mask, images, grid, {}).auc;
  CHECK(auc_rip < auc_none);
}
