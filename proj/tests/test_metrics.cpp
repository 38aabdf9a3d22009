#include <algorithm>
#include <random>
#include <vector>

#include "doctest.h"
#include "lensless/datasets.hpp"
#include "lensless/masks.hpp"
#include "lensless/metrics.hpp"
#include "oracles.hpp"

using namespace lensless;

namespace {

// 3x3 mean filter with wrap-around, independent of the metric's own filter.
RealGrid box3(const RealGrid& x) {
  const std::size_t n = x.rows();
  RealGrid out = RealGrid::square(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      double s = 0.0;
      for (std::size_t dr = 0; dr < 3; ++dr) {
        for (std::size_t dc = 0; dc < 3; ++dc) s += x((r + n + dr - 1) % n, (c + n + dc - 1) % n);
      }
      out(r, c) = s / 9.0;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("blurriness conventions") {
  CHECK(blurriness(RealGrid::square(12, 0.3)) == 1.0);
  CHECK_THROWS_AS(blurriness(RealGrid::square(9)), DimensionError);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 10; ++t) {
    const RealGrid x = oracle::random_grid(16, 16, rng);
    const double b = blurriness(x);
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
    RealGrid affine = x;
    for (double& v : affine.span()) v = 0.1 + 0.6 * v;
    CHECK(std::abs(blurriness(affine) - b) < 1e-9);
  }
}

TEST_CASE("blurriness grows under box blur") {
  std::mt19937_64 rng(2);
  std::size_t monotone = 0;
  for (int t = 0; t < 20; ++t) {
    RealGrid x = oracle::random_grid(24, 24, rng);
    double prev = blurriness(x);
    bool ok = true;
    for (int k = 0; k < 5; ++k) {
      x = box3(x);
      const double next = blurriness(x);
      ok = ok && next > prev;
      prev = next;
    }
    monotone += ok ? 1 : 0;
  }
  CHECK(monotone >= 19);
}

TEST_CASE("full-open measurements are blurrier than pinhole measurements") {
  const Dataset ds = gen_synthetic(4, 5, 24, 3);
  const auto images = ds.images();
  const BlurReport open = blur_report(make_full_open(8), images, {});
  const BlurReport pin = blur_report(make_pinhole(8), images, {});
  CHECK(open.mean > pin.mean);
  CHECK(open.scores.size() == images.size());
  CHECK(open.mask_id == make_full_open(8).id());
}

TEST_CASE("delta grid") {
  const auto g = uniform_delta_grid();
  CHECK(g.size() == 101);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(g[50] == 0.5);
  CHECK_THROWS_AS(uniform_delta_grid(1), ConfigError);
}

TEST_CASE("RIP curve from known ratios") {
  const auto grid = uniform_delta_grid();
  const std::vector<double> ones(7, 1.0), zeros(3, 0.0), halves(5, 0.5);
  CHECK(rip_curve_from_ratios(ones, grid).auc == 1.0);
  // A ratio of 0 only passes at delta = 1: a single trapezoid of height 1.
  CHECK(rip_curve_from_ratios(zeros, grid).auc == doctest::Approx(0.005).epsilon(1e-12));
  // The step lands at delta = 0.5; trapezoids put half a grid cell on either side.
  const RipCurve half = rip_curve_from_ratios(halves, grid);
  CHECK(half.satisfaction[49] == 0.0);
  CHECK(half.satisfaction[50] == 1.0);
  CHECK(half.auc == doctest::Approx(0.505).epsilon(1e-12));
  CHECK(std::abs(half.auc - 0.5) <= 0.01);
}

TEST_CASE("auc of fixed satisfaction curves") {
  RipCurve c;
  c.delta_grid = uniform_delta_grid();
  c.satisfaction.assign(101, 1.0);
  CHECK(auc_rip(c) == 1.0);
  c.satisfaction.assign(101, 0.0);
  CHECK(auc_rip(c) == 0.0);
  for (std::size_t i = 0; i < 101; ++i) c.satisfaction[i] = c.delta_grid[i];
  CHECK(auc_rip(c) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(c.auc == auc_rip(c));
  RipCurve partial;
  partial.delta_grid = {0.0, 0.5};
  partial.satisfaction = {0.0, 1.0};
  CHECK_THROWS_AS(auc_rip(partial), ConfigError);
}

TEST_CASE("RIP curves of the benchmark masks") {
  const Dataset ds = gen_synthetic(3, 5, 24, 4);
  const auto images = ds.images();
  const auto grid = uniform_delta_grid();
  const RipCurve pin = rip_curve(make_pinhole(8), images, grid, {});
  CHECK(std::abs(pin.auc - 1.0) <= 1e-9);
  const RipCurve open = rip_curve(make_full_open(8), images, grid, {});
  CHECK(open.auc < pin.auc);
  std::vector<CodedMask> masks{make_pinhole(8), make_full_open(8), make_random(8, 0.5, 1),
                               make_random(8, 0.2, 2)};
  std::vector<RipCurve> curves;
  for (const CodedMask& h : masks) {
    curves.push_back(rip_curve(h, images, grid, {}));
    const auto& s = curves.back().satisfaction;
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(curves.back().auc >= 0.0);
    CHECK(curves.back().auc <= 1.0);
  }
  // Pointwise max of two curves has at least the larger area.
  RipCurve mx = curves[2];
  for (std::size_t i = 0; i < mx.satisfaction.size(); ++i) {
    mx.satisfaction[i] = std::max(curves[2].satisfaction[i], curves[3].satisfaction[i]);
  }
  CHECK(auc_rip(mx) >= std::max(curves[2].auc, curves[3].auc));
  CHECK_THROWS_AS(rip_curve(make_pinhole(8), std::vector<Image>{}, grid, {}), DimensionError);
  const std::vector<double> unsorted{0.0, 0.6, 0.4, 1.0};
  CHECK_THROWS_AS(rip_curve(make_pinhole(8), images, unsorted, {}), ConfigError);
}
