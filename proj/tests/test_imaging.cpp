#include <random>

#include "doctest.h"
#include "lensless/imaging.hpp"
#include "lensless/masks.hpp"
#include "oracles.hpp"

using namespace lensless;

namespace {

CodedMask single_open(std::size_t m, std::size_t r, std::size_t c) {
  Grid<std::uint8_t> cells(m, m);
  cells(r, c) = 1;
  return CodedMask(cells);
}

}  // namespace

TEST_CASE("image and mask invariants are enforced") {
  CHECK_THROWS_AS(Image(RealGrid(2, 3)), DimensionError);
  CHECK_THROWS_AS(Image(RealGrid::square(1)), DimensionError);
  CHECK_THROWS_AS(Image(RealGrid::square(3, 1.5)), InvariantError);
  CHECK_THROWS_AS(Image(RealGrid::square(3, -0.1)), InvariantError);
  CHECK_THROWS_AS(CodedMask::from_real(RealGrid::square(2, 0.5)), InvariantError);
  Grid<std::uint8_t> bad(2, 2);
  bad(0, 1) = 2;
  CHECK_THROWS_AS(CodedMask{bad}, InvariantError);
  CHECK_THROWS_AS((CaptureConfig{true, -1.0}.validate()), ConfigError);
}

TEST_CASE("pinhole at the origin is the identity") {
  std::mt19937_64 rng(1);
  const Image x = oracle::random_image(12, rng);
  const Measurement y = capture(x, single_open(5, 0, 0), {});
  CHECK(y.pixels == x.pixels());
  CHECK(y.normalized);
  CHECK(y.mask_id == single_open(5, 0, 0).id());
}

TEST_CASE("full-open normalized capture preserves a constant scene") {
  const Image x = Image::constant(10, 0.37);
  const Measurement y = capture(x, make_full_open(4), {});
  for (double v : y.pixels.span()) CHECK(v == doctest::Approx(0.37).epsilon(1e-14));
}

TEST_CASE("impulse through a 2x2 open mask follows the origin convention") {
  RealGrid px = RealGrid::square(3);
  px(0, 0) = 1.0;
  const Measurement y = capture(Image(px), make_full_open(2), {false, 0.0});
  const double expected[3][3] = {{1, 1, 0}, {1, 1, 0}, {0, 0, 0}};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) CHECK(y.pixels(r, c) == doctest::Approx(expected[r][c]).epsilon(1e-14));
  }
}

TEST_CASE("capture matches the direct summation oracle") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Image x = oracle::random_image(16, rng);
    const RealGrid mask = oracle::random_grid(5, 5, rng);
    const RealGrid fast = capture_relaxed(x.pixels(), mask, {false, 0.0});
    CHECK(oracle::rel_error(fast, oracle::naive_convolve(x.pixels(), mask)) < 1e-10);
    const RealGrid norm = capture_relaxed(x.pixels(), mask, {true, 0.0});
    CHECK(oracle::rel_error(norm, oracle::naive_convolve(x.pixels(), build_kernel(mask, true))) <
          1e-10);
  }
}

TEST_CASE("odd sizes and full-size kernels work") {
  std::mt19937_64 rng(3);
  for (std::size_t n : {2, 3, 7, 9, 15}) {
    const RealGrid x = oracle::random_grid(n, n, rng);
    const RealGrid k = oracle::random_grid(n, n, rng);
    CHECK(oracle::rel_error(convolve(x, k), oracle::naive_convolve(x, k)) < 1e-10);
    const RealGrid g = oracle::random_grid(n, n, rng);
    CHECK(oracle::rel_error(correlate(x, g, n), oracle::naive_correlate(x, g, n)) < 1e-10);
  }
}

TEST_CASE("correlation is the adjoint of convolution in the kernel") {
  std::mt19937_64 rng(4);
  const RealGrid x = oracle::random_grid(16, 16, rng);
  const RealGrid k = oracle::random_grid(6, 6, rng);
  const RealGrid g = oracle::random_grid(16, 16, rng);
  const RealGrid y = convolve(x, k);
  const RealGrid c = correlate(x, g, 6);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) lhs += y[i] * g[i];
  for (std::size_t i = 0; i < c.size(); ++i) rhs += c[i] * k[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  CHECK(oracle::rel_error(c, oracle::naive_correlate(x, g, 6)) < 1e-10);
}

TEST_CASE("capture is linear") {
  std::mt19937_64 rng(5);
  const RealGrid a = oracle::random_grid(16, 16, rng);
  const RealGrid b = oracle::random_grid(16, 16, rng);
  const RealGrid mask = oracle::random_grid(4, 4, rng);
  RealGrid mix = RealGrid::square(16);
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 0.3 * a[i] - 1.7 * b[i];
  const RealGrid ya = convolve(a, mask), yb = convolve(b, mask), ym = convolve(mix, mask);
  RealGrid expected = RealGrid::square(16);
  for (std::size_t i = 0; i < mix.size(); ++i) expected[i] = 0.3 * ya[i] - 1.7 * yb[i];
  CHECK(oracle::rel_error(ym, expected) < 1e-12);
}

TEST_CASE("pinhole capture conserves energy exactly") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const Image x = oracle::random_image(16, rng);
    const Measurement y = capture(x, make_pinhole(8), {});
    CHECK(std::abs(oracle::sum_sq(y.pixels) - oracle::sum_sq(x.pixels())) <
          1e-12 * oracle::sum_sq(x.pixels()));
  }
}

TEST_CASE("energy ratio examples") {
  std::mt19937_64 rng(7);
  const Image x = oracle::random_image(12, rng);
  // Exact shift; only the epsilon in the denominator keeps it below 1.
  const double ss = oracle::sum_sq(x.pixels());
  CHECK(energy_ratio(x, make_pinhole(4), {}) == doctest::Approx(ss / (ss + kDefaultEpsilon)).epsilon(1e-14));
  CHECK(energy_ratio(Image::constant(6, 0.0), make_full_open(3), {}) == 0.0);
  RealGrid px = RealGrid::square(2);
  px(0, 0) = 1.0;
  CHECK(energy_ratio(Image(px), make_full_open(2), {}) == doctest::Approx(0.25).epsilon(1e-9));
  // Normalized operators never amplify energy.
  for (int trial = 0; trial < 10; ++trial) {
    const Image s = oracle::random_image(16, rng);
    const RealGrid mask = oracle::random_grid(8, 8, rng);
    CHECK(energy_ratio(s.pixels(), mask, {}) <= 1.0 + 1e-9);
  }
}

TEST_CASE("mask larger than the image is rejected") {
  CHECK_THROWS_AS(capture(Image::constant(4, 0.5), make_full_open(5), {}), DimensionError);
}

TEST_CASE("noise is seeded and optional") {
  const Image x = Image::constant(8, 0.5);
  const CaptureConfig noisy{true, 0.1};
  const Measurement a = capture(x, make_full_open(2), noisy, 11);
  const Measurement b = capture(x, make_full_open(2), noisy, 11);
  const Measurement c = capture(x, make_full_open(2), noisy, 12);
  CHECK(a.pixels == b.pixels);
  CHECK(a.pixels != c.pixels);
  CHECK(capture(x, make_full_open(2), {}).pixels != a.pixels);
}

TEST_CASE("kernel normalization and its backward pass") {
  std::mt19937_64 rng(8);
  const RealGrid mask = oracle::random_grid(4, 4, rng);
  const RealGrid k = build_kernel(mask, true);
  double s = 0.0;
  for (double v : k.span()) s += v;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(build_kernel(RealGrid::square(3), true) == RealGrid::square(3));

  const RealGrid g = oracle::random_grid(4, 4, rng, -1.0, 1.0);
  auto f = [&](const RealGrid& h) {
    const RealGrid kk = build_kernel(h, true);
    double acc = 0.0;
    for (std::size_t i = 0; i < kk.size(); ++i) acc += kk[i] * g[i];
    return acc;
  };
  const RealGrid analytic = kernel_backward(mask, g, true);
  CHECK(oracle::rel_error(analytic, oracle::central_difference(f, mask)) < 1e-7);
  CHECK(kernel_backward(mask, g, false) == g);
}

TEST_CASE("mask ids are stable and content-based") {
  CHECK(make_pinhole(8).id() == make_pinhole(8).id());
  CHECK(make_pinhole(8).id() != make_full_open(8).id());
  CHECK(make_pinhole(8).id().rfind("m8-", 0) == 0);
}

TEST_CASE("single-tap kernels are exact scaled shifts") {
  std::mt19937_64 rng(41);
  const RealGrid x = oracle::random_grid(10, 10, rng);
  RealGrid k = RealGrid::square(4);
  k(3, 1) = 0.3;
  CHECK(oracle::rel_error(convolve(x, k), oracle::naive_convolve(x, k)) < 1e-15);
  CHECK(convolve(x, k)(3, 1) == 0.3 * x(0, 0));
  k(3, 1) = 1.0;
  CHECK(convolve(x, k)(2, 0) == x(9, 9));
}
