#pragma once

// Test-only reference implementations. They deliberately avoid the library's
// FFT path and SIMD kernels.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "lensless/grid.hpp"
#include "lensless/imaging.hpp"

namespace oracle {

using lensless::RealGrid;

// y[p] = sum_{a,b} k[a,b] x[(p - (a,b)) mod n], by direct summation.
inline RealGrid naive_convolve(const RealGrid& x, const RealGrid& k) {
  const std::size_t n = x.rows();
  RealGrid y = RealGrid::square(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      double s = 0.0;
      for (std::size_t a = 0; a < k.rows(); ++a) {
        for (std::size_t b = 0; b < k.cols(); ++b) {
          s += k(a, b) * x((r + n - a % n) % n, (c + n - b % n) % n);
        }
      }
      y(r, c) = s;
    }
  }
  return y;
}

inline RealGrid naive_correlate(const RealGrid& x, const RealGrid& g, std::size_t m) {
  const std::size_t n = x.rows();
  RealGrid out = RealGrid::square(m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) s += g(r, c) * x((r + n - a) % n, (c + n - b) % n);
      }
      out(a, b) = s;
    }
  }
  return out;
}

inline double sum_sq(const RealGrid& g) {
  double s = 0.0;
  for (double v : g.span()) s += v * v;
  return s;
}

inline double max_abs(const RealGrid& g) {
  double s = 0.0;
  for (double v : g.span()) s = std::max(s, std::abs(v));
  return s;
}

// ||a - b||_inf / ||b||_inf (absolute when b is zero).
inline double rel_error(const RealGrid& a, const RealGrid& b) {
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
  const double scale = max_abs(b);
  return scale > 0.0 ? diff / scale : diff;
}

inline RealGrid random_grid(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                            double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  RealGrid g(rows, cols);
  for (double& v : g.span()) v = d(rng);
  return g;
}

inline lensless::Image random_image(std::size_t n, std::mt19937_64& rng) {
  return lensless::Image(random_grid(n, n, rng));
}

// Fourth-order central differences of f at x, one coordinate at a time.
inline RealGrid central_difference(const std::function<double(const RealGrid&)>& f, RealGrid x,
                                   double step = 1e-4) {
  RealGrid grad(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    auto f_at = [&](double offset) {
      x[i] = saved + offset;
      return f(x);
    };
    const double d1 = f_at(step) - f_at(-step);
    const double d2 = f_at(2.0 * step) - f_at(-2.0 * step);
    x[i] = saved;
    grad[i] = (8.0 * d1 - d2) / (12.0 * step);
  }
  return grad;
}

}  // namespace oracle
