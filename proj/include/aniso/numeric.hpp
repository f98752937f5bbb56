#pragma once

// Small numerical building blocks shared by the function-calculus modules:
// monotone root bracketing, log-log power tables, convex hulls, fits, and a
// portable seeded generator.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace aniso {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);

/// inf{x in [lo, hi] : f(x) >= y} for nondecreasing f, by bisection until the
/// bracket collapses to adjacent doubles (or max_iter halvings).
/// Requires f(hi) >= y; if f(lo) >= y returns lo.
double bisect_left_inverse(const std::function<double(double)>& f, double y, double lo, double hi,
                           int max_iter = 400);

/// Finds hi >= start with f(hi) >= y by repeated multiplication by `factor`.
/// Returns +inf if no such point below `limit`.
double grow_bracket(const std::function<double(double)>& f, double y, double start, double factor = 2.0,
                    double limit = 1e300);

/// Least-squares line through (log x, log y).
struct PowerFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
};
PowerFit loglog_fit(std::span<const double> xs, std::span<const double> ys);

/// Fitted log-log slope of f over `points` geometrically spaced samples in [a, b].
PowerFit loglog_slope(const std::function<double(double)>& f, double a, double b, int points = 41);

/// Geometric grid of `count` points in [a, b] (both included).
std::vector<double> geomspace(double a, double b, int count);

/// Indices of the vertices of the lower convex hull of (xs, ys), xs strictly increasing.
std::vector<std::size_t> lower_convex_hull(std::span<const double> xs, std::span<const double> ys);

/// Integral over [x0, x1] of exp(log_y0) * (x / x0)^m, with 0 < x0 <= x1.
double power_segment_integral(double x0, double x1, double log_y0, double m);

/// Piecewise power function through positive knots (x_k, y_k): linear in
/// (log x, log y), extended beyond both ends with the end-segment exponents.
class LogLogTable {
 public:
  LogLogTable() = default;
  LogLogTable(std::span<const double> xs, std::span<const double> ys);
  static LogLogTable from_logs(std::vector<double> log_xs, std::vector<double> log_ys);

  std::size_t size() const noexcept { return lx_.size(); }
  bool empty() const noexcept { return lx_.empty(); }
  double x(std::size_t k) const { return std::exp(lx_[k]); }
  double y(std::size_t k) const { return std::exp(ly_[k]); }
  double log_x(std::size_t k) const { return lx_[k]; }
  double log_y(std::size_t k) const { return ly_[k]; }
  const std::vector<double>& log_xs() const noexcept { return lx_; }
  const std::vector<double>& log_ys() const noexcept { return ly_; }

  /// Exponent of segment k (k = 0 .. size()-2); left/right tails reuse the end exponents.
  double segment_exponent(std::size_t k) const;
  double left_exponent() const { return segment_exponent(0); }
  double right_exponent() const { return segment_exponent(size() - 2); }

  /// log y at x > 0.
  double log_value(double x) const;
  /// y at x; 0 for x <= 0.
  double value(double x) const;
  /// Derivative dy/dx (right derivative at knots); 0 at x <= 0.
  double derivative(double x) const;
  /// Inverse for strictly increasing y: inf{x : value(x) >= y}.
  double inverse(double y) const;

 private:
  std::size_t segment_of(double lx) const;
  std::vector<double> lx_, ly_;
};

/// Deterministic generator whose uniform and normal draws do not depend on the
/// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double normal();
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Deterministic direction set on S^{n-1}: the signed coordinate axes, then
/// `count` evenly spread points (circle for n = 2, Fibonacci sphere for n = 3,
/// normalized Gaussians otherwise).
std::vector<std::vector<double>> sphere_directions(int n, int count, std::uint64_t seed);

/// Mixes a base seed with a stream index (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace aniso
