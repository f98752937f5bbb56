#include "aniso/numeric.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

#include "aniso/error.hpp"

namespace aniso {

double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double bisect_left_inverse(const std::function<double(double)>& f, double y, double lo, double hi,
                           int max_iter) {
  if (f(lo) >= y) return lo;
  for (int i = 0; i < max_iter; ++i) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) >= y) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double grow_bracket(const std::function<double(double)>& f, double y, double start, double factor,
                    double limit) {
  double hi = start;
  while (f(hi) < y) {
    hi *= factor;
    if (!(hi < limit)) return kInf;
  }
  return hi;
}

PowerFit loglog_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw DomainError("loglog_fit: need at least two points");
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += std::log(xs[i]);
    sy += std::log(ys[i]);
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = std::log(xs[i]) - mx, dy = std::log(ys[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  PowerFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double ss_res = std::max(0.0, syy - fit.slope * sxy);
  // A flat response has no variance to explain; treat an exact fit as perfect.
  fit.r2 = syy > 1e-24 * m ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

std::vector<double> geomspace(double a, double b, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  const double la = std::log(a), lb = std::log(b);
  for (int i = 0; i < count; ++i) {
    const double w = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out[static_cast<std::size_t>(i)] = std::exp(la + w * (lb - la));
  }
  if (count > 0) {
    out.front() = a;
    out.back() = b;
  }
  return out;
}

PowerFit loglog_slope(const std::function<double(double)>& f, double a, double b, int points) {
  const auto xs = geomspace(a, b, points);
  std::vector<double> ys(xs.size());
  std::transform(xs.begin(), xs.end(), ys.begin(), f);
  return loglog_fit(xs, ys);
}

std::vector<std::size_t> lower_convex_hull(std::span<const double> xs, std::span<const double> ys) {
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2], b = hull.back();
      // Drop b when it lies on or above the chord a -> i.
      const double cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
      if (cross <= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(i);
  }
  return hull;
}

double power_segment_integral(double x0, double x1, double log_y0, double m) {
  if (x1 <= x0) return 0.0;
  const double len = std::log(x1 / x0);
  const double z = (m + 1.0) * len;
  // x0 * y0 * (exp(z) - 1) / (m + 1), written to stay accurate as m -> -1.
  const double factor = std::abs(z) < 1e-12 ? len : len * std::expm1(z) / z;
  return std::exp(log_y0 + std::log(x0)) * factor;
}

LogLogTable::LogLogTable(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw DomainError("LogLogTable: need at least two knots");
  lx_.resize(xs.size());
  ly_.resize(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw DomainError("LogLogTable: knots must be positive");
    lx_[i] = std::log(xs[i]);
    ly_[i] = std::log(ys[i]);
    if (i > 0 && !(lx_[i] > lx_[i - 1])) throw DomainError("LogLogTable: abscissae must increase");
  }
}

LogLogTable LogLogTable::from_logs(std::vector<double> log_xs, std::vector<double> log_ys) {
  if (log_xs.size() != log_ys.size() || log_xs.size() < 2) throw DomainError("LogLogTable: need at least two knots");
  for (std::size_t i = 1; i < log_xs.size(); ++i)
    if (!(log_xs[i] > log_xs[i - 1])) throw DomainError("LogLogTable: abscissae must increase");
  LogLogTable t;
  t.lx_ = std::move(log_xs);
  t.ly_ = std::move(log_ys);
  return t;
}

double LogLogTable::segment_exponent(std::size_t k) const {
  return (ly_[k + 1] - ly_[k]) / (lx_[k + 1] - lx_[k]);
}

std::size_t LogLogTable::segment_of(double lx) const {
  auto it = std::upper_bound(lx_.begin(), lx_.end(), lx);
  std::size_t k = static_cast<std::size_t>(std::distance(lx_.begin(), it));
  if (k == 0) return 0;
  return std::min(k - 1, lx_.size() - 2);
}

double LogLogTable::log_value(double x) const {
  const double lx = std::log(x);
  const std::size_t k = segment_of(lx);
  return ly_[k] + segment_exponent(k) * (lx - lx_[k]);
}

double LogLogTable::value(double x) const {
  if (x <= 0.0) return 0.0;
  return std::exp(log_value(x));
}

double LogLogTable::derivative(double x) const {
  if (x <= 0.0) return 0.0;
  const double lx = std::log(x);
  const std::size_t k = segment_of(lx);
  const double m = segment_exponent(k);
  return m * std::exp(ly_[k] + m * (lx - lx_[k]) - lx);
}

double LogLogTable::inverse(double y) const {
  if (y <= 0.0) return 0.0;
  const double ly = std::log(y);
  auto it = std::lower_bound(ly_.begin(), ly_.end(), ly);
  std::size_t k = static_cast<std::size_t>(std::distance(ly_.begin(), it));
  k = k == 0 ? 0 : std::min(k - 1, ly_.size() - 2);
  const double m = segment_exponent(k);
  if (m <= 0.0) return std::exp(lx_[k + 1]);
  return std::exp(lx_[k] + (ly - ly_[k]) / m);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  do {
    u = uniform();
  } while (u <= 0.0);
  const double v = uniform();
  const double rad = std::sqrt(-2.0 * std::log(u));
  spare_ = rad * std::sin(2.0 * std::numbers::pi * v);
  has_spare_ = true;
  return rad * std::cos(2.0 * std::numbers::pi * v);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {
double norm2(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}
}  // namespace

std::vector<std::vector<double>> sphere_directions(int n, int count, std::uint64_t seed) {
  std::vector<std::vector<double>> dirs;
  const auto un = static_cast<std::size_t>(n);
  for (int i = 0; i < n; ++i) {
    for (double s : {1.0, -1.0}) {
      std::vector<double> w(un, 0.0);
      w[static_cast<std::size_t>(i)] = s;
      dirs.push_back(w);
    }
  }
  if (n == 1) return dirs;
  if (n == 2) {
    for (int k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * (k + 0.5) / count;
      dirs.push_back({std::cos(a), std::sin(a)});
    }
  } else if (n == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / count;
      const double rr = std::sqrt(1.0 - z * z);
      dirs.push_back({rr * std::cos(golden * k), rr * std::sin(golden * k), z});
    }
  } else {
    Rng rng(seed);
    for (int k = 0; k < count; ++k) {
      std::vector<double> w(un);
      for (double& v : w) v = rng.normal();
      const double nw = norm2(w);
      for (double& v : w) v /= nw;
      dirs.push_back(std::move(w));
    }
  }
  return dirs;
}

}  // namespace aniso
