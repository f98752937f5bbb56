#include "aniso/sobolev.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <optional>

#include "aniso/error.hpp"

namespace aniso {

const char* to_string(VolumeMethod m) {
  switch (m) {
    case VolumeMethod::Auto: return "auto";
    case VolumeMethod::Exact: return "exact";
    case VolumeMethod::Quadrature: return "quadrature";
    case VolumeMethod::MonteCarlo: return "monte-carlo";
  }
  return "?";
}

const char* to_string(TailClass c) { return c == TailClass::InfiniteTail ? "infinite-tail" : "finite-tail"; }

namespace {

constexpr double kValueCap = 1e290;

/// Phi written as sum_k A_k(|eta_k|) with eta = M xi; log|det M| converts volumes.
struct SeparableView {
  std::vector<YoungFunction1D> funcs;
  double log_det = 0.0;
};

std::optional<SeparableView> separable_view(const NFunction& phi) {
  if (const auto* sep = std::get_if<SeparableSum>(&phi.structure())) return SeparableView{sep->terms, 0.0};
  if (const auto* comp = std::get_if<LinearComposite>(&phi.structure())) {
    const int n = phi.dim();
    if (static_cast<int>(comp->rows.size()) != n) return std::nullopt;
    Eigen::MatrixXd m(n, n);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) m(k, i) = comp->rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
    return SeparableView{comp->funcs, std::log(std::abs(m.determinant()))};
  }
  return std::nullopt;
}

VolumeMethod resolve(const NFunction& phi, VolumeMethod requested) {
  if (requested != VolumeMethod::Auto) return requested;
  if (std::holds_alternative<Radial>(phi.structure())) return VolumeMethod::Exact;
  if (separable_view(phi)) return VolumeMethod::Quadrature;
  return VolumeMethod::MonteCarlo;
}

/// Fraction of the box prod_j [-R_j, R_j] (j >= k) covered by sum_{j>=k} A_j(eta_j) <= tau.
double separable_fraction(const std::vector<YoungFunction1D>& f, const std::vector<double>& R, std::size_t k,
                          double tau, double& err) {
  if (tau <= 0.0) return 0.0;
  const double x = f[k].inverse(tau);
  if (k + 1 == f.size()) return std::min(1.0, x / R[k]);
  if (x <= 0.0) return 0.0;
  boost::math::quadrature::tanh_sinh<double> ts(12);
  double inner_err = 0.0;
  auto integrand = [&](double eta) {
    const double rest = tau - f[k](x * eta);
    double e = 0.0;
    const double v = separable_fraction(f, R, k + 1, std::max(0.0, rest), e);
    inner_err = std::max(inner_err, e);
    return v;
  };
  double q_err = 0.0;
  const double tol = k == 0 ? 1e-10 : 1e-11;
  const double q = ts.integrate(integrand, 0.0, 1.0, tol, &q_err);
  err = q_err + inner_err;
  return x / R[k] * q;
}

LevelVolume quadrature_volume(const NFunction& phi, double t) {
  const auto view = separable_view(phi);
  if (!view) throw PreconditionError("level_volume: quadrature needs a separable structure");
  const auto& f = view->funcs;
  std::vector<double> R(f.size());
  double log_box = -view->log_det;
  for (std::size_t j = 0; j < f.size(); ++j) {
    R[j] = f[j].inverse(t);
    if (!(R[j] > 0.0) || !std::isfinite(R[j])) throw InvariantError("level_volume: degenerate axis extent");
    log_box += std::log(2.0 * R[j]);
  }
  double err = 0.0;
  const double frac = separable_fraction(f, R, 0, t, err);
  LevelVolume out;
  out.method = VolumeMethod::Quadrature;
  out.log_volume = log_box + std::log(frac);
  out.volume = std::exp(out.log_volume);
  out.stderr_estimate = out.volume * err / std::max(frac, 1e-300);
  return out;
}

/// Radial extent inf{r > 0 : Phi(r w) >= t}; +inf when the ray never reaches t.
double ray_extent(const NFunction& phi, std::span<const double> w, double t) {
  std::vector<double> x(w.size());
  auto along = [&](double r) {
    for (std::size_t i = 0; i < w.size(); ++i) x[i] = r * w[i];
    return phi(x);
  };
  // Bracket in log r, then bisect in log r for scale-free accuracy.
  double lo = 1.0, hi = 1.0;
  if (along(1.0) >= t) {
    while (along(lo) >= t) {
      lo *= 0.5;
      if (lo < 1e-300) return 0.0;
    }
    hi = 2.0 * lo;
  } else {
    while (along(hi) < t) {
      hi *= 2.0;
      if (hi > 1e300) return kInf;
    }
    lo = 0.5 * hi;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (!(mid > lo && mid < hi)) break;
    (along(mid) >= t ? hi : lo) = mid;
  }
  return hi;
}

LevelVolume monte_carlo_volume(const NFunction& phi, double t, int budget, std::uint64_t seed) {
  const int n = phi.dim();
  const auto un = static_cast<std::size_t>(n);
  const auto dirs = sphere_directions(n, 128 * n, seed);
  std::vector<double> half(un, 0.0);
  for (const auto& w : dirs) {
    const double r = ray_extent(phi, w, t);
    if (!std::isfinite(r)) throw InvariantError("level_volume: unbounded level set (ray never leaves it)");
    for (std::size_t i = 0; i < un; ++i) half[i] = std::max(half[i], r * std::abs(w[i]));
  }
  const std::vector<double> initial = half;
  for (double& h : half) h *= 1.1;

  // Face probe: every sampled face point must lie outside the level set.
  Rng probe(derive_seed(seed, 1));
  std::vector<double> x(un);
  for (int round = 0;; ++round) {
    bool grew = false;
    for (std::size_t axis = 0; axis < un; ++axis) {
      for (int s = 0; s < 64 * n; ++s) {
        for (std::size_t i = 0; i < un; ++i) x[i] = probe.uniform(-half[i], half[i]);
        x[axis] = (s % 2 ? -1.0 : 1.0) * half[axis];
        if (phi(x) <= t) {
          half[axis] *= 1.5;
          grew = true;
          break;
        }
      }
    }
    for (std::size_t i = 0; i < un; ++i)
      if (half[i] > 10.0 * initial[i]) throw InvariantError("level_volume: box probe at 10 R still inside the level set");
    if (!grew || round > 32) break;
  }

  // Stratified sampling on a k^n grid of sub-boxes.
  int k = 1;
  while (std::pow(k + 1, n) * 16 <= budget) ++k;
  const int strata = static_cast<int>(std::pow(k, n));
  const int per = std::max(2, budget / strata);
  Rng rng(seed);
  std::vector<int> idx(un);
  double frac = 0.0, var = 0.0;
  for (int s = 0; s < strata; ++s) {
    int rem = s;
    for (std::size_t i = 0; i < un; ++i) {
      idx[i] = rem % k;
      rem /= k;
    }
    int inside = 0;
    for (int m = 0; m < per; ++m) {
      for (std::size_t i = 0; i < un; ++i) {
        const double u = (idx[i] + rng.uniform()) / k;
        x[i] = half[i] * (2.0 * u - 1.0);
      }
      if (phi(x) <= t) ++inside;
    }
    const double p = static_cast<double>(inside) / per;
    frac += p;
    var += p * (1.0 - p) / (per - 1);
  }
  frac /= strata;
  const double se_frac = std::sqrt(var) / strata;
  double log_box = 0.0;
  for (double h : half) log_box += std::log(2.0 * h);
  LevelVolume out;
  out.method = VolumeMethod::MonteCarlo;
  out.log_volume = log_box + std::log(frac);
  out.volume = std::exp(out.log_volume);
  out.stderr_estimate = std::exp(log_box) * se_frac;
  return out;
}

/// Least-squares slope of ly against lx, with R^2.
PowerFit log_fit(const std::vector<double>& lx, const std::vector<double>& ly) {
  const double m = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  PowerFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 1e-24 * m ? 1.0 - std::max(0.0, syy - fit.slope * sxy) / syy : 1.0;
  return fit;
}

double log_integrand(const SymmetralProfile& p, double s) {
  return (std::log(s) - p.log_value(s)) / (p.dim() - 1);
}

/// Fit of the integrand exponent on [a, b]; local slopes returned alongside.
PowerFit integrand_fit(const SymmetralProfile& p, double a, double b, std::vector<double>& local) {
  const auto xs = geomspace(a, b, 41);
  std::vector<double> lx(xs.size()), ly(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    lx[i] = std::log(xs[i]);
    ly[i] = log_integrand(p, xs[i]);
  }
  local.clear();
  for (std::size_t i = 1; i < xs.size(); ++i) local.push_back((ly[i] - ly[i - 1]) / (lx[i] - lx[i - 1]));
  return log_fit(lx, ly);
}

}  // namespace

LevelVolume level_volume(const NFunction& phi, double t, int budget, std::uint64_t seed, VolumeMethod method) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("level_volume: t must be positive and finite");
  const int n = phi.dim();
  switch (resolve(phi, method)) {
    case VolumeMethod::Exact: {
      const auto* rad = std::get_if<Radial>(&phi.structure());
      if (!rad) throw PreconditionError("level_volume: exact volumes need a radial structure");
      const double rho = rad->profile.inverse(t);
      LevelVolume out;
      out.method = VolumeMethod::Exact;
      out.log_volume = std::log(unit_ball_volume(n)) + n * std::log(rho);
      out.volume = std::exp(out.log_volume);
      return out;
    }
    case VolumeMethod::Quadrature: return quadrature_volume(phi, t);
    case VolumeMethod::MonteCarlo:
    case VolumeMethod::Auto: break;
  }
  if (budget < 16) throw DomainError("level_volume: MC budget too small");
  return monte_carlo_volume(phi, t, budget, seed);
}

YoungFunction1D SymmetralProfile::young() const {
  std::vector<double> xs(table_.size()), ys(table_.size());
  for (std::size_t k = 0; k < table_.size(); ++k) {
    xs[k] = table_.x(k);
    ys[k] = table_.y(k);
  }
  return YoungFunction1D::from_values(std::move(xs), std::move(ys), ValueInterp::LogLog);
}

SymmetralProfile symmetral(const NFunction& phi, int knots, const SymmetralOptions& opt) {
  const int n = phi.dim();
  if (n < 2) throw PreconditionError("symmetral: dimension must be at least 2");
  if (knots < 64) throw PreconditionError("symmetral: need at least 64 knots");
  if (!(opt.s_min > 0.0) || !(opt.s_max > 10.0 * opt.s_min)) throw DomainError("symmetral: bad radius range");

  const VolumeMethod method = resolve(phi, opt.method);
  const double log_omega = std::log(unit_ball_volume(n));
  auto volume_at = [&](double lt) { return level_volume(phi, std::exp(lt), opt.mc_samples, opt.seed, method); };
  auto log_rho = [&](double lt) { return (volume_at(lt).log_volume - log_omega) / n; };

  // t-range whose equal-volume radii cover [s_min, s_max].
  const auto dirs = sphere_directions(n, 64 * n, opt.seed);
  double t_lo = kInf, t_hi = 0.0;
  std::vector<double> x(static_cast<std::size_t>(n));
  for (const auto& w : dirs) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = opt.s_min * w[i];
    t_lo = std::min(t_lo, phi(x));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = opt.s_max * w[i];
    const double v = phi(x);
    t_hi = std::max(t_hi, std::isfinite(v) ? std::min(v, kValueCap) : kValueCap);
  }
  const double ls_min = std::log(opt.s_min), ls_max = std::log(opt.s_max), lcap = std::log(kValueCap);
  const double ln10 = std::log(10.0);
  double lt_lo = std::log(std::max(t_lo, 1e-300)), lt_hi = std::log(t_hi);
  for (int i = 0; i < 100 && log_rho(lt_lo) > ls_min; ++i) lt_lo -= ln10;
  for (int i = 0; i < 100 && lt_hi < lcap && log_rho(lt_hi) < ls_max; ++i) lt_hi = std::min(lt_hi + ln10, lcap);
  // Tighten both ends by bisection in log t.
  if (log_rho(lt_hi) >= ls_max) {
    double a = lt_lo, b = lt_hi;
    for (int i = 0; i < 40 && b - a > 1e-3; ++i) {
      const double mid = 0.5 * (a + b);
      (log_rho(mid) >= ls_max ? b : a) = mid;
    }
    lt_hi = b;
  }
  {
    double a = lt_lo, b = lt_hi;
    for (int i = 0; i < 40 && b - a > 1e-3; ++i) {
      const double mid = 0.5 * (a + b);
      (log_rho(mid) <= ls_min ? a : b) = mid;
    }
    lt_lo = a;
  }
  lt_lo -= std::log(2.0);
  lt_hi = std::min(lt_hi + std::log(2.0), lcap);

  const int count = std::max(knots, static_cast<int>(std::ceil(opt.per_decade * (lt_hi - lt_lo) / ln10)) + 1);
  SymmetralProfile out;
  out.dim_ = n;
  out.method_ = method;
  out.seed_ = opt.seed;
  out.s_min_ = opt.s_min;
  out.s_max_ = opt.s_max;
  for (int k = 0; k < count; ++k) {
    const double lt = lt_lo + (lt_hi - lt_lo) * k / (count - 1);
    const auto lv = volume_at(lt);
    out.level_t_.push_back(std::exp(lt));
    out.log_volume_.push_back(lv.log_volume);
    out.volume_err_.push_back(lv.stderr_estimate);
  }

  // Monotone repair, then the lower convex hull of (rho, t) pinned at the origin.
  std::vector<long double> xs{0.0L}, ys{0.0L};
  std::vector<double> lxs{0.0}, lys{0.0};
  double running = -kInf;
  for (std::size_t k = 0; k < out.level_t_.size(); ++k) {
    running = std::max(running, out.log_volume_[k]);
    const double lr = (running - log_omega) / n;
    if (lxs.size() > 1 && !(lr > lxs.back())) continue;
    lxs.push_back(lr);
    lys.push_back(std::log(out.level_t_[k]));
    xs.push_back(std::exp(static_cast<long double>(lr)));
    ys.push_back(static_cast<long double>(out.level_t_[k]));
  }
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2], b = hull.back();
      const long double s_ab = (ys[b] - ys[a]) / (xs[b] - xs[a]);
      const long double s_bi = (ys[i] - ys[b]) / (xs[i] - xs[b]);
      if (s_ab >= s_bi) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(i);
  }
  std::vector<double> hx, hy;
  for (std::size_t h = 1; h < hull.size(); ++h) {
    hx.push_back(lxs[hull[h]]);
    hy.push_back(lys[hull[h]]);
  }
  if (hx.size() < 2) throw InvariantError("symmetral: level volumes do not grow");
  out.table_ = LogLogTable::from_logs(std::move(hx), std::move(hy));
  return out;
}

ExponentCheck check_zero_condition(const SymmetralProfile& p) {
  const double a = std::max(p.s_min(), p.table().x(0));
  std::vector<double> local;
  const auto fit = integrand_fit(p, a, 10.0 * a, local);
  constexpr double threshold = -1.0 + 0.05;
  ExponentCheck out{fit.slope > threshold, fit.slope, fit.r2};
  if (fit.r2 < 0.99) {
    const bool all_above = std::all_of(local.begin(), local.end(), [](double e) { return e > threshold; });
    const bool all_below = std::none_of(local.begin(), local.end(), [](double e) { return e > threshold; });
    if (!all_above && !all_below) throw InconclusiveError("zero condition: integrand exponent fit is ill-conditioned", fit.slope, fit.r2);
    out.holds = all_above;
  }
  return out;
}

TailClassification classify_tail(const SymmetralProfile& p) {
  const double b = std::min(p.s_max(), p.table().x(p.table().size() - 1));
  std::vector<double> local;
  const auto fit = integrand_fit(p, b / 10.0, b, local);
  constexpr double threshold = -1.0 - 1e-6;
  TailClassification out{fit.slope >= threshold ? TailClass::InfiniteTail : TailClass::FiniteTail, fit.slope, fit.r2};
  if (fit.r2 < 0.99) {
    const bool all_above = std::all_of(local.begin(), local.end(), [](double e) { return e >= threshold; });
    const bool all_below = std::none_of(local.begin(), local.end(), [](double e) { return e >= threshold; });
    if (!all_above && !all_below) throw InconclusiveError("tail: integrand exponent fit is ill-conditioned", fit.slope, fit.r2);
    out.tail = all_above ? TailClass::InfiniteTail : TailClass::FiniteTail;
  }
  return out;
}

SobolevConjugate sobolev_conjugate(const SymmetralProfile& p) {
  SobolevConjugate c;
  c.zero_ = check_zero_condition(p);
  if (!c.zero_.holds) throw PreconditionError("sobolev_conjugate: zero condition fails");
  c.tail_ = classify_tail(p);
  c.dim_ = p.dim();
  c.profile_ = p.table();
  const auto& t = c.profile_;
  const std::size_t m = t.size();
  for (std::size_t k = 0; k < m; ++k) {
    c.s_.push_back(t.x(k));
    c.log_f_.push_back((t.log_x(k) - t.log_y(k)) / (c.dim_ - 1));
  }
  for (std::size_t k = 0; k + 1 < m; ++k)
    c.exps_.push_back((c.log_f_[k + 1] - c.log_f_[k]) / (t.log_x(k + 1) - t.log_x(k)));

  c.left_exp_ = c.exps_.front() > -1.0 ? c.exps_.front() : c.zero_.exponent;
  c.right_exp_ = c.exps_.back();
  if (c.tail_.tail == TailClass::InfiniteTail) {
    c.right_exp_ = std::max(c.right_exp_, -1.0);
  } else if (c.right_exp_ >= -1.0) {
    c.right_exp_ = std::min(c.tail_.exponent, -1.0 - 1e-3);
  }

  c.cum_.push_back(c.s_[0] * std::exp(c.log_f_[0]) / (c.left_exp_ + 1.0));
  for (std::size_t k = 0; k + 1 < m; ++k)
    c.cum_.push_back(c.cum_[k] + power_segment_integral(c.s_[k], c.s_[k + 1], c.log_f_[k], c.exps_[k]));
  if (c.right_exp_ < -1.0) {
    c.cum_inf_ = c.cum_.back() + c.s_.back() * std::exp(c.log_f_.back()) / (-c.right_exp_ - 1.0);
    c.h_inf_ = std::pow(c.cum_inf_, (c.dim_ - 1.0) / c.dim_);
  }
  return c;
}

double SobolevConjugate::cumulative(double s) const {
  if (s <= 0.0) return 0.0;
  if (s < s_.front()) return cum_.front() * std::pow(s / s_.front(), left_exp_ + 1.0);
  if (s >= s_.back()) return cum_.back() + power_segment_integral(s_.back(), s, log_f_.back(), right_exp_);
  const auto it = std::upper_bound(s_.begin(), s_.end(), s);
  const auto k = static_cast<std::size_t>(std::distance(s_.begin(), it)) - 1;
  return cum_[k] + power_segment_integral(s_[k], s, log_f_[k], exps_[k]);
}

double SobolevConjugate::H(double s) const {
  if (std::isinf(s)) return h_inf_;
  return std::pow(cumulative(s), (dim_ - 1.0) / dim_);
}

std::vector<double> SobolevConjugate::h_values() const {
  std::vector<double> out;
  for (double s : s_) out.push_back(H(s));
  return out;
}

double SobolevConjugate::H_inverse(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= h_inf_) return kInf;
  const double target = std::pow(t, dim_ / (dim_ - 1.0));
  if (target <= cum_.front()) return s_.front() * std::pow(target / cum_.front(), 1.0 / (left_exp_ + 1.0));
  auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
  const auto k = static_cast<std::size_t>(std::distance(cum_.begin(), it)) - 1;
  const double e = k + 1 < s_.size() ? exps_[k] : right_exp_;
  // Solve cum_k + s_k f_k expm1((e+1)L)/(e+1) = target for L = log(s/s_k).
  const double d = (target - cum_[k]) / (s_[k] * std::exp(log_f_[k]));
  double L = 0.0;
  if (std::abs(e + 1.0) < 1e-12) {
    L = d;
  } else {
    const double z = d * (e + 1.0);
    if (z <= -1.0) return kInf;
    L = std::log1p(z) / (e + 1.0);
  }
  double s = s_[k] * std::exp(L);
  if (k + 1 < s_.size()) s = std::min(s, s_[k + 1]);
  return s;
}

double SobolevConjugate::operator()(double t) const {
  if (t <= 0.0) return 0.0;
  const double s = H_inverse(t);
  if (!std::isfinite(s)) return kInf;
  return profile_.value(s);
}

YoungFunction1D SobolevConjugate::young() const {
  std::vector<double> hs = h_values(), vs;
  for (std::size_t k = 0; k < s_.size(); ++k) vs.push_back(profile_.y(k));
  return YoungFunction1D::from_values(std::move(hs), std::move(vs), ValueInterp::LogLog);
}

PowerFit sobolev_slope(const SobolevConjugate& conj, double a, double b) {
  return loglog_slope([&](double t) { return conj(t); }, a, b);
}

}  // namespace aniso
