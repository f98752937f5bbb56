#include "aniso/young1d.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "aniso/error.hpp"
#include "aniso/numeric.hpp"

namespace aniso {
namespace detail {

class Young1DImpl {
 public:
  explicit Young1DImpl(Density1D params) : params_(std::move(params)) {}
  virtual ~Young1DImpl() = default;

  virtual double value(double t) const = 0;  // t >= 0
  virtual double density(double tau) const = 0;  // tau >= 0

  virtual double inverse(double y) const {
    if (y <= 0.0) return 0.0;
    auto f = [this](double t) { return value(t); };
    const double hi = grow_bracket(f, y, 1.0, 2.0);
    if (!std::isfinite(hi)) return kInf;
    double lo = hi > 1.0 ? hi / 2.0 : 0.0;
    if (hi <= 1.0) {
      // Shrink towards zero to keep the bracket tight for small targets.
      double probe = 1.0;
      while (probe > 1e-300 && value(probe * 0.5) >= y) probe *= 0.5;
      lo = probe * 0.5;
      return bisect_left_inverse(f, y, lo, probe);
    }
    return bisect_left_inverse(f, y, lo, hi);
  }

  virtual double density_inverse(double s) const {
    if (s <= 0.0) return 0.0;
    auto f = [this](double t) { return density(t); };
    double hi = grow_bracket(f, s, 1.0, 2.0);
    if (!std::isfinite(hi)) return kInf;
    double lo = 0.0;
    if (hi <= 1.0) {
      while (hi > 1e-300 && density(hi * 0.5) >= s) hi *= 0.5;
      lo = hi * 0.5;
    } else {
      lo = hi / 2.0;
    }
    return bisect_left_inverse(f, s, lo, hi);
  }

  virtual YoungFunction1D conjugate(const YoungFunction1D& self) const;
  virtual std::string describe() const = 0;

  const Density1D& params() const { return params_; }

  static YoungFunction1D wrap(std::shared_ptr<const Young1DImpl> impl) { return YoungFunction1D(std::move(impl)); }

 protected:
  Density1D params_;
};

namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

class PowerImpl final : public Young1DImpl {
 public:
  using Young1DImpl::Young1DImpl;
  double value(double t) const override { return params_.scale * std::pow(t, params_.p); }
  double density(double tau) const override {
    return params_.scale * params_.p * std::pow(tau, params_.p - 1.0);
  }
  double inverse(double y) const override {
    return y <= 0.0 ? 0.0 : std::pow(y / params_.scale, 1.0 / params_.p);
  }
  double density_inverse(double s) const override {
    return s <= 0.0 ? 0.0 : std::pow(s / (params_.scale * params_.p), 1.0 / (params_.p - 1.0));
  }
  YoungFunction1D conjugate(const YoungFunction1D&) const override {
    const double p = params_.p;
    const double q = p / (p - 1.0);
    const double scale = std::pow(params_.scale * p, -(q - 1.0)) / q;
    return YoungFunction1D::power(q, scale);
  }
  std::string describe() const override {
    return "power(p=" + fmt_num(params_.p) + ",scale=" + fmt_num(params_.scale) + ")";
  }
};

class PowerLogImpl final : public Young1DImpl {
 public:
  using Young1DImpl::Young1DImpl;
  double value(double t) const override {
    if (t == 0.0) return 0.0;
    return params_.scale * std::pow(t, params_.p) * std::pow(std::log(params_.c + t), params_.alpha);
  }
  double density(double tau) const override {
    if (tau == 0.0) return 0.0;
    const double L = std::log(params_.c + tau);
    const double p = params_.p, a = params_.alpha;
    return params_.scale * (p * std::pow(tau, p - 1.0) * std::pow(L, a) +
                            a * std::pow(tau, p) * std::pow(L, a - 1.0) / (params_.c + tau));
  }
  std::string describe() const override {
    return "powerlog(p=" + fmt_num(params_.p) + ",alpha=" + fmt_num(params_.alpha) + ",c=" + fmt_num(params_.c) +
           ",scale=" + fmt_num(params_.scale) + ")";
  }
};

class ExpPowerImpl final : public Young1DImpl {
 public:
  using Young1DImpl::Young1DImpl;
  double value(double t) const override { return params_.scale * std::expm1(std::pow(t, params_.alpha)); }
  double density(double tau) const override {
    if (tau == 0.0) return 0.0;
    const double a = params_.alpha;
    const double ta = std::pow(tau, a);
    return params_.scale * a * std::exp(std::log(tau) * (a - 1.0) + ta);
  }
  double inverse(double y) const override {
    return y <= 0.0 ? 0.0 : std::pow(std::log1p(y / params_.scale), 1.0 / params_.alpha);
  }
  std::string describe() const override {
    return "exppow(alpha=" + fmt_num(params_.alpha) + ",scale=" + fmt_num(params_.scale) + ")";
  }
};

class ExpLinearImpl final : public Young1DImpl {
 public:
  using Young1DImpl::Young1DImpl;
  double value(double t) const override {
    if (t < 1e-3) {
      // Series avoids the cancellation in expm1(t) - t.
      const double t2 = t * t;
      return params_.scale * t2 * (0.5 + t * (1.0 / 6.0 + t * (1.0 / 24.0 + t / 120.0)));
    }
    return params_.scale * (std::expm1(t) - t);
  }
  double density(double tau) const override { return params_.scale * std::expm1(tau); }
  double density_inverse(double s) const override { return s <= 0.0 ? 0.0 : std::log1p(s / params_.scale); }
  std::string describe() const override { return "explin(scale=" + fmt_num(params_.scale) + ")"; }
};

/// Piecewise-linear density with exact prefix integrals and a power-law tail.
class TabulatedImpl final : public Young1DImpl {
 public:
  explicit TabulatedImpl(Density1D params) : Young1DImpl(std::move(params)) {
    const auto& tau = params_.tau;
    const auto& b = params_.b;
    cum_.assign(tau.size(), 0.0);
    for (std::size_t k = 1; k < tau.size(); ++k) cum_[k] = cum_[k - 1] + 0.5 * (b[k] + b[k - 1]) * (tau[k] - tau[k - 1]);
    const std::size_t K = tau.size() - 1;
    tail_m_ = K >= 2 ? std::log(b[K] / b[K - 1]) / std::log(tau[K] / tau[K - 1]) : 1.0;
    strictly_increasing_ = true;
    for (std::size_t k = 1; k < b.size(); ++k)
      if (!(b[k] > b[k - 1])) strictly_increasing_ = false;
  }

  double density(double tau) const override {
    const auto& t = params_.tau;
    const auto& b = params_.b;
    const std::size_t K = t.size() - 1;
    if (tau >= t[K]) return b[K] * std::pow(tau / t[K], tail_m_);
    const std::size_t k = segment(tau);
    const double w = (tau - t[k]) / (t[k + 1] - t[k]);
    return b[k] + w * (b[k + 1] - b[k]);
  }

  double value(double x) const override {
    const auto& t = params_.tau;
    const auto& b = params_.b;
    const std::size_t K = t.size() - 1;
    if (x >= t[K]) return cum_[K] + power_segment_integral(t[K], x, std::log(b[K]), tail_m_);
    const std::size_t k = segment(x);
    const double d = x - t[k];
    const double slope = (b[k + 1] - b[k]) / (t[k + 1] - t[k]);
    return cum_[k] + b[k] * d + 0.5 * slope * d * d;
  }

  double inverse(double y) const override {
    if (y <= 0.0) return 0.0;
    const auto& t = params_.tau;
    const auto& b = params_.b;
    const std::size_t K = t.size() - 1;
    if (y >= cum_[K]) {
      const double m1 = tail_m_ + 1.0;
      return t[K] * std::pow(1.0 + (y - cum_[K]) * m1 / (b[K] * t[K]), 1.0 / m1);
    }
    auto it = std::lower_bound(cum_.begin(), cum_.end(), y);
    const std::size_t k = static_cast<std::size_t>(std::distance(cum_.begin(), it)) - 1;
    const double slope = (b[k + 1] - b[k]) / (t[k + 1] - t[k]);
    const double rem = y - cum_[k];
    // Root of b_k d + slope d^2 / 2 = rem in the cancellation-free form.
    const double d = 2.0 * rem / (b[k] + std::sqrt(b[k] * b[k] + 2.0 * slope * rem));
    return t[k] + d;
  }

  double density_inverse(double s) const override {
    if (s <= 0.0) return 0.0;
    const auto& t = params_.tau;
    const auto& b = params_.b;
    const std::size_t K = t.size() - 1;
    if (s > b[K]) return t[K] * std::pow(s / b[K], 1.0 / tail_m_);
    auto it = std::lower_bound(b.begin(), b.end(), s);
    const std::size_t k = static_cast<std::size_t>(std::distance(b.begin(), it));
    if (b[k] == s) return t[k];
    const double w = (s - b[k - 1]) / (b[k] - b[k - 1]);
    return t[k - 1] + w * (t[k] - t[k - 1]);
  }

  YoungFunction1D conjugate(const YoungFunction1D& self) const override {
    // A strictly increasing piecewise-linear density inverts to another one, tail included.
    if (!strictly_increasing_) return Young1DImpl::conjugate(self);
    return YoungFunction1D::tabulated(params_.b, params_.tau);
  }

  std::string describe() const override { return "table(" + std::to_string(params_.tau.size()) + " knots)"; }

 private:
  std::size_t segment(double tau) const {
    const auto& t = params_.tau;
    auto it = std::upper_bound(t.begin(), t.end(), tau);
    const std::size_t k = static_cast<std::size_t>(std::distance(t.begin(), it));
    return std::min(k == 0 ? 0 : k - 1, t.size() - 2);
  }
  std::vector<double> cum_;
  double tail_m_ = 1.0;
  bool strictly_increasing_ = true;
};

/// Profile given by values at knots. Tails are power laws continuing the end segments.
class ValuesImpl final : public Young1DImpl {
 public:
  ValuesImpl(std::vector<double> t, std::vector<double> v, ValueInterp interp)
      : Young1DImpl(Density1D{DensityKind::Derived, 0, 0, 0, 0, {}, {}}), t_(std::move(t)), v_(std::move(v)),
        table_(t_, v_), interp_(interp) {}

  double value(double x) const override {
    if (x <= 0.0) return 0.0;
    if (interp_ == ValueInterp::LogLog || x <= t_.front() || x >= t_.back()) return table_.value(x);
    const std::size_t k = segment(x);
    const double w = (x - t_[k]) / (t_[k + 1] - t_[k]);
    return v_[k] + w * (v_[k + 1] - v_[k]);
  }

  double density(double x) const override {
    if (x <= 0.0) return 0.0;
    if (interp_ == ValueInterp::LogLog || x < t_.front() || x >= t_.back()) return table_.derivative(x);
    const std::size_t k = segment(x);
    return (v_[k + 1] - v_[k]) / (t_[k + 1] - t_[k]);
  }

  double inverse(double y) const override {
    if (y <= 0.0) return 0.0;
    if (interp_ == ValueInterp::LogLog || y <= v_.front() || y >= v_.back()) return table_.inverse(y);
    auto it = std::lower_bound(v_.begin(), v_.end(), y);
    const std::size_t k = static_cast<std::size_t>(std::distance(v_.begin(), it));
    const double w = (y - v_[k - 1]) / (v_[k] - v_[k - 1]);
    return t_[k - 1] + w * (t_[k] - t_[k - 1]);
  }

  std::string describe() const override {
    return std::string("values(") + std::to_string(t_.size()) + " knots," +
           (interp_ == ValueInterp::LogLog ? "loglog" : "linear") + ")";
  }

 private:
  std::size_t segment(double x) const {
    auto it = std::upper_bound(t_.begin(), t_.end(), x);
    const std::size_t k = static_cast<std::size_t>(std::distance(t_.begin(), it));
    return std::min(k == 0 ? 0 : k - 1, t_.size() - 2);
  }
  std::vector<double> t_, v_;
  LogLogTable table_;
  ValueInterp interp_;
};

/// Legendre transform by monotone root-finding on the source density:
/// B*(s) = s t* - B(t*) with t* = b^{-1}(s).
class ConjugateImpl final : public Young1DImpl {
 public:
  explicit ConjugateImpl(YoungFunction1D source)
      : Young1DImpl(Density1D{DensityKind::Derived, 0, 0, 0, 0, {}, {}}), source_(std::move(source)) {}

  double value(double s) const override {
    if (s <= 0.0) return 0.0;
    const double t = source_.density_inverse(s);
    if (!std::isfinite(t)) return kInf;
    return std::max(0.0, s * t - source_(t));
  }
  double density(double s) const override { return source_.density_inverse(s); }
  // The density of the conjugate is b^{-1}; inverting it gives b back.
  double density_inverse(double t) const override { return source_.density(t); }
  std::string describe() const override { return "conjugate(" + source_.describe() + ")"; }

 private:
  YoungFunction1D source_;
};

void validate_density(const Young1DImpl& impl) {
  if (impl.density(0.0) != 0.0) throw InvariantError("density must vanish at 0: " + impl.describe());
  double prev = 0.0;
  for (double tau : geomspace(1e-6, 1e6, 121)) {
    const double b = impl.density(tau);
    if (std::isnan(b)) throw InvariantError("density is NaN: " + impl.describe());
    if (!(b > 0.0)) throw InvariantError("density must be positive for tau > 0: " + impl.describe());
    if (b < prev * (1.0 - 1e-12)) throw InvariantError("density must be nondecreasing: " + impl.describe());
    prev = b;
  }
  // Unbounded trend: strictly increasing at decades 10^1 .. 10^6 until overflow.
  double last = impl.density(1.0);
  for (int k = 1; k <= 6; ++k) {
    const double b = impl.density(std::pow(10.0, k));
    if (std::isinf(b)) break;
    if (!(b > last)) throw InvariantError("density must grow without bound: " + impl.describe());
    last = b;
  }
}

}  // namespace

YoungFunction1D Young1DImpl::conjugate(const YoungFunction1D& self) const {
  return wrap(std::make_shared<ConjugateImpl>(self));
}

}  // namespace detail

using detail::Young1DImpl;

namespace {

std::shared_ptr<const Young1DImpl> make_impl(const Density1D& d) {
  switch (d.kind) {
    case DensityKind::Power:
      if (!(d.p > 1.0) || !(d.scale > 0.0)) throw InvariantError("power: need p > 1 and scale > 0");
      return std::make_shared<detail::PowerImpl>(d);
    case DensityKind::PowerLog:
      if (!(d.p > 1.0) || !(d.scale > 0.0) || !(d.c > 1.0))
        throw InvariantError("powerlog: need p > 1, c > 1 and scale > 0");
      return std::make_shared<detail::PowerLogImpl>(d);
    case DensityKind::ExpPower:
      if (!(d.alpha > 1.0) || !(d.scale > 0.0)) throw InvariantError("exppow: need alpha > 1 and scale > 0");
      return std::make_shared<detail::ExpPowerImpl>(d);
    case DensityKind::ExpLinear:
      if (!(d.scale > 0.0)) throw InvariantError("explin: need scale > 0");
      return std::make_shared<detail::ExpLinearImpl>(d);
    case DensityKind::Tabulated: {
      Density1D t = d;
      if (t.tau.size() != t.b.size() || t.tau.empty()) throw InvariantError("table: tau and b must have equal nonzero size");
      if (t.tau.front() != 0.0) {
        t.tau.insert(t.tau.begin(), 0.0);
        t.b.insert(t.b.begin(), 0.0);
      }
      if (t.tau.size() < 2) throw InvariantError("table: need a knot with tau > 0");
      for (std::size_t k = 0; k < t.tau.size(); ++k) {
        if (!std::isfinite(t.tau[k]) || !std::isfinite(t.b[k])) throw InvariantError("table: non-finite entry");
        if (k > 0 && !(t.tau[k] > t.tau[k - 1])) throw InvariantError("table: tau must be strictly increasing");
        if (k > 0 && t.b[k] < t.b[k - 1]) throw InvariantError("table: b must be nondecreasing");
        if (k > 0 && !(t.b[k] > 0.0)) throw InvariantError("table: b must be positive for tau > 0");
      }
      if (t.b.front() != 0.0) throw InvariantError("table: b(0) must be 0");
      const std::size_t K = t.tau.size() - 1;
      if (K >= 2 && !(t.b[K] > t.b[K - 1])) throw InvariantError("table: last segment must increase so b is unbounded");
      return std::make_shared<detail::TabulatedImpl>(t);
    }
    case DensityKind::Derived:
      break;
  }
  throw InvariantError("density kind cannot be built from parameters");
}

}  // namespace

YoungFunction1D::YoungFunction1D(const Density1D& density) : impl_(make_impl(density)) {
  detail::validate_density(*impl_);
}

YoungFunction1D YoungFunction1D::power(double p) { return power(p, 1.0 / p); }

YoungFunction1D YoungFunction1D::power(double p, double scale) {
  Density1D d;
  d.kind = DensityKind::Power;
  d.p = p;
  d.scale = scale;
  return YoungFunction1D(d);
}

YoungFunction1D YoungFunction1D::power_log(double p, double alpha, double c) { return power_log(p, alpha, c, 1.0 / p); }

YoungFunction1D YoungFunction1D::power_log(double p, double alpha, double c, double scale) {
  Density1D d;
  d.kind = DensityKind::PowerLog;
  d.p = p;
  d.alpha = alpha;
  d.c = c;
  d.scale = scale;
  return YoungFunction1D(d);
}

YoungFunction1D YoungFunction1D::exp_power(double alpha, double scale) {
  Density1D d;
  d.kind = DensityKind::ExpPower;
  d.alpha = alpha;
  d.scale = scale;
  return YoungFunction1D(d);
}

YoungFunction1D YoungFunction1D::exp_linear(double scale) {
  Density1D d;
  d.kind = DensityKind::ExpLinear;
  d.scale = scale;
  return YoungFunction1D(d);
}

YoungFunction1D YoungFunction1D::tabulated(std::vector<double> tau, std::vector<double> b) {
  Density1D d;
  d.kind = DensityKind::Tabulated;
  d.tau = std::move(tau);
  d.b = std::move(b);
  return YoungFunction1D(d);
}

YoungFunction1D YoungFunction1D::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open density table: " + path.string());
  std::vector<double> tau, b;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x = 0, y = 0;
    if (!(row >> x >> y)) {
      if (tau.empty()) continue;  // header
      throw DomainError(path.string() + ":" + std::to_string(lineno) + ": expected two numbers");
    }
    tau.push_back(x);
    b.push_back(y);
  }
  return tabulated(std::move(tau), std::move(b));
}

YoungFunction1D YoungFunction1D::from_values(std::vector<double> t, std::vector<double> values, ValueInterp interp) {
  for (std::size_t k = 1; k < values.size(); ++k)
    if (!(values[k] > values[k - 1])) throw InvariantError("value table must be strictly increasing");
  return YoungFunction1D(std::make_shared<detail::ValuesImpl>(std::move(t), std::move(values), interp));
}

double YoungFunction1D::operator()(double t) const {
  if (!std::isfinite(t)) throw DomainError("YoungFunction1D: non-finite argument");
  return impl_->value(std::abs(t));
}

double YoungFunction1D::density(double tau) const { return impl_->density(std::abs(tau)); }

double YoungFunction1D::derivative(double t) const {
  if (t == 0.0) return 0.0;
  const double b = impl_->density(std::abs(t));
  return t > 0.0 ? b : -b;
}

double YoungFunction1D::density_inverse(double s) const { return impl_->density_inverse(s); }

double YoungFunction1D::inverse(double y) const { return impl_->inverse(y); }

YoungFunction1D YoungFunction1D::conjugate() const { return impl_->conjugate(*this); }

DensityKind YoungFunction1D::kind() const { return impl_->params().kind; }

const Density1D& YoungFunction1D::parameters() const { return impl_->params(); }

std::string YoungFunction1D::describe() const { return impl_->describe(); }

double eval1d(const YoungFunction1D& B, double t) { return B(t); }

YoungFunction1D conjugate1d(const YoungFunction1D& B) { return B.conjugate(); }

double inverse1d(const YoungFunction1D& B, double y) {
  if (!(y >= 0.0)) throw DomainError("inverse1d: y must be >= 0");
  return B.inverse(y);
}

Delta2Result delta2_check(const YoungFunction1D& B, double K, double t_max) {
  if (!std::isfinite(K) || !std::isfinite(t_max) || K < 0.0 || !(t_max > K))
    throw DomainError("delta2_check: need 0 <= K < t_max < inf");
  const double lo = K > 0.0 ? K : t_max * 1e-6;
  Delta2Result res;
  // Geometric grid on (lo, t_max]: the left endpoint itself is excluded.
  const auto full = geomspace(lo, t_max, 122);
  res.grid.assign(full.begin() + 1, full.end());
  res.holds = true;
  for (double t : res.grid) {
    const double r = B(2.0 * t) / B(t);
    res.ratios.push_back(r);
    if (!std::isfinite(r)) res.holds = false;
    if (std::isfinite(r)) res.c_est = std::max(res.c_est, r);
  }
  if (res.holds) {
    auto start = std::lower_bound(res.grid.begin(), res.grid.end(), t_max / 10.0);
    std::size_t i0 = static_cast<std::size_t>(std::distance(res.grid.begin(), start));
    if (i0 >= res.grid.size() - 1) i0 = 0;
    const double first = res.ratios[i0], last = res.ratios.back();
    if (last > first * (1.0 + 1e-9) + 1e-12) res.holds = false;
  }
  if (!res.holds) res.c_est = kInf;
  return res;
}

GrowthCertificate growth_certificate(const YoungFunction1D& A, const YoungFunction1D& D,
                                     const std::vector<double>& gammas) {
  if (gammas.empty()) throw DomainError("grows_essentially_slower: gammas must be nonempty");
  for (double g : gammas)
    if (!(g > 0.0)) throw DomainError("grows_essentially_slower: gammas must be positive");
  GrowthCertificate cert;
  cert.grid = geomspace(1.0, 1e8, 81);  // 10 points per decade
  cert.gammas = gammas;
  cert.slower = true;
  const std::size_t n = cert.grid.size();
  for (double g : gammas) {
    std::vector<double> ratios(n);
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = cert.grid[i];
      const double d = D(t);
      const double a = A(g * t);
      ratios[i] = std::isinf(d) && std::isfinite(a) ? 0.0 : a / d;
      if (std::isnan(ratios[i]) || std::isinf(ratios[i])) finite = false;
    }
    bool pass = false;
    double slope = kInf;
    if (finite) {
      const double last = ratios.back();
      if (last < 1e-6) {
        pass = true;
        slope = -kInf;
      } else {
        bool nonincreasing = true;
        for (std::size_t i = n - 21; i + 1 < n; ++i)
          if (ratios[i + 1] > ratios[i] * (1.0 + 1e-12)) nonincreasing = false;
        slope = std::log(ratios[n - 1] / ratios[n - 11]) / std::log(cert.grid[n - 1] / cert.grid[n - 11]);
        pass = nonincreasing && slope <= -0.02;
      }
    }
    cert.ratios.push_back(std::move(ratios));
    cert.tail_slopes.push_back(slope);
    cert.passed.push_back(pass);
    cert.slower = cert.slower && pass;
  }
  return cert;
}

bool grows_essentially_slower(const YoungFunction1D& A, const YoungFunction1D& D, const std::vector<double>& gammas) {
  return growth_certificate(A, D, gammas).slower;
}

}  // namespace aniso
