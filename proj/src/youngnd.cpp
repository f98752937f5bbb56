#include "aniso/youngnd.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "aniso/error.hpp"

namespace aniso {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

int structure_dim(const Structure& s) {
  return std::visit(overloaded{
                        [](const SeparableSum& x) { return static_cast<int>(x.terms.size()); },
                        [](const Radial& x) { return x.dim; },
                        [](const LinearComposite& x) { return x.rows.empty() ? 0 : static_cast<int>(x.rows[0].size()); },
                        [](const Custom& x) { return x.dim; },
                    },
                    s);
}

}  // namespace

NFunction::NFunction(Structure structure) {
  dim_ = structure_dim(structure);
  if (dim_ < 1) throw InvariantError("NFunction: dimension must be at least 1");
  auto state = std::make_shared<State>();
  if (auto* comp = std::get_if<LinearComposite>(&structure)) {
    if (comp->rows.size() != comp->funcs.size() || comp->rows.empty())
      throw InvariantError("composite: need one 1-D function per row");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(comp->rows.size()), dim_);
    for (std::size_t k = 0; k < comp->rows.size(); ++k) {
      if (static_cast<int>(comp->rows[k].size()) != dim_) throw InvariantError("composite: ragged coefficient rows");
      for (int i = 0; i < dim_; ++i) m(static_cast<Eigen::Index>(k), i) = comp->rows[k][static_cast<std::size_t>(i)];
    }
    // Rows must span R^n, else Phi vanishes on a nontrivial subspace.
    if (Eigen::FullPivLU<Eigen::MatrixXd>(m).rank() < dim_) throw InvariantError("composite: rows must span R^n");
  } else if (auto* sep = std::get_if<SeparableSum>(&structure)) {
    for (const auto& t : sep->terms) state->conjugates.push_back(t.conjugate());
  } else if (auto* rad = std::get_if<Radial>(&structure)) {
    state->conjugates.push_back(rad->profile.conjugate());
  } else if (auto* cus = std::get_if<Custom>(&structure)) {
    if (!cus->value || !cus->gradient) throw InvariantError("custom: value and gradient maps are required");
  }
  state->structure = std::move(structure);
  state_ = std::move(state);
}

NFunction NFunction::separable(std::vector<YoungFunction1D> terms) { return NFunction(SeparableSum{std::move(terms)}); }

NFunction NFunction::radial(YoungFunction1D profile, int dim) { return NFunction(Radial{std::move(profile), dim}); }

NFunction NFunction::composite(std::vector<std::vector<double>> rows, std::vector<YoungFunction1D> funcs) {
  return NFunction(LinearComposite{std::move(rows), std::move(funcs)});
}

NFunction NFunction::custom(int dim, std::function<double(std::span<const double>)> value,
                            std::function<void(std::span<const double>, std::span<double>)> gradient,
                            std::string name) {
  return NFunction(Custom{dim, std::move(value), std::move(gradient), std::move(name)});
}

std::string NFunction::describe() const {
  return std::visit(overloaded{
                        [](const SeparableSum& x) {
                          std::string s = "sepsum[";
                          for (std::size_t i = 0; i < x.terms.size(); ++i) s += (i ? "," : "") + x.terms[i].describe();
                          return s + "]";
                        },
                        [](const Radial& x) { return "radial[" + x.profile.describe() + "]"; },
                        [](const LinearComposite& x) {
                          std::ostringstream os;
                          os << "composite[rows=";
                          for (std::size_t k = 0; k < x.rows.size(); ++k) {
                            os << (k ? ";" : "") << "(";
                            for (std::size_t i = 0; i < x.rows[k].size(); ++i) os << (i ? "," : "") << x.rows[k][i];
                            os << ")";
                          }
                          os << ",funcs=";
                          for (std::size_t k = 0; k < x.funcs.size(); ++k) os << (k ? ";" : "") << x.funcs[k].describe();
                          os << "]";
                          return os.str();
                        },
                        [](const Custom& x) { return x.name; },
                    },
                    structure());
}

double NFunction::operator()(std::span<const double> xi) const {
  if (static_cast<int>(xi.size()) != dim_) throw DomainError("NFunction: dimension mismatch");
  return std::visit(overloaded{
                        [&](const SeparableSum& x) {
                          double s = 0.0;
                          for (std::size_t i = 0; i < x.terms.size(); ++i) s += x.terms[i](xi[i]);
                          return s;
                        },
                        [&](const Radial& x) { return x.profile(norm(xi)); },
                        [&](const LinearComposite& x) {
                          double s = 0.0;
                          for (std::size_t k = 0; k < x.rows.size(); ++k) s += x.funcs[k](dot(x.rows[k], xi));
                          return s;
                        },
                        [&](const Custom& x) { return x.value(xi); },
                    },
                    structure());
}

void NFunction::gradient(std::span<const double> xi, std::span<double> out) const {
  if (static_cast<int>(xi.size()) != dim_ || out.size() != xi.size())
    throw DomainError("NFunction: dimension mismatch");
  std::visit(overloaded{
                 [&](const SeparableSum& x) {
                   for (std::size_t i = 0; i < x.terms.size(); ++i) out[i] = x.terms[i].derivative(xi[i]);
                 },
                 [&](const Radial& x) {
                   const double r = norm(xi);
                   const double f = r > 0.0 ? x.profile.density(r) / r : 0.0;
                   for (std::size_t i = 0; i < xi.size(); ++i) out[i] = f * xi[i];
                 },
                 [&](const LinearComposite& x) {
                   std::fill(out.begin(), out.end(), 0.0);
                   for (std::size_t k = 0; k < x.rows.size(); ++k) {
                     const double d = x.funcs[k].derivative(dot(x.rows[k], xi));
                     for (std::size_t i = 0; i < xi.size(); ++i) out[i] += d * x.rows[k][i];
                   }
                 },
                 [&](const Custom& x) { x.gradient(xi, out); },
             },
             structure());
}

std::vector<double> NFunction::gradient(std::span<const double> xi) const {
  std::vector<double> g(xi.size());
  gradient(xi, g);
  return g;
}

bool NFunction::has_analytic_conjugate() const noexcept {
  return std::holds_alternative<SeparableSum>(structure()) || std::holds_alternative<Radial>(structure());
}

double NFunction::analytic_conjugate(std::span<const double> xi_prime) const {
  if (static_cast<int>(xi_prime.size()) != dim_) throw DomainError("NFunction: dimension mismatch");
  if (std::holds_alternative<SeparableSum>(structure())) {
    double s = 0.0;
    for (std::size_t i = 0; i < xi_prime.size(); ++i) s += state_->conjugates[i](xi_prime[i]);
    return s;
  }
  if (std::holds_alternative<Radial>(structure())) return state_->conjugates[0](norm(xi_prime));
  throw PreconditionError("analytic conjugate unavailable for " + describe());
}

double NFunction::axis_value(int axis, double t) const {
  std::vector<double> xi(static_cast<std::size_t>(dim_), 0.0);
  xi[static_cast<std::size_t>(axis)] = t;
  return (*this)(xi);
}

double eval_nd(const NFunction& phi, std::span<const double> xi) {
  for (double v : xi)
    if (!std::isfinite(v)) throw DomainError("eval_nd: non-finite argument");
  return phi(xi);
}

std::vector<double> grad_nd(const NFunction& phi, std::span<const double> xi) {
  for (double v : xi)
    if (!std::isfinite(v)) throw DomainError("grad_nd: non-finite argument");
  return phi.gradient(xi);
}

ConjugatePoint conjugate_nd_numeric(const NFunction& phi, std::span<const double> xi_prime) {
  const std::size_t n = xi_prime.size();
  if (static_cast<int>(n) != phi.dim()) throw DomainError("conjugate_nd: dimension mismatch");
  for (double v : xi_prime)
    if (!std::isfinite(v)) throw DomainError("conjugate_nd: non-finite argument");

  const double scale = 1.0 + norm(xi_prime);
  const double tol = 1e-9 * scale;
  std::vector<double> x(n, 0.0), g(n), r(n), d(n), trial(n), gp(n), gm(n), xp(n);
  auto objective = [&](std::span<const double> z) { return dot(z, xi_prime) - phi(z); };

  ConjugatePoint out;
  double f = objective(x);
  constexpr int kMaxSteps = 10000;
  for (int it = 0; it < kMaxSteps; ++it) {
    phi.gradient(x, g);
    for (std::size_t i = 0; i < n; ++i) r[i] = xi_prime[i] - g[i];
    const double res = norm(r);
    out.iterations = it;
    if (res <= tol) {
      out.value = f;
      out.argmax = x;
      out.residual = res;
      return out;
    }

    // Newton direction from a central-difference Hessian of Phi.
    Eigen::MatrixXd H(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
      // Steps stay inside (0, x_j) so a coordinate kink at 0 is not straddled.
      double h = 1e-6 * std::max(1.0, std::abs(x[j]));
      if (x[j] != 0.0) h = std::max(1e-13, std::min(h, 0.1 * std::abs(x[j])));
      xp = x;
      xp[j] = x[j] + h;
      phi.gradient(xp, gp);
      xp[j] = x[j] - h;
      phi.gradient(xp, gm);
      for (std::size_t i = 0; i < n; ++i)
        H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (gp[i] - gm[i]) / (2.0 * h);
    }
    H = 0.5 * (H + H.transpose()).eval();
    bool newton = H.allFinite();
    if (newton) {
      Eigen::LLT<Eigen::MatrixXd> llt(H);
      Eigen::VectorXd rv = Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(n));
      Eigen::VectorXd dv;
      if (llt.info() == Eigen::Success) dv = llt.solve(rv);
      newton = llt.info() == Eigen::Success && dv.allFinite() && dv.dot(rv) > 0.0;
      if (newton)
        for (std::size_t i = 0; i < n; ++i) d[i] = dv(static_cast<Eigen::Index>(i));
    }
    if (!newton)
      for (std::size_t i = 0; i < n; ++i) d[i] = r[i] / scale;

    const double slope = dot(d, r);
    double step = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + step * d[i];
      const double ft = objective(trial);
      // Below the round-off of f the Armijo test is blind; a full Newton step is taken as is.
      const bool blind = newton && bt == 0 && slope <= 1e-13 * (1.0 + std::abs(f));
      if (std::isfinite(ft) && (ft >= f + 1e-4 * step * slope || blind)) {
        // Gradient steps may be far too short; keep doubling while the ascent improves.
        if (!newton && bt == 0) {
          double fbest = ft;
          for (int grow = 0; grow < 60; ++grow) {
            std::vector<double> more(n);
            for (std::size_t i = 0; i < n; ++i) more[i] = x[i] + 2.0 * step * d[i];
            const double fm = objective(more);
            if (!(std::isfinite(fm) && fm > fbest)) break;
            step *= 2.0;
            fbest = fm;
            trial = more;
          }
          f = fbest;
        } else {
          f = ft;
        }
        x = trial;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // Round-off floor: the objective cannot be improved further at this resolution.
      if (res <= 1e3 * tol) {
        out.value = f;
        out.argmax = x;
        out.residual = res;
        return out;
      }
      throw ConvergenceError("conjugate_nd: line search failed", x);
    }
  }
  throw ConvergenceError("conjugate_nd: no convergence in 1e4 ascent steps", x);
}

double conjugate_nd(const NFunction& phi, std::span<const double> xi_prime) {
  if (phi.has_analytic_conjugate()) {
    for (double v : xi_prime)
      if (!std::isfinite(v)) throw DomainError("conjugate_nd: non-finite argument");
    return phi.analytic_conjugate(xi_prime);
  }
  return conjugate_nd_numeric(phi, xi_prime).value;
}

const ConjugatePoint& ConjugateHandle::at(std::span<const double> xi_prime) {
  std::vector<double> key(xi_prime.begin(), xi_prime.end());
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  ConjugatePoint point;
  if (phi_.has_analytic_conjugate()) {
    point.value = phi_.analytic_conjugate(xi_prime);
    // argmax of the sup is the gradient of the conjugate; recover it per structure.
    point.argmax.assign(key.size(), 0.0);
    if (const auto* sep = std::get_if<SeparableSum>(&phi_.structure())) {
      for (std::size_t i = 0; i < key.size(); ++i) {
        const double t = sep->terms[i].density_inverse(std::abs(key[i]));
        point.argmax[i] = key[i] < 0 ? -t : t;
      }
    } else if (const auto* rad = std::get_if<Radial>(&phi_.structure())) {
      const double s = norm(key);
      if (s > 0.0) {
        const double t = rad->profile.density_inverse(s);
        for (std::size_t i = 0; i < key.size(); ++i) point.argmax[i] = t * key[i] / s;
      }
    }
    const auto g = phi_.gradient(point.argmax);
    std::vector<double> r(key.size());
    for (std::size_t i = 0; i < key.size(); ++i) r[i] = key[i] - g[i];
    point.residual = norm(r);
  } else {
    point = conjugate_nd_numeric(phi_, xi_prime);
  }
  return cache_.emplace(std::move(key), std::move(point)).first->second;
}

double young_gap(const NFunction& phi, std::span<const double> xi, std::span<const double> eta) {
  if (xi.size() != eta.size()) throw DomainError("young_gap: dimension mismatch");
  return phi(xi) + conjugate_nd(phi, eta) - dot(xi, eta);
}

bool gradient_sandwich_check(const NFunction& phi, std::span<const double> xi) {
  const auto g = phi.gradient(xi);
  const double lhs = conjugate_nd(phi, g);
  const double mid = dot(g, xi);
  std::vector<double> twice(xi.begin(), xi.end());
  for (double& v : twice) v *= 2.0;
  const double rhs = phi(twice);
  const double slack = 1e-9 + 1e-12 * std::abs(mid);
  return lhs <= mid + slack && mid <= rhs + slack;
}

namespace {

/// Local minimization of Phi(r w) over the unit sphere by projected gradient descent.
std::vector<double> refine_direction(const NFunction& phi, double r, std::vector<double> w) {
  const std::size_t n = w.size();
  std::vector<double> x(n), g(n), trial(n);
  auto f = [&](const std::vector<double>& dir) {
    for (std::size_t i = 0; i < n; ++i) x[i] = r * dir[i];
    return phi(x);
  };
  double fw = f(w);
  double step = 0.1;
  for (int it = 0; it < 200; ++it) {
    for (std::size_t i = 0; i < n; ++i) x[i] = r * w[i];
    phi.gradient(x, g);
    const double radial = dot(g, w);
    std::vector<double> tang(n);
    for (std::size_t i = 0; i < n; ++i) tang[i] = r * (g[i] - radial * w[i]);
    const double tn = norm(tang);
    if (tn <= 1e-14 * (1.0 + std::abs(fw))) break;
    bool moved = false;
    double s = step;
    for (int bt = 0; bt < 50; ++bt) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = w[i] - s * tang[i] / tn;
      const double nt = norm(trial);
      for (double& v : trial) v /= nt;
      const double ft = f(trial);
      if (ft < fw) {
        w = trial;
        fw = ft;
        moved = true;
        step = std::min(1.0, 2.0 * s);
        break;
      }
      s *= 0.5;
    }
    if (!moved || s < 1e-14) break;
  }
  return w;
}

struct SupportLines {
  std::vector<double> r, v, s;  // vertex radius, value and supporting slope
};

SupportLines support_lines(const NFunction& phi, int sphere_samples, int radial_knots, const MinorantOptions& options) {
  const int n = phi.dim();
  if (sphere_samples < 64 * n) throw PreconditionError("radial_minorant: need sphere_samples >= 64 n");
  if (radial_knots < 64) throw PreconditionError("radial_minorant: need radial_knots >= 64");
  if (!(options.r_min > 0.0) || !(options.r_max > options.r_min)) throw DomainError("radial_minorant: bad radius range");

  const auto dirs = sphere_directions(n, sphere_samples, options.seed);
  // Supporting lines sit below the profile between radii; eight radii per knot keep that gap near 1e-4.
  auto radii = geomspace(options.r_min, options.r_max, 8 * radial_knots);
  const auto un = static_cast<std::size_t>(n);
  std::vector<double> m(radii.size()), dm(radii.size()), x(un), g(un);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double r = radii[k];
    double best = kInf;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      for (std::size_t j = 0; j < un; ++j) x[j] = r * dirs[i][j];
      const double v = phi(x);
      if (v < best) {
        best = v;
        best_i = i;
      }
    }
    if (!(best < 1e250)) {
      // Overflowing growth: the table stops here and its power-law tail takes over.
      radii.resize(k);
      m.resize(k);
      dm.resize(k);
      break;
    }
    const auto w = refine_direction(phi, r, dirs[best_i]);
    for (std::size_t j = 0; j < un; ++j) x[j] = r * w[j];
    m[k] = std::min(best, phi(x));
    phi.gradient(x, g);
    dm[k] = dot(g, w);  // envelope derivative of the directional minimum
  }

  if (radii.size() < 8) throw DomainError("radial_minorant: Phi overflows below the requested radius range");

  // Lower convex hull of (0, 0) and the samples.
  std::vector<double> hx{0.0}, hy{0.0};
  hx.insert(hx.end(), radii.begin(), radii.end());
  hy.insert(hy.end(), m.begin(), m.end());
  const auto hull = lower_convex_hull(hx, hy);

  // Supporting lines at the hull vertices, slopes clipped into the adjacent
  // secant slopes; their upper envelope is convex and lies below the hull.
  SupportLines out;
  auto& vr = out.r;
  auto& vv = out.v;
  auto& vs = out.s;
  for (std::size_t h = 1; h < hull.size(); ++h) {
    const std::size_t i = hull[h];
    const double left = (hy[i] - hy[hull[h - 1]]) / (hx[i] - hx[hull[h - 1]]);
    const double right = h + 1 < hull.size() ? (hy[hull[h + 1]] - hy[i]) / (hx[hull[h + 1]] - hx[i]) : kInf;
    vr.push_back(hx[i]);
    vv.push_back(hy[i]);
    vs.push_back(std::clamp(dm[i - 1], left, right));
  }
  return out;
}

/// C1 convex profile from supporting lines: each kink at the intersection x of
/// neighbouring lines is replaced by a linear slope ramp on [x - w, x + w], which
/// leaves the values at the vertices unchanged. Below the first vertex the profile
/// is v0 (r / r0)^q with q = s0 r0 / v0 >= 1; past the last vertex it is the last line.
class SmoothProfile {
 public:
  explicit SmoothProfile(SupportLines lines) : l_(std::move(lines)) {
    const std::size_t k = l_.r.size();
    x_.assign(k, 0.0);
    w_.assign(k, 0.0);
    for (std::size_t j = 0; j + 1 < k; ++j) {
      if (!(l_.s[j + 1] > l_.s[j])) continue;
      const double x = (l_.v[j + 1] - l_.s[j + 1] * l_.r[j + 1] - l_.v[j] + l_.s[j] * l_.r[j]) / (l_.s[j] - l_.s[j + 1]);
      const double w = 0.5 * std::min(x - l_.r[j], l_.r[j + 1] - x);
      if (w > 0.0) {
        x_[j] = x;
        w_[j] = w;
      }
    }
    q_ = l_.v[0] > 0.0 ? std::max(1.0, l_.s[0] * l_.r[0] / l_.v[0]) : 1.0;
  }

  double value(double r) const { return eval(r, false); }
  double derivative(double r) const { return eval(r, true); }

 private:
  double eval(double r, bool deriv) const {
    if (r <= 0.0) return 0.0;
    if (r < l_.r[0]) {
      const double u = r / l_.r[0];
      return deriv ? q_ * l_.v[0] / l_.r[0] * std::pow(u, q_ - 1.0) : l_.v[0] * std::pow(u, q_);
    }
    const auto it = std::upper_bound(l_.r.begin(), l_.r.end(), r);
    const auto j = static_cast<std::size_t>(it - l_.r.begin()) - 1;
    if (j + 1 < l_.r.size() && w_[j] > 0.0) {
      const double a = x_[j] - w_[j], b = x_[j] + w_[j];
      if (r > a && r < b) {
        const double ds = l_.s[j + 1] - l_.s[j];
        if (deriv) return l_.s[j] + ds * (r - a) / (2.0 * w_[j]);
        return l_.v[j] + l_.s[j] * (r - l_.r[j]) + ds * (r - a) * (r - a) / (4.0 * w_[j]);
      }
      if (r >= b) return deriv ? l_.s[j + 1] : l_.v[j + 1] + l_.s[j + 1] * (r - l_.r[j + 1]);
    }
    return deriv ? l_.s[j] : l_.v[j] + l_.s[j] * (r - l_.r[j]);
  }

  SupportLines l_;
  std::vector<double> x_, w_;
  double q_ = 1.0;
};

}  // namespace

YoungFunction1D radial_minorant(const NFunction& phi, int sphere_samples, int radial_knots,
                                const MinorantOptions& options) {
  const SupportLines lines = support_lines(phi, sphere_samples, radial_knots, options);
  const auto& vr = lines.r;
  const auto& vv = lines.v;
  const auto& vs = lines.s;
  std::vector<double> kt, kv;
  for (std::size_t j = 0; j < vr.size(); ++j) {
    kt.push_back(vr[j]);
    kv.push_back(vv[j]);
    if (j + 1 < vr.size() && vs[j + 1] > vs[j]) {
      const double xint = (vv[j + 1] - vs[j + 1] * vr[j + 1] - vv[j] + vs[j] * vr[j]) / (vs[j] - vs[j + 1]);
      const double gap = 1e-9 * (vr[j + 1] - vr[j]);
      if (xint > vr[j] + gap && xint < vr[j + 1] - gap) {
        kt.push_back(xint);
        kv.push_back(vv[j] + vs[j] * (xint - vr[j]));
      }
    }
  }
  // Drop any numerically non-increasing knot.
  std::vector<double> ft{kt[0]}, fv{kv[0]};
  for (std::size_t j = 1; j < kt.size(); ++j) {
    if (kv[j] > fv.back() && kt[j] > ft.back()) {
      ft.push_back(kt[j]);
      fv.push_back(kv[j]);
    }
  }
  return YoungFunction1D::from_values(std::move(ft), std::move(fv), ValueInterp::Linear);
}

NFunction strictly_convexify(const NFunction& phi, double c) {
  if (!(c > 0.0)) throw DomainError("strictly_convexify: c must be positive");
  const int n = phi.dim();
  MinorantOptions opts;
  opts.r_min = 1e-4;
  opts.r_max = 1e4;
  const auto minorant = std::make_shared<const SmoothProfile>(support_lines(phi, 128 * n, 160, opts));
  auto value = [phi, minorant, c](std::span<const double> xi) {
    const double m = minorant->value(norm(xi));
    return phi(xi) + c * (m - std::log1p(m));
  };
  auto gradient = [phi, minorant, c](std::span<const double> xi, std::span<double> out) {
    phi.gradient(xi, out);
    const double r = norm(xi);
    if (r == 0.0) return;
    const double m = minorant->value(r);
    const double f = c * m / (1.0 + m) * minorant->derivative(r) / r;
    for (std::size_t i = 0; i < xi.size(); ++i) out[i] += f * xi[i];
  };
  return NFunction::custom(n, value, gradient, "convexified[" + phi.describe() + "]");
}

NFunctionDiagnostics validate_nfunction(const NFunction& phi, Rng& rng, int samples, double radius) {
  NFunctionDiagnostics d;
  const auto n = static_cast<std::size_t>(phi.dim());
  std::vector<double> zero(n, 0.0), a(n), b(n), c(n), mid(n), neg(n), xp(n), xm(n);
  d.zero_at_origin = phi(zero) == 0.0;
  auto draw = [&](std::vector<double>& v) {
    for (double& x : v) x = rng.uniform(-radius, radius);
  };
  for (int s = 0; s < samples; ++s) {
    draw(a);
    draw(b);
    const double fa = phi(a), fb = phi(b);
    for (std::size_t i = 0; i < n; ++i) {
      neg[i] = -a[i];
      mid[i] = 0.5 * (a[i] + b[i]);
    }
    if (std::abs(phi(neg) - fa) > 1e-12 * (1.0 + fa)) d.even = false;
    if (phi(mid) > 0.5 * (fa + fb) + 1e-12 * (1.0 + fa + fb)) d.convex = false;

    // Growth: Phi(r w)/r must fall by half from r = 1e-4 to 1e-8 and double from 1e2 to 1e4.
    const double na = norm(a);
    auto ratio = [&](double r) {
      for (std::size_t i = 0; i < n; ++i) c[i] = a[i] / na * r;
      return phi(c) / r;
    };
    if (ratio(1e-8) > 0.5 * ratio(1e-4)) d.sublinear_at_zero = false;
    const double far = ratio(1e4);
    if (std::isfinite(far) && far < 2.0 * ratio(1e2)) d.superlinear = false;

    // Gradient against central differences.
    const auto g = phi.gradient(a);
    const double gn = norm(g);
    for (std::size_t j = 0; j < n; ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(a[j]));
      xp = a;
      xm = a;
      xp[j] += h;
      xm[j] -= h;
      const double fd = (phi(xp) - phi(xm)) / (2.0 * h);
      d.max_gradient_error = std::max(d.max_gradient_error, std::abs(fd - g[j]) / (1.0 + gn));
    }
  }
  return d;
}

namespace families {

NFunction anisotropic_power_log(const std::vector<double>& p, const std::vector<double>& alpha, double c) {
  if (p.size() != alpha.size()) throw DomainError("anisotropic_power_log: p and alpha sizes differ");
  std::vector<YoungFunction1D> terms;
  for (std::size_t i = 0; i < p.size(); ++i)
    terms.push_back(alpha[i] == 0.0 ? YoungFunction1D::power(p[i]) : YoungFunction1D::power_log(p[i], alpha[i], c));
  return NFunction::separable(std::move(terms));
}

NFunction exp_power_sum(const std::vector<double>& alpha) {
  std::vector<YoungFunction1D> terms;
  for (double a : alpha) terms.push_back(YoungFunction1D::exp_power(a));
  return NFunction::separable(std::move(terms));
}

NFunction mixed_power_exp(const std::vector<double>& p, double alpha) {
  std::vector<YoungFunction1D> terms;
  for (double q : p) terms.push_back(YoungFunction1D::power(q));
  terms.push_back(YoungFunction1D::exp_power(alpha));
  return NFunction::separable(std::move(terms));
}

NFunction two_direction(double p, double q, double alpha, double c) {
  return NFunction::composite({{1.0, -1.0}, {1.0, 0.0}},
                              {YoungFunction1D::power(p, 1.0), YoungFunction1D::power_log(q, alpha, c, 1.0)});
}

NFunction quadratic(int n) { return NFunction::radial(YoungFunction1D::power(2.0), n); }

}  // namespace families

}  // namespace aniso
