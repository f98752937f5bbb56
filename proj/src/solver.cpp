#include "aniso/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "aniso/error.hpp"
#include "aniso/sobolev.hpp"

namespace aniso {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::Stalled: return "stalled";
    case SolveStatus::MaxIterations: return "max-iterations";
  }
  return "?";
}

const char* to_string(GateStatus s) {
  switch (s) {
    case GateStatus::Unrestricted: return "unrestricted";
    case GateStatus::Certified: return "certified";
    case GateStatus::Inconclusive: return "inconclusive";
    case GateStatus::Violated: return "violated";
  }
  return "?";
}

GrowthGate check_growth_gate(const NFunction& phi, const YoungFunction1D& B) {
  if (phi.dim() < 2) return {GateStatus::Unrestricted, "one-dimensional domain"};
  try {
    const auto profile = symmetral(phi, 64);
    const auto zero = check_zero_condition(profile);
    if (!zero.holds)
      return {GateStatus::Inconclusive, "zero condition fails (integrand exponent " + std::to_string(zero.exponent) +
                                            "); Sobolev conjugate undefined"};
    const auto tail = classify_tail(profile);
    if (tail.tail == TailClass::FiniteTail) return {GateStatus::Unrestricted, "finite tail"};
    const auto conj = sobolev_conjugate(profile);
    if (grows_essentially_slower(B, conj.young(), {0.5, 1.0, 2.0, 10.0}))
      return {GateStatus::Certified, "B grows essentially more slowly than Phi_n"};
    return {GateStatus::Violated, "B does not grow essentially more slowly than Phi_n"};
  } catch (const InconclusiveError& e) {
    return {GateStatus::Inconclusive, e.what()};
  }
}

double constraint_integral(const Field& u, const YoungFunction1D& B) { return modular(u, B); }

double projection_scale(const Field& u, const YoungFunction1D& B, double r, double tol) {
  if (!(r > 0.0)) throw DomainError("projection: r must be positive");
  if (std::all_of(u.values.begin(), u.values.end(), [](double v) { return v == 0.0; }))
    throw DegenerateInputError("projection: u is identically zero");
  const double w = u.domain.cell_volume();
  auto f = [&](double s) {
    double acc = 0.0;
    for (double v : u.values) acc += B(s * v);
    return acc * w - r;
  };
  auto df = [&](double s) {
    double acc = 0.0;
    for (double v : u.values) acc += B.density(s * std::abs(v)) * std::abs(v);
    return acc * w;
  };
  double s = 1.0, fs = f(s);
  if (std::abs(fs) <= tol * r) return s;
  double lo = 0.0, hi = kInf;
  if (fs > 0.0) {
    hi = 1.0;
    lo = 0.5;
    while (f(lo) > 0.0) {
      hi = lo;
      lo *= 0.5;
    }
  } else {
    lo = 1.0;
    hi = 2.0;
    while (f(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e300) throw InvariantError("projection: constraint integral stays below r");
    }
  }
  s = 0.5 * (lo + hi);
  for (int it = 0; it < 500; ++it) {
    fs = f(s);
    if (std::abs(fs) <= tol * r) return s;
    (fs > 0.0 ? hi : lo) = s;
    const double d = df(s);
    double next = d > 0.0 ? s - fs / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == s || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return s;
    s = next;
  }
  return s;
}

Field project_to_constraint(const Field& u, const YoungFunction1D& B, double r, double tol) {
  const double s = projection_scale(u, B, r, tol);
  Field out = u;
  for (double& v : out.values) v *= s;
  return out;
}

double energy(const Field& u, const NFunction& phi) { return modular(gradient(u), phi); }

Field energy_gradient(const Field& u, const NFunction& phi) {
  GradField w = gradient(u);
  std::vector<double> tmp(static_cast<std::size_t>(phi.dim()));
  for (std::size_t c = 0; c < w.domain.cell_count(); ++c) {
    auto cell = w.cell(c);
    std::copy(cell.begin(), cell.end(), tmp.begin());
    phi.gradient(tmp, cell);
  }
  Field g = divergence(w);
  for (double& v : g.values) v = -v;
  return g;
}

Field descent_direction(const Field& u, const NFunction& phi) {
  Field g = energy_gradient(u, phi);
  for (double& v : g.values) v = -v;
  return g;
}

namespace {

/// b(|u|) sign u at every node.
std::vector<double> constraint_density(const Field& u, const YoungFunction1D& B) {
  std::vector<double> c(u.values.size());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = B.derivative(u.values[j]);
  return c;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// -div(w grad .) on interior nodes for cell weights w.
Eigen::SparseMatrix<double> weighted_laplacian(const GridDomain& d, const std::vector<double>& w) {
  const auto n = static_cast<std::size_t>(d.dim());
  const auto cshape = d.cell_shape();
  const auto& nodes = d.nodes();
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<int> m(n), q(n);
  auto interior = [&](const std::vector<int>& node) -> std::ptrdiff_t {
    std::ptrdiff_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (node[i] <= 0 || node[i] >= nodes[i] - 1) return -1;
      idx = idx * (nodes[i] - 2) + (node[i] - 1);
    }
    return idx;
  };
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    std::size_t rem = c;
    for (std::size_t i = n; i-- > 0;) {
      m[i] = static_cast<int>(rem % static_cast<std::size_t>(cshape[i]));
      rem /= static_cast<std::size_t>(cshape[i]);
    }
    const auto p = interior(m);
    for (std::size_t a = 0; a < n; ++a) {
      q = m;
      ++q[a];
      const auto qi = interior(q);
      const double h = d.spacing(static_cast<int>(a));
      const double k = w[c] / (h * h);
      if (p >= 0) trip.emplace_back(p, p, k);
      if (qi >= 0) trip.emplace_back(qi, qi, k);
      if (p >= 0 && qi >= 0) {
        trip.emplace_back(p, qi, -k);
        trip.emplace_back(qi, p, -k);
      }
    }
  }
  const auto size = static_cast<Eigen::Index>(d.interior_count());
  Eigen::SparseMatrix<double> K(size, size);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

std::vector<double> cell_weights(const Field& u, const NFunction& phi, Preconditioner pc) {
  const GridDomain& d = u.domain;
  std::vector<double> w(d.cell_count(), 1.0);
  if (pc != Preconditioner::Secant) return w;
  const GradField gu = gradient(u);
  std::vector<double> g(static_cast<std::size_t>(phi.dim()));
  double wmax = 0.0;
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    const auto xi = gu.cell(c);
    double nn = 0.0;
    for (double x : xi) nn += x * x;
    if (nn > 0.0) {
      phi.gradient(xi, g);
      double s = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * xi[i];
      w[c] = s / nn;
    } else {
      w[c] = 0.0;
    }
    if (std::isfinite(w[c])) wmax = std::max(wmax, w[c]);
  }
  if (!(wmax > 0.0)) return std::vector<double>(d.cell_count(), 1.0);
  for (double& x : w) x = std::isfinite(x) ? std::max(x, 1e-8 * wmax) : wmax;
  return w;
}

double residual_only(const Field& u, const std::vector<double>& g, const std::vector<double>& c, double lambda) {
  const double w = u.domain.cell_volume();
  double res = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double dF = w * g[j];
    res = std::max(res, std::abs(dF - lambda * w * c[j]) / (1.0 + std::abs(dF)));
  }
  return res;
}

}  // namespace

double lagrange_multiplier(const Field& u, const NFunction& phi, const YoungFunction1D& B) {
  double den = 0.0;
  for (double v : u.values) den += B.density(std::abs(v)) * std::abs(v);
  if (!(den > 0.0)) throw DegenerateInputError("lagrange_multiplier: u is identically zero");
  const Field g = energy_gradient(u, phi);
  return dot(g.values, u.values) / den;
}

WeakResidual weak_residual(const Field& u, double lambda, const NFunction& phi, const YoungFunction1D& B) {
  WeakResidual out;
  const Field g = energy_gradient(u, phi);
  const auto c = constraint_density(u, B);
  out.residual = residual_only(u, g.values, c, lambda);

  const GradField gu = gradient(u);
  ConjugateHandle conj(phi);
  std::vector<double> flux(static_cast<std::size_t>(phi.dim()));
  double mp = 0.0;
  for (std::size_t k = 0; k < u.domain.cell_count(); ++k) {
    phi.gradient(gu.cell(k), flux);
    mp += conj(flux);
  }
  out.conjugate_modular_phi = mp * u.domain.cell_volume();
  const YoungFunction1D Bc = B.conjugate();
  double mb = 0.0;
  for (double v : u.values) mb += Bc(B.density(std::abs(v)));
  out.conjugate_modular_b = mb * u.domain.cell_volume();
  return out;
}

double constraint_path(const Field& u, const Field& v, double eps, const YoungFunction1D& B) {
  if (!(u.domain == v.domain)) throw DomainError("constraint_path: fields on different domains");
  const double w = u.domain.cell_volume();
  const auto c = constraint_density(u, B);
  const double N = w * dot(c, u.values);
  const double D = w * dot(c, v.values);
  if (!(std::abs(D) > 1e-12)) throw PreconditionError("constraint_path: int b(u) v vanishes");
  if (eps == 0.0) return 0.0;
  const double target = constraint_integral(u, B);
  auto F = [&](double delta) {
    double s = 0.0;
    for (std::size_t j = 0; j < u.values.size(); ++j) s += B((1.0 - eps) * u.values[j] + delta * v.values[j]);
    return s * w - target;
  };
  // F is convex in delta; the branch through delta(0) = 0 is the root between 0 and the
  // first sign change along the linearized guess.
  const double guess = eps * N / D;
  double a = 0.0, b = guess, fa = F(a), fb = F(b);
  int doublings = 0;
  while (!(fa * fb <= 0.0)) {
    if (++doublings > 8) throw ConvergenceError("constraint_path: no sign change after 8 bracket doublings", {guess});
    a = b;
    fa = fb;
    b *= 2.0;
    fb = F(b);
  }
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  // Illinois variant of regula falsi.
  int side = 0;
  double x = b;
  for (int it = 0; it < 300; ++it) {
    x = (a * fb - b * fa) / (fb - fa);
    const double fx = F(x);
    if (fx == 0.0 || std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b)))
      break;
    if (fx * fb < 0.0) {
      a = b;
      fa = fb;
      b = x;
      fb = fx;
      side = 0;
    } else {
      b = x;
      fb = fx;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
  }
  return x;
}

Field initial_guess(const Problem& p, const SolverConfig& cfg) {
  const auto& ext = p.domain.extents();
  Field u = Field::from_function(p.domain, [&](std::span<const double> x) {
    double v = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) v *= std::sin(std::numbers::pi * x[i] / ext[i]);
    return v;
  });
  if (cfg.initial_guess == "random") {
    Rng rng(cfg.seed);
    for (double& v : u.values) v *= 0.5 + rng.uniform();
  } else if (cfg.initial_guess != "sine") {
    throw DomainError("initial_guess: unknown kind '" + cfg.initial_guess + "'");
  }
  return project_to_constraint(u, p.B, p.r, cfg.tol_constraint);
}

SolveResult minimize(const Problem& p, const SolverConfig& cfg) {
  if (!(p.r > 0.0)) throw DomainError("minimize: r must be positive");
  if (p.phi.dim() != p.domain.dim()) throw DomainError("minimize: Phi and domain dimensions differ");
  if (!(cfg.tol_energy > 0.0 && cfg.tol_residual > 0.0 && cfg.tol_constraint > 0.0))
    throw DomainError("minimize: tolerances must be positive");

  SolveResult res;
  res.gate = cfg.growth_gate ? check_growth_gate(p.phi, p.B) : GrowthGate{GateStatus::Unrestricted, "gate disabled"};
  if (res.gate.status == GateStatus::Violated) throw PreconditionError("minimize: growth gate: " + res.gate.note);

  const double hn = p.domain.cell_volume();
  Field u = initial_guess(p, cfg);
  double E = energy(u, p.phi);
  res.energy_trace.push_back(E);
  res.constraint_trace.push_back(std::abs(constraint_integral(u, p.B) - p.r) / p.r);

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool factored = false;
  double last_drop = kInf, t_prev = 1.0, residual = kInf;
  res.status = SolveStatus::MaxIterations;
  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    const Field g = energy_gradient(u, p.phi);
    const auto c = constraint_density(u, p.B);
    double den = dot(c, u.values);
    const double lambda = den > 0.0 ? dot(g.values, u.values) / den : 0.0;
    residual = residual_only(u, g.values, c, lambda);
    if (last_drop < cfg.tol_energy * (1.0 + E) && residual < cfg.tol_residual) {
      res.status = SolveStatus::Converged;
      break;
    }

    std::vector<double> pg = g.values, pcv = c;
    if (cfg.preconditioner != Preconditioner::None) {
      if (cfg.preconditioner == Preconditioner::Secant || !factored) {
        const auto K = weighted_laplacian(p.domain, cell_weights(u, p.phi, cfg.preconditioner));
        if (!factored) ldlt.analyzePattern(K);
        ldlt.factorize(K);
        factored = true;
        if (ldlt.info() != Eigen::Success) throw InvariantError("minimize: preconditioner factorization failed");
      }
      const auto m = static_cast<Eigen::Index>(pg.size());
      Eigen::VectorXd gv = ldlt.solve(Eigen::Map<const Eigen::VectorXd>(g.values.data(), m));
      Eigen::VectorXd cv = ldlt.solve(Eigen::Map<const Eigen::VectorXd>(c.data(), m));
      pg.assign(gv.data(), gv.data() + m);
      pcv.assign(cv.data(), cv.data() + m);
    }
    // Direction tangent to the constraint: <c, d> = 0.
    const double cc = dot(c, pcv);
    const double mu = cc > 0.0 ? dot(c, pg) / cc : 0.0;
    Field d = u;
    for (std::size_t j = 0; j < d.values.size(); ++j) d.values[j] = -(pg[j] - mu * pcv[j]);
    const double slope = hn * dot(g.values, d.values);
    if (!(slope < 0.0)) {
      res.status = residual < cfg.tol_residual ? SolveStatus::Converged : SolveStatus::Stalled;
      break;
    }

    double t = std::min(1.0, 2.0 * t_prev);
    bool accepted = false;
    Field trial = u;
    double E_trial = E;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      for (std::size_t j = 0; j < trial.values.size(); ++j) trial.values[j] = u.values[j] + t * d.values[j];
      if (std::any_of(trial.values.begin(), trial.values.end(), [](double v) { return v != 0.0; })) {
        trial = project_to_constraint(trial, p.B, p.r, cfg.tol_constraint);
        E_trial = energy(trial, p.phi);
        if (E_trial <= E + cfg.armijo_c1 * t * slope) {
          accepted = true;
          break;
        }
      }
      t *= cfg.backtrack;
    }
    if (!accepted) {
      res.status = residual < cfg.tol_residual ? SolveStatus::Converged : SolveStatus::Stalled;
      break;
    }
    last_drop = E - E_trial;
    u = std::move(trial);
    E = E_trial;
    t_prev = t;
    res.energy_trace.push_back(E);
    res.constraint_trace.push_back(std::abs(constraint_integral(u, p.B) - p.r) / p.r);
  }

  res.iterations = it;
  res.energy = E;
  res.lambda = lagrange_multiplier(u, p.phi, p.B);
  const auto wr = weak_residual(u, res.lambda, p.phi, p.B);
  res.weak_residual = wr.residual;
  res.conjugate_modular_phi = wr.conjugate_modular_phi;
  res.conjugate_modular_b = wr.conjugate_modular_b;
  res.constraint_error = std::abs(constraint_integral(u, p.B) - p.r);
  res.u = std::move(u);
  return res;
}

}  // namespace aniso
