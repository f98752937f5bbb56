// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "aniso/config.hpp"
#include "aniso/experiment.hpp"
#include "aniso/grid.hpp"
#include "aniso/sobolev.hpp"
#include "aniso/solver.hpp"
#include "aniso/young1d.hpp"
#include "aniso/youngnd.hpp"

using namespace aniso;
namespace fs = std::filesystem;

namespace {

const double kPi = std::numbers::pi;
const double kE = std::numbers::e;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<NFunction> nd_families() {
  return {families::quadratic(2), families::anisotropic_power_log({1.5, 1.8}, {1.0, 0.5}, kE),
          families::exp_power_sum({2.0, 1.5}), families::mixed_power_exp({1.5}, 2.0),
          families::two_direction(2.0, 1.5, 1.0, kE)};
}

std::vector<double> random_point(Rng& rng, double radius) {
  std::vector<double> x{rng.normal(), rng.normal()};
  const double s = radius * std::sqrt(rng.uniform()) / std::hypot(x[0], x[1]);
  for (double& v : x) v *= s;
  return x;
}

GradField random_grad(const GridDomain& d, Rng& rng, double scale) {
  GradField g = GradField::zeros(d);
  for (double& v : g.values) v = scale * rng.normal();
  return g;
}

SolverConfig random_start(std::uint64_t seed) {
  SolverConfig c;
  c.initial_guess = "random";
  c.seed = seed;
  return c;
}

// First eigenvalue of -(|u'|u')' = lambda |u| u on (0, 1): RK4 on (u, w = |u'| u') and bisection on lambda.
double shooting_p3() {
  auto end_value = [](double lambda) {
    const int steps = 20000;
    const double h = 1.0 / steps;
    double u = 0.0, w = 1.0;
    auto rhs = [&](double uu, double ww, double& du, double& dw) {
      du = std::copysign(std::sqrt(std::abs(ww)), ww);
      dw = -lambda * std::abs(uu) * uu;
    };
    for (int i = 0; i < steps; ++i) {
      double k1u, k1w, k2u, k2w, k3u, k3w, k4u, k4w;
      rhs(u, w, k1u, k1w);
      rhs(u + 0.5 * h * k1u, w + 0.5 * h * k1w, k2u, k2w);
      rhs(u + 0.5 * h * k2u, w + 0.5 * h * k2w, k3u, k3w);
      rhs(u + h * k3u, w + h * k3w, k4u, k4w);
      u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
      w += h / 6 * (k1w + 2 * k2w + 2 * k3w + k4w);
    }
    return u;
  };
  double lo = 10.0, hi = 100.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (end_value(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

bool invariants_hold(const SolveResult& res, const SolverConfig& cfg, std::string& why) {
  for (std::size_t k = 1; k < res.energy_trace.size(); ++k)
    if (res.energy_trace[k] > res.energy_trace[k - 1]) {
      why = fmt("energy rose at step %.0f", static_cast<double>(k));
      return false;
    }
  for (double c : res.constraint_trace)
    if (c > 1e-8) {
      why = fmt("constraint error %.3g", c);
      return false;
    }
  if (res.status != SolveStatus::Converged || res.weak_residual > 1e-6 || res.weak_residual > cfg.tol_residual) {
    why = std::string("status ") + to_string(res.status) + fmt(", residual %.3g", res.weak_residual);
    return false;
  }
  return true;
}

// ---- criteria ----

Outcome quadratic_benchmark() {
  const auto t0 = std::chrono::steady_clock::now();
  const Problem p{families::quadratic(2), YoungFunction1D::power(2.0), GridDomain::unit(2, 33), 1.0};
  const auto res = minimize(p, random_start(1));
  const double secs = seconds_since(t0);
  const double exact = 2 * kPi * kPi, err = std::abs(res.lambda - exact) / exact;
  return {err <= 0.02 && secs < 60.0 && res.status == SolveStatus::Converged,
          fmt("lambda=%.6f vs 2pi^2=%.6f rel_err=%.2e (tol 2e-2), %.2fs (limit 60s)", res.lambda, exact, err, secs)};
}

Outcome r_invariance() {
  std::vector<double> lam;
  for (double r : {0.5, 1.0, 2.0}) {
    const Problem p{families::quadratic(2), YoungFunction1D::power(2.0), GridDomain::unit(2, 33), r};
    lam.push_back(minimize(p, random_start(2)).lambda);
  }
  const auto [lo, hi] = std::minmax_element(lam.begin(), lam.end());
  const double spread = (*hi - *lo) / *lo;
  return {spread <= 0.01, fmt("lambda(0.5,1,2)=%.6f,%.6f,%.6f spread=%.2e (tol 1e-2)", lam[0], lam[1], lam[2], spread)};
}

Outcome p_laplacian_1d() {
  const double oracle = shooting_p3();
  const auto t0 = std::chrono::steady_clock::now();
  const Problem p{NFunction::separable({YoungFunction1D::power(3.0)}), YoungFunction1D::power(3.0),
                  GridDomain::unit(1, 129), 1.0};
  const auto res = minimize(p, random_start(3));
  const double secs = seconds_since(t0);
  const double err = std::abs(res.lambda - oracle) / oracle;
  return {err <= 0.02 && secs < 10.0 && res.status == SolveStatus::Converged,
          fmt("lambda=%.6f vs shooting=%.6f rel_err=%.2e (tol 2e-2), %.2fs (limit 10s)", res.lambda, oracle, err, secs)};
}

Outcome conjugation_suite() {
  Rng rng(4);
  // Involution on the analytic 1-D families.
  double worst_inv = 0.0;
  for (int family = 0; family < 4; ++family) {
    for (int k = 0; k < 50; ++k) {
      YoungFunction1D B = YoungFunction1D::power(2.0);
      double hi = 1e3;
      switch (family) {
        case 0: B = YoungFunction1D::power(rng.uniform(1.2, 5.0)); break;
        case 1: B = YoungFunction1D::power_log(rng.uniform(1.3, 4.0), rng.uniform(0.0, 2.0), rng.uniform(1.5, 10.0)); break;
        case 2: B = YoungFunction1D::exp_power(rng.uniform(1.1, 3.0)); hi = 3.0; break;
        default: B = YoungFunction1D::exp_linear(rng.uniform(0.5, 2.0)); hi = 30.0; break;
      }
      const auto B2 = B.conjugate().conjugate();
      for (double t : geomspace(1e-3, hi, 20)) worst_inv = std::max(worst_inv, std::abs(B2(t) - B(t)) / B(t));
    }
  }
  // Young gap, its equality case and the gradient sandwich on the n-D families.
  double min_gap = kInf, max_eq = 0.0;
  int sandwich_failures = 0, samples = 0;
  const auto fams = nd_families();
  for (int i = 0; i < 10000; ++i) {
    const auto& phi = fams[static_cast<std::size_t>(i) % fams.size()];
    const auto xi = random_point(rng, 2.0);
    min_gap = std::min(min_gap, young_gap(phi, xi, random_point(rng, 3.0)));
    max_eq = std::max(max_eq, young_gap(phi, xi, phi.gradient(xi)) / (1.0 + phi(xi)));
    sandwich_failures += !gradient_sandwich_check(phi, xi);
    ++samples;
  }
  return {worst_inv <= 1e-6 && min_gap >= -1e-10 && max_eq <= 1e-8 && sandwich_failures == 0,
          fmt("involution max_rel=%.2e (tol 1e-6); gap min=%.2e (floor -1e-10); equality max=%.2e (tol 1e-8); ", worst_inv,
              min_gap, max_eq) +
              fmt("sandwich failures=%.0f of %.0f", sandwich_failures, samples)};
}

Outcome luxemburg_oracle() {
  const GridDomain d = GridDomain::unit(2, 9);
  const auto phi = families::anisotropic_power_log({1.5, 1.8}, {1.0, 0.5}, kE);
  double worst_ind = 0.0;
  for (int axis : {0, 1}) {
    for (int stride : {1, 2, 5}) {
      GradField ind = GradField::zeros(d);
      std::size_t cells = 0;
      for (std::size_t c = 0; c < d.cell_count(); c += static_cast<std::size_t>(stride), ++cells)
        ind.cell(c)[static_cast<std::size_t>(axis)] = 1.0;
      const double G = static_cast<double>(cells) * d.cell_volume();
      // 1 / A_h^{-1}(1 / |G|) with A_h(t) = Phi(t e_h), inverted by plain bisection.
      auto A = [&](double t) {
        std::vector<double> x(2, 0.0);
        x[static_cast<std::size_t>(axis)] = t;
        return phi(x);
      };
      double lo = 0.0, hi = 1.0;
      while (A(hi) < 1 / G) hi *= 2;
      for (int i = 0; i < 200; ++i) (A(0.5 * (lo + hi)) < 1 / G ? lo : hi) = 0.5 * (lo + hi);
      worst_ind = std::max(worst_ind, std::abs(luxemburg_norm(ind, phi) * hi - 1.0));
    }
  }
  Rng rng(5);
  const auto fams = nd_families();
  double worst_hom = 0.0, worst_tri = -kInf;
  for (int i = 0; i < 100; ++i) {
    const auto& f = fams[static_cast<std::size_t>(i) % fams.size()];
    const GradField a = random_grad(d, rng, 0.6), b = random_grad(d, rng, 0.6);
    const double alpha = rng.uniform(-4.0, 4.0);
    GradField sa = a, ab = a;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
      sa.values[k] *= alpha;
      ab.values[k] += b.values[k];
    }
    const double na = luxemburg_norm(a, f), nb = luxemburg_norm(b, f);
    worst_hom = std::max(worst_hom, std::abs(luxemburg_norm(sa, f) - std::abs(alpha) * na) / (std::abs(alpha) * na));
    worst_tri = std::max(worst_tri, luxemburg_norm(ab, f) - na - nb);
  }
  return {worst_ind <= 1e-8 && worst_hom <= 1e-8 && worst_tri <= 1e-10,
          fmt("indicator max_rel=%.2e (tol 1e-8); homogeneity max_rel=%.2e (tol 1e-8); triangle max excess=%.2e", worst_ind,
              worst_hom, worst_tri)};
}

Outcome sup_representation() {
  Rng rng(6);
  const GridDomain d = GridDomain::unit(2, 6);
  double worst = 0.0, above = -kInf;
  for (const auto& phi : nd_families()) {
    for (int i = 0; i < 50; ++i) {
      const auto r = sup_representation_check(random_grad(d, rng, 0.7), phi, 3, rng);
      worst = std::max(worst, (r.rhs - r.lhs_best) / r.rhs);
      above = std::max(above, (r.lhs_best - r.rhs) / r.rhs);
    }
  }
  return {worst <= 1e-6 && above <= 1e-9, fmt("max relative gap=%.2e (tol 1e-6), max overshoot=%.2e", worst, above)};
}

Outcome sobolev_slopes() {
  std::string detail;
  bool ok = true;
  auto slope_of = [](const NFunction& phi, double s_max) {
    SymmetralOptions o;
    o.s_max = s_max;
    return sobolev_slope(sobolev_conjugate(symmetral(phi, 64, o))).slope;
  };
  const double radial = slope_of(NFunction::radial(YoungFunction1D::power(2.0), 3), 1e14);
  ok = ok && std::abs(radial - 6.0) <= 0.05;
  detail += fmt("radial p=2 n=3: %.4f vs 6; ", radial);

  // Power coordinates: pbar* = n pbar / (n - pbar) with 1/pbar = mean of 1/p_i.
  const double pbar = 2.0 / (1 / 1.5 + 1 / 1.8), pstar = 2 * pbar / (2 - pbar);
  const double ex1 = slope_of(families::anisotropic_power_log({1.5, 1.8}, {0.0, 0.0}, 2.0), 1e30);
  ok = ok && std::abs(ex1 - pstar) <= 0.05;
  detail += fmt("power (1.5,1.8): %.4f vs %.4f; ", ex1, pstar);

  const double p = 2.0, q = 1.5, target = 2 * p * q / (p + q - p * q);
  const double ex4 = slope_of(families::two_direction(p, q, 0.01, kE), 1e32);
  ok = ok && std::abs(ex4 - target) <= 0.05;
  detail += fmt("two-direction (2,1.5): %.4f vs %.4f; ", ex4, target);

  const auto ex2 = classify_tail(symmetral(families::exp_power_sum({2.0, 1.5}), 64)).tail;
  ok = ok && ex2 == TailClass::FiniteTail;
  detail += std::string("exp-power tail ") + to_string(ex2) + "; ";

  // Mixed power/exponential in 3-D: infinite tail exactly when sum 1/p_i > 1.
  int mismatches = 0;
  for (const auto& ps : std::vector<std::vector<double>>{{1.5, 1.5}, {1.8, 1.6}, {3.0, 3.0}, {2.5, 4.0}, {1.2, 5.0}}) {
    const bool infinite = 1 / ps[0] + 1 / ps[1] > 1;
    const auto t = classify_tail(symmetral(families::mixed_power_exp(ps, 2.0), 64)).tail;
    mismatches += (t == TailClass::InfiniteTail) != infinite;
  }
  ok = ok && mismatches == 0;
  detail += fmt("mixed power/exp dichotomy mismatches=%.0f of 5", mismatches);
  return {ok, detail};
}

Outcome constraint_path_derivative() {
  Rng rng(8);
  const GridDomain d = GridDomain::unit(2, 7);
  const auto B = YoungFunction1D::power_log(2.5, 1.0, kE);
  auto dot_b = [&](const Field& u, const Field& w) {
    double s = 0.0;
    for (std::size_t j = 0; j < u.values.size(); ++j) s += B.density(std::abs(u.values[j])) * std::copysign(1.0, u.values[j]) * w.values[j];
    return s;
  };
  const double eps = 1e-4;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    // The path through (u, 0) exists at eps = -1e-4 only when int b(u) v is not small against int b(u) u.
    Field u = Field::zeros(d), v = Field::zeros(d);
    do {
      for (double& x : u.values) x = rng.normal();
      for (double& x : v.values) x = rng.normal() + 0.5 * rng.uniform();
    } while (std::abs(dot_b(u, v)) < 0.1 * dot_b(u, u));
    const double expected = dot_b(u, u) / dot_b(u, v);
    const double fd = (constraint_path(u, v, eps, B) - constraint_path(u, v, -eps, B)) / (2 * eps);
    worst = std::max(worst, std::abs(fd - expected) / std::abs(expected));
  }
  // v = u + w with int b(u) w = 0.
  Field u = Field::zeros(d), w = Field::zeros(d);
  for (double& x : u.values) x = rng.normal();
  for (double& x : w.values) x = rng.normal();
  const double proj = dot_b(u, w) / dot_b(u, u);
  Field v = u;
  for (std::size_t j = 0; j < v.values.size(); ++j) v.values[j] += w.values[j] - proj * u.values[j];
  const double unit = (constraint_path(u, v, eps, B) - constraint_path(u, v, -eps, B)) / (2 * eps);
  return {worst <= 1e-4 && std::abs(unit - 1.0) <= 1e-4,
          fmt("max rel error over 20 pairs=%.2e (tol 1e-4); equal-integral case delta'(0)=%.8f", worst, unit)};
}

Outcome solver_invariants() {
  std::string detail;
  bool ok = true;
  int configs = 0;
  for (const auto& entry : fs::directory_iterator(ANISO_CONFIGS)) {
    if (entry.path().extension() != ".cfg") continue;
    const auto cfg = FlatConfig::load(entry.path());
    if (cfg.has("sweep.axis")) continue;
    const auto p = problem_from_config(cfg);
    const auto s = solver_config_from(cfg);
    for (const auto& start : {std::string("sine"), std::string("random")}) {
      SolverConfig sc = s;
      sc.initial_guess = start;
      std::string why;
      const bool good = invariants_hold(minimize(p, sc), sc, why);
      ok = ok && good;
      if (!good) detail += entry.path().filename().string() + "/" + start + ": " + why + "; ";
    }
    ++configs;
  }
  detail += fmt("%.0f configs x 2 starts; ", configs);

  // Three interior nodes: exhaustive search over directions, each scaled onto the constraint.
  const GridDomain d({1.0}, {5});
  const auto phi = NFunction::separable({YoungFunction1D::power_log(2.5, 1.0, kE)});
  const auto B = YoungFunction1D::power(3.0);
  const double r = 0.7;
  const auto res = minimize(Problem{phi, B, d, r});
  auto energy_at = [&](double th, double ph) {
    const Field u{d, {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)}};
    return energy(project_to_constraint(u, B, r, 1e-13), phi);
  };
  double best = kInf, bt = 0, bp = 0;
  const int m = 400;
  for (int i = 0; i <= m; ++i)
    for (int k = 0; k < 2 * m; ++k) {
      const double e = energy_at(kPi * i / m, kPi * k / m);
      if (e < best) {
        best = e;
        bt = kPi * i / m;
        bp = kPi * k / m;
      }
    }
  for (int i = -50; i <= 50; ++i)
    for (int k = -50; k <= 50; ++k) best = std::min(best, energy_at(bt + i * kPi / m / 50, bp + k * kPi / m / 50));
  const double rel = std::abs(res.energy - best) / best;
  ok = ok && rel <= 1e-3;
  detail += fmt("3-node energy=%.8f vs search=%.8f rel=%.2e (tol 1e-3)", res.energy, best, rel);
  return {ok, detail};
}

Outcome refinement_order() {
  const double exact = 2 * kPi * kPi;
  std::vector<double> err;
  for (int nodes : {9, 17, 33}) {
    const Problem p{families::quadratic(2), YoungFunction1D::power(2.0), GridDomain::unit(2, nodes), 1.0};
    err.push_back(std::abs(minimize(p, random_start(10)).lambda - exact));
  }
  const double o1 = std::log2(err[0] / err[1]), o2 = std::log2(err[1] / err[2]);
  return {std::min(o1, o2) >= 1.8,
          fmt("errors %.3e, %.3e, %.3e; ", err[0], err[1], err[2]) + fmt("observed orders %.3f, %.3f (min 1.8)", o1, o2)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"quadratic benchmark h=1/32", quadratic_benchmark},
      {"r-invariance", r_invariance},
      {"1-D p-Laplacian p=3", p_laplacian_1d},
      {"conjugation suite", conjugation_suite},
      {"Luxemburg norm oracle", luxemburg_oracle},
      {"discrete sup representation", sup_representation},
      {"Sobolev-conjugate slopes and tails", sobolev_slopes},
      {"constraint path derivative", constraint_path_derivative},
      {"solver invariants", solver_invariants},
      {"grid-refinement order", refinement_order},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
