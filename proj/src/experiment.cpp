#include "aniso/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <thread>

#include "aniso/error.hpp"
#include "aniso/family_spec.hpp"

namespace aniso {

using nlohmann::json;

int RunReport::failures() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return c.status == "fail"; }));
}

json RunReport::to_json() const {
  json j;
  j["command"] = command;
  j["seed"] = seed;
  j["passed"] = passed();
  j["checks"] = json::array();
  for (const auto& c : checks) {
    j["checks"].push_back({{"name", c.name},
                           {"status", c.status},
                           {"measured", c.measured},
                           {"tolerance", c.tolerance},
                           {"wall_seconds", c.wall_seconds},
                           {"seed", seed}});
  }
  j["outputs"] = outputs;
  return j;
}

void write_report(const RunReport& report, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw DomainError("cannot write " + path.string());
  os << report.to_json().dump(2) << "\n";
}

namespace {

CheckResult verdict(bool ok, json measured, json tolerance) {
  CheckResult c;
  c.status = ok ? "pass" : "fail";
  c.measured = std::move(measured);
  c.tolerance = std::move(tolerance);
  return c;
}

struct Check {
  std::string suite;
  std::string name;
  std::function<CheckResult(Rng&)> run;
};

std::vector<std::pair<std::string, NFunction>> nd_families() {
  const double e = std::numbers::e;
  return {{"quadratic", families::quadratic(2)},
          {"anisotropic-power-log", families::anisotropic_power_log({1.5, 1.8}, {1.0, 0.5}, e)},
          {"exp-power-sum", families::exp_power_sum({2.0, 1.5})},
          {"mixed-power-exp", families::mixed_power_exp({1.5}, 2.0)},
          {"two-direction", families::two_direction(2.0, 1.5, 1.0, e)}};
}

/// A random member of one of the analytic 1-D families with a sampling range.
YoungFunction1D random_family(int kind, Rng& rng, double& lo, double& hi) {
  switch (kind % 4) {
    case 0:
      lo = 1e-3;
      hi = 1e3;
      return YoungFunction1D::power(rng.uniform(1.2, 5.0));
    case 1:
      lo = 1e-3;
      hi = 1e3;
      return YoungFunction1D::power_log(rng.uniform(1.3, 4.0), rng.uniform(0.0, 2.0), rng.uniform(1.5, 10.0));
    case 2:
      lo = 1e-2;
      hi = 3.0;
      return YoungFunction1D::exp_power(rng.uniform(1.2, 3.0));
    default:
      lo = 1e-3;
      hi = 30.0;
      return YoungFunction1D::exp_linear(rng.uniform(0.5, 2.0));
  }
}

std::vector<double> random_point(Rng& rng, int n, double radius) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (double& v : x) v = rng.uniform(-radius, radius);
  return x;
}

GradField random_grad_field(const GridDomain& d, Rng& rng, double scale) {
  GradField g = GradField::zeros(d);
  for (double& v : g.values) v = scale * rng.normal();
  return g;
}

std::vector<Check> registry() {
  std::vector<Check> checks;

  // ---- young ----
  checks.push_back({"young", "young.involution", [](Rng& rng) {
                      double worst = 0.0;
                      for (int k = 0; k < 40; ++k) {
                        double lo = 0, hi = 0;
                        const auto B = random_family(k, rng, lo, hi);
                        const auto B2 = B.conjugate().conjugate();
                        for (double t : geomspace(lo, hi, 20))
                          worst = std::max(worst, std::abs(B2(t) - B(t)) / std::max(1.0, B(t)));
                      }
                      return verdict(worst <= 1e-6, {{"max_rel_error", worst}}, {{"rel", 1e-6}});
                    }});
  checks.push_back({"young", "young.inequality", [](Rng& rng) {
                      double min_gap = kInf, max_eq_gap = 0.0;
                      for (int k = 0; k < 40; ++k) {
                        double lo = 0, hi = 0;
                        const auto B = random_family(k, rng, lo, hi);
                        const auto Bc = B.conjugate();
                        for (int i = 0; i < 50; ++i) {
                          const double t = std::exp(rng.uniform(std::log(lo), std::log(hi)));
                          const double s = B.density(std::exp(rng.uniform(std::log(lo), std::log(hi))));
                          min_gap = std::min(min_gap, (B(t) + Bc(s) - s * t) / (1.0 + B(t) + Bc(s)));
                          const double sb = B.density(t);
                          max_eq_gap = std::max(max_eq_gap, std::abs(B(t) + Bc(sb) - sb * t) / (1.0 + B(t)));
                        }
                      }
                      return verdict(min_gap >= -1e-10 && max_eq_gap <= 1e-8,
                                     {{"min_gap", min_gap}, {"max_equality_gap", max_eq_gap}},
                                     {{"gap_floor", -1e-10}, {"equality", 1e-8}});
                    }});
  checks.push_back({"young", "young.inverse", [](Rng& rng) {
                      double worst = 0.0;
                      for (int k = 0; k < 40; ++k) {
                        double lo = 0, hi = 0;
                        const auto B = random_family(k, rng, lo, hi);
                        for (double t : geomspace(lo, hi, 20)) worst = std::max(worst, std::abs(B.inverse(B(t)) - t) / t);
                      }
                      return verdict(worst <= 1e-8, {{"max_rel_error", worst}}, {{"rel", 1e-8}});
                    }});
  checks.push_back({"young", "young.lin", [](Rng& rng) {
                      double worst = -kInf;
                      for (int k = 0; k < 40; ++k) {
                        double lo = 0, hi = 0;
                        const auto B = random_family(k, rng, lo, hi);
                        for (int i = 0; i < 100; ++i) {
                          const double t = rng.uniform(0.0, hi), h = rng.uniform();
                          worst = std::max(worst, B(h * t) - h * B(t) - 1e-12 * (1.0 + B(t)));
                        }
                      }
                      return verdict(worst <= 1e-12, {{"max_excess", worst}}, {{"abs", 1e-12}});
                    }});
  checks.push_back({"young", "young.delta2", [](Rng&) {
                      const auto pw = delta2_check(YoungFunction1D::power(3.0), 1.0, 1e6);
                      const auto ex = delta2_check(YoungFunction1D::exp_power(2.0), 1.0, 20.0);
                      const bool ok = pw.holds && std::abs(pw.c_est - 8.0) < 1e-9 && !ex.holds;
                      return verdict(ok, {{"power3_holds", pw.holds}, {"power3_c", pw.c_est}, {"exp2_holds", ex.holds}},
                                     {{"power3_c", 8.0}});
                    }});
  checks.push_back({"young", "young.growth", [](Rng&) {
                      const auto t2 = YoungFunction1D::power(2.0, 1.0), t3 = YoungFunction1D::power(3.0, 1.0);
                      const bool slower = grows_essentially_slower(t2, t3, {0.5, 1.0, 10.0});
                      const bool same = grows_essentially_slower(t3, t3, {2.0});
                      return verdict(slower && !same, {{"t2_vs_t3", slower}, {"t3_vs_t3", same}}, json::object());
                    }});

  // ---- youngnd ----
  checks.push_back({"youngnd", "youngnd.diagnostics", [](Rng& rng) {
                      json m;
                      bool ok = true;
                      for (const auto& [name, phi] : nd_families()) {
                        const auto d = validate_nfunction(phi, rng, 200);
                        m[name] = {{"ok", d.ok()}, {"max_gradient_error", d.max_gradient_error}};
                        ok = ok && d.ok();
                      }
                      return verdict(ok, m, {{"gradient_rel", 1e-5}});
                    }});
  checks.push_back({"youngnd", "youngnd.young_gap", [](Rng& rng) {
                      double min_gap = kInf, max_eq = 0.0;
                      for (const auto& [name, phi] : nd_families()) {
                        for (int i = 0; i < 100; ++i) {
                          const auto xi = random_point(rng, 2, 2.0);
                          const auto eta = phi.gradient(xi);
                          max_eq = std::max(max_eq, young_gap(phi, xi, eta) / (1.0 + phi(xi)));
                          min_gap = std::min(min_gap, young_gap(phi, xi, random_point(rng, 2, 3.0)));
                        }
                      }
                      return verdict(min_gap >= -1e-10 && max_eq <= 1e-8, {{"min_gap", min_gap}, {"max_equality_gap", max_eq}},
                                     {{"gap_floor", -1e-10}, {"equality", 1e-8}});
                    }});
  checks.push_back({"youngnd", "youngnd.sandwich", [](Rng& rng) {
                      int failures = 0;
                      for (const auto& [name, phi] : nd_families())
                        for (int i = 0; i < 100; ++i) failures += !gradient_sandwich_check(phi, random_point(rng, 2, 2.0));
                      return verdict(failures == 0, {{"failures", failures}}, {{"abs", 1e-9}});
                    }});
  checks.push_back({"youngnd", "youngnd.separable_conjugate", [](Rng& rng) {
                      double worst = 0.0;
                      for (const auto& [name, phi] : nd_families()) {
                        if (!phi.has_analytic_conjugate()) continue;
                        for (int i = 0; i < 50; ++i) {
                          const auto eta = random_point(rng, 2, 3.0);
                          const double a = phi.analytic_conjugate(eta), b = conjugate_nd_numeric(phi, eta).value;
                          worst = std::max(worst, std::abs(a - b) / std::max(1e-12, std::abs(a)));
                        }
                      }
                      return verdict(worst <= 1e-6, {{"max_rel_diff", worst}}, {{"rel", 1e-6}});
                    }});
  checks.push_back({"youngnd", "youngnd.minorant", [](Rng& rng) {
                      double worst = -kInf;
                      for (const auto& [name, phi] : nd_families()) {
                        const auto m = radial_minorant(phi, 128, 64);
                        for (int i = 0; i < 200; ++i) {
                          auto x = random_point(rng, 2, 3.0);
                          worst = std::max(worst, m(std::hypot(x[0], x[1])) - phi(x) - 1e-6 * (1.0 + phi(x)));
                        }
                      }
                      return verdict(worst <= 0.0, {{"max_excess", worst}}, {{"slack_rel", 1e-6}});
                    }});
  checks.push_back({"youngnd", "youngnd.convexify", [](Rng& rng) {
                      int failures = 0;
                      const double c = 1.0;
                      for (const auto& [name, phi] : nd_families()) {
                        const auto psi = strictly_convexify(phi, c);
                        for (int i = 0; i < 100; ++i) {
                          auto x = random_point(rng, 2, 2.0);
                          std::vector<double> y{(1 + c) * x[0], (1 + c) * x[1]};
                          const double v = psi(x);
                          failures += !(phi(x) <= v + 1e-12 && v <= phi(y) * (1 + 1e-12) + 1e-12);
                        }
                      }
                      return verdict(failures == 0, {{"failures", failures}}, json::object());
                    }});

  // ---- sobolev ----
  checks.push_back({"sobolev", "sobolev.radial_fixed_point", [](Rng&) {
                      const auto prof = YoungFunction1D::power(3.0);
                      const auto p = symmetral(NFunction::radial(prof, 2), 64);
                      double worst = 0.0;
                      for (double s : geomspace(1e-6, 1e6, 40)) worst = std::max(worst, std::abs(p(s) / prof(s) - 1.0));
                      return verdict(worst <= 1e-3, {{"max_rel_error", worst}}, {{"rel", 1e-3}});
                    }});
  checks.push_back({"sobolev", "sobolev.slope_p2_n3", [](Rng&) {
                      SymmetralOptions o;
                      o.s_max = 1e14;
                      const auto conj = sobolev_conjugate(symmetral(NFunction::radial(YoungFunction1D::power(2.0), 3), 64, o));
                      const double slope = sobolev_slope(conj).slope;
                      return verdict(std::abs(slope - 6.0) <= 0.05, {{"slope", slope}}, {{"expected", 6.0}, {"abs", 0.05}});
                    }});
  checks.push_back({"sobolev", "sobolev.exp_finite_tail", [](Rng&) {
                      const auto t = classify_tail(symmetral(families::exp_power_sum({2.0, 1.5}), 64));
                      return verdict(t.tail == TailClass::FiniteTail, {{"tail", to_string(t.tail)}, {"exponent", t.exponent}},
                                     json::object());
                    }});
  checks.push_back({"sobolev", "sobolev.monotone_convex", [](Rng&) {
                      const auto conj = sobolev_conjugate(symmetral(families::anisotropic_power_log({1.5, 1.8}, {0.0, 0.0}, 2.0), 64));
                      const auto hs = conj.h_values();
                      bool mono = hs.front() >= 0.0;
                      for (std::size_t k = 1; k < hs.size(); ++k) mono = mono && hs[k] >= hs[k - 1];
                      bool convex = true;
                      const auto ts = geomspace(hs.front(), hs.back(), 60);
                      for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
                        const double a = ts[k], b = ts[k + 1];
                        convex = convex && conj(0.5 * (a + b)) <= 0.5 * (conj(a) + conj(b)) * (1 + 1e-9);
                      }
                      return verdict(mono && convex, {{"H_monotone", mono}, {"phi_n_convex", convex}}, json::object());
                    }});

  // ---- grid ----
  checks.push_back({"grid", "grid.adjoint", [](Rng& rng) {
                      const GridDomain d({1.0, 2.0}, {9, 13});
                      Field u = Field::zeros(d);
                      for (double& v : u.values) v = rng.normal();
                      const GradField w = random_grad_field(d, rng, 1.0);
                      const double lhs = inner(gradient(u), w), rhs = -inner(u, divergence(w));
                      const double err = std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
                      return verdict(err <= 1e-12, {{"rel_error", err}}, {{"rel", 1e-12}});
                    }});
  checks.push_back({"grid", "grid.indicator_norm", [](Rng&) {
                      const GridDomain d({1.0, 1.0}, {11, 11});
                      const auto phi = families::anisotropic_power_log({1.5, 1.8}, {1.0, 0.5}, std::numbers::e);
                      GradField u = GradField::zeros(d);
                      std::size_t cells = 0;
                      for (std::size_t c = 0; c < d.cell_count(); c += 3, ++cells) u.cell(c)[1] = 1.0;
                      const double G = static_cast<double>(cells) * d.cell_volume();
                      const auto axis = std::get<SeparableSum>(phi.structure()).terms[1];
                      const double expected = 1.0 / axis.inverse(1.0 / G);
                      const double got = luxemburg_norm(u, phi);
                      const double err = std::abs(got - expected) / expected;
                      return verdict(err <= 1e-8, {{"norm", got}, {"expected", expected}}, {{"rel", 1e-8}});
                    }});
  checks.push_back({"grid", "grid.norm_axioms", [](Rng& rng) {
                      const GridDomain d({1.0, 1.0}, {7, 7});
                      const auto phi = families::exp_power_sum({2.0, 1.5});
                      double hom = 0.0, tri = -kInf;
                      for (int i = 0; i < 20; ++i) {
                        const GradField a = random_grad_field(d, rng, 0.5), b = random_grad_field(d, rng, 0.5);
                        const double alpha = rng.uniform(-3.0, 3.0);
                        GradField sa = a, ab = a;
                        for (std::size_t k = 0; k < a.values.size(); ++k) {
                          sa.values[k] *= alpha;
                          ab.values[k] += b.values[k];
                        }
                        const double na = luxemburg_norm(a, phi);
                        hom = std::max(hom, std::abs(luxemburg_norm(sa, phi) - std::abs(alpha) * na) / (std::abs(alpha) * na));
                        tri = std::max(tri, luxemburg_norm(ab, phi) - na - luxemburg_norm(b, phi));
                      }
                      return verdict(hom <= 1e-8 && tri <= 1e-8, {{"homogeneity", hom}, {"triangle_excess", tri}},
                                     {{"rel", 1e-8}, {"abs", 1e-8}});
                    }});
  checks.push_back({"grid", "grid.sup_representation", [](Rng& rng) {
                      const GridDomain d({1.0, 1.0}, {6, 6});
                      double worst = 0.0;
                      for (const auto& [name, phi] : nd_families()) {
                        const GradField v = random_grad_field(d, rng, 0.7);
                        const auto r = sup_representation_check(v, phi, 4, rng);
                        worst = std::max(worst, (r.rhs - r.lhs_best) / (1.0 + r.rhs));
                      }
                      return verdict(worst <= 1e-6 && worst >= -1e-9, {{"max_rel_gap", worst}}, {{"rel", 1e-6}});
                    }});
  checks.push_back({"grid", "grid.holder", [](Rng& rng) {
                      const GridDomain d({1.0, 1.0}, {5, 5});
                      int failures = 0;
                      for (const auto& [name, phi] : nd_families()) {
                        if (!phi.has_analytic_conjugate()) continue;
                        for (int i = 0; i < 5; ++i)
                          failures += !holder_check(random_grad_field(d, rng, 1.0), random_grad_field(d, rng, 1.0), phi).holds;
                      }
                      return verdict(failures == 0, {{"failures", failures}}, {{"rel", 1e-9}});
                    }});

  // ---- solver ----
  checks.push_back({"solver", "solver.quadratic_h16", [](Rng&) {
                      const Problem p{families::quadratic(2), YoungFunction1D::power(2.0), GridDomain::unit(2, 17), 1.0};
                      SolverConfig cfg;
                      cfg.growth_gate = false;
                      const auto res = minimize(p, cfg);
                      const double target = 2.0 * std::numbers::pi * std::numbers::pi;
                      const double err = std::abs(res.lambda - target) / target;
                      return verdict(err <= 0.02 && res.status == SolveStatus::Converged,
                                     {{"lambda", res.lambda}, {"status", to_string(res.status)}, {"weak_residual", res.weak_residual}},
                                     {{"rel", 0.02}});
                    }});
  checks.push_back({"solver", "solver.constraint_path", [](Rng& rng) {
                      const GridDomain d({1.0}, {12});
                      const auto B = YoungFunction1D::power_log(2.5, 1.0, std::numbers::e);
                      double worst = 0.0;
                      for (int i = 0; i < 10; ++i) {
                        Field u = Field::zeros(d), v = Field::zeros(d);
                        for (double& x : u.values) x = rng.uniform(0.2, 2.0);
                        for (double& x : v.values) x = rng.uniform(0.2, 2.0);
                        const double eps = 1e-4;
                        const double slope = (constraint_path(u, v, eps, B) - constraint_path(u, v, -eps, B)) / (2 * eps);
                        double N = 0, D = 0;
                        for (std::size_t j = 0; j < u.values.size(); ++j) {
                          N += B.derivative(u.values[j]) * u.values[j];
                          D += B.derivative(u.values[j]) * v.values[j];
                        }
                        worst = std::max(worst, std::abs(slope - N / D) / std::abs(N / D));
                      }
                      return verdict(worst <= 1e-4, {{"max_rel_error", worst}}, {{"rel", 1e-4}});
                    }});
  checks.push_back({"solver", "solver.invariants", [](Rng&) {
                      const Problem p{NFunction::separable({YoungFunction1D::power(3.0)}), YoungFunction1D::power(3.0),
                                      GridDomain::unit(1, 33), 1.0};
                      SolverConfig cfg;
                      const auto res = minimize(p, cfg);
                      bool mono = true;
                      for (std::size_t k = 1; k < res.energy_trace.size(); ++k)
                        mono = mono && res.energy_trace[k] <= res.energy_trace[k - 1];
                      const double worst_c = *std::max_element(res.constraint_trace.begin(), res.constraint_trace.end());
                      const bool ok = mono && worst_c <= 1e-8 && res.weak_residual <= 1e-6;
                      return verdict(ok, {{"energy_monotone", mono}, {"max_constraint_error", worst_c}, {"weak_residual", res.weak_residual}},
                                     {{"constraint_rel", 1e-8}, {"residual", 1e-6}});
                    }});
  return checks;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<std::string> suite_checks(const std::string& suite) {
  static const std::vector<std::string> known{"young", "youngnd", "sobolev", "grid", "solver", "all"};
  if (std::find(known.begin(), known.end(), suite) == known.end())
    throw ConfigError("unknown suite '" + suite + "' (expected young, youngnd, sobolev, grid, solver or all)");
  std::vector<std::string> names;
  for (const auto& c : registry())
    if (suite == "all" || c.suite == suite) names.push_back(c.name);
  return names;
}

RunReport run_verify(const std::string& suite, std::uint64_t seed) {
  suite_checks(suite);
  RunReport report;
  report.command = "verify --suite " + suite;
  report.seed = seed;
  std::uint64_t stream = 0;
  for (const auto& c : registry()) {
    ++stream;
    if (suite != "all" && c.suite != suite) continue;
    Rng rng(derive_seed(seed, stream));
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = c.run(rng);
    } catch (const InconclusiveError& e) {
      r.status = "inconclusive";
      r.measured = {{"error", e.what()}, {"exponent", e.exponent()}, {"r2", e.r2()}};
    } catch (const std::exception& e) {
      r.status = "fail";
      r.measured = {{"error", e.what()}};
    }
    r.name = c.name;
    r.wall_seconds = seconds_since(t0);
    report.checks.push_back(std::move(r));
  }
  return report;
}

Problem problem_from_config(const FlatConfig& cfg) {
  const auto ext = cfg.get_list("domain.extents");
  const auto nodes_d = cfg.get_list("domain.nodes");
  std::vector<int> nodes;
  for (double v : nodes_d) nodes.push_back(static_cast<int>(v));
  if (nodes.size() == 1 && ext.size() > 1) nodes.assign(ext.size(), nodes[0]);
  GridDomain domain;
  try {
    domain = GridDomain(ext, nodes);
  } catch (const DomainError& e) {
    throw ConfigError(cfg.source() + ": domain: " + e.what());
  }
  const int n = domain.dim();
  NFunction phi = parse_nfunction(cfg.get("phi"), n);
  if (phi.dim() != n)
    throw ConfigError(cfg.source() + ":" + std::to_string(cfg.line_of("phi")) + ": phi has dimension " +
                      std::to_string(phi.dim()) + " but the domain has " + std::to_string(n));
  YoungFunction1D B = parse_young(cfg.get("b"));
  const double r = cfg.get_double_or("r", 1.0);
  if (!(r > 0.0)) throw ConfigError(cfg.source() + ": key 'r': must be positive");
  return Problem{std::move(phi), std::move(B), std::move(domain), r};
}

SolverConfig solver_config_from(const FlatConfig& cfg) {
  SolverConfig s;
  s.tol_energy = cfg.get_double_or("tol.energy", s.tol_energy);
  s.tol_residual = cfg.get_double_or("tol.residual", s.tol_residual);
  s.tol_constraint = cfg.get_double_or("tol.constraint", s.tol_constraint);
  s.max_iterations = cfg.get_int_or("max_iters", s.max_iterations);
  s.seed = static_cast<std::uint64_t>(cfg.get_int_or("seed", static_cast<int>(s.seed)));
  s.initial_guess = cfg.get_or("initial_guess", s.initial_guess);
  const std::string pc = cfg.get_or("preconditioner", "secant");
  if (pc == "none") {
    s.preconditioner = Preconditioner::None;
  } else if (pc == "laplacian") {
    s.preconditioner = Preconditioner::Laplacian;
  } else if (pc == "secant") {
    s.preconditioner = Preconditioner::Secant;
  } else {
    throw ConfigError(cfg.source() + ": key 'preconditioner': expected none, laplacian or secant");
  }
  const std::string gate = cfg.get_or("gate", "on");
  if (gate != "on" && gate != "off") throw ConfigError(cfg.source() + ": key 'gate': expected on or off");
  s.growth_gate = gate == "on";
  if (!(s.tol_energy > 0 && s.tol_residual > 0 && s.tol_constraint > 0))
    throw ConfigError(cfg.source() + ": tolerances must be positive");
  return s;
}

namespace {

void add_solve_checks(RunReport& report, const SolveResult& res, const Problem& p, const SolverConfig& s,
                      const FlatConfig& cfg) {
  bool mono = true;
  for (std::size_t k = 1; k < res.energy_trace.size(); ++k) mono = mono && res.energy_trace[k] <= res.energy_trace[k - 1];
  const double worst_c = *std::max_element(res.constraint_trace.begin(), res.constraint_trace.end());
  report.checks.push_back(verdict(res.status == SolveStatus::Converged, {{"status", to_string(res.status)}}, json::object()));
  report.checks.back().name = "solve.converged";
  report.checks.push_back(verdict(mono, {{"accepted_steps", res.energy_trace.size()}}, json::object()));
  report.checks.back().name = "solve.energy_monotone";
  report.checks.push_back(verdict(worst_c <= s.tol_constraint, {{"max_constraint_error_rel", worst_c}},
                                  {{"rel", s.tol_constraint}}));
  report.checks.back().name = "solve.constraint";
  report.checks.push_back(verdict(res.weak_residual <= s.tol_residual, {{"weak_residual", res.weak_residual}},
                                  {{"abs", s.tol_residual}}));
  report.checks.back().name = "solve.weak_residual";
  if (cfg.has("expect.lambda")) {
    const double target = cfg.get_double("expect.lambda");
    const double tol = cfg.get_double_or("expect.rel_tol", 0.02);
    const double err = std::abs(res.lambda - target) / std::abs(target);
    report.checks.push_back(verdict(err <= tol, {{"lambda", res.lambda}, {"rel_error", err}}, {{"expected", target}, {"rel", tol}}));
    report.checks.back().name = "solve.lambda";
  }
  (void)p;
}

json solve_outputs(const SolveResult& res) {
  return {{"lambda", res.lambda},
          {"energy", res.energy},
          {"constraint_error", res.constraint_error},
          {"weak_residual", res.weak_residual},
          {"iterations", res.iterations},
          {"status", to_string(res.status)},
          {"gate", to_string(res.gate.status)},
          {"gate_note", res.gate.note},
          {"conjugate_modular_phi", res.conjugate_modular_phi},
          {"conjugate_modular_b", res.conjugate_modular_b}};
}

}  // namespace

RunReport run_solve(const FlatConfig& cfg, const std::filesystem::path& out_dir) {
  const Problem p = problem_from_config(cfg);
  const SolverConfig s = solver_config_from(cfg);
  RunReport report;
  report.command = "solve";
  report.seed = s.seed;
  const auto t0 = std::chrono::steady_clock::now();
  const SolveResult res = minimize(p, s);
  add_solve_checks(report, res, p, s, cfg);
  for (auto& c : report.checks) c.wall_seconds = seconds_since(t0);
  report.outputs = solve_outputs(res);
  report.outputs["phi"] = p.phi.describe();
  report.outputs["b"] = p.B.describe();
  report.outputs["r"] = p.r;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_csv(res.u, out_dir / "u.csv");
    write_binary(res.u, out_dir / "u.bin");
    write_report(report, out_dir / "report.json");
  }
  return report;
}

RunReport run_sobolev(const std::string& phi_spec, int n, const std::filesystem::path& csv, const SobolevRunOptions& o) {
  const NFunction phi = parse_nfunction(phi_spec, n);
  RunReport report;
  report.command = "sobolev-conjugate";
  report.seed = o.symmetral.seed;
  const auto t0 = std::chrono::steady_clock::now();
  const auto profile = symmetral(phi, o.knots, o.symmetral);
  json side{{"phi", phi.describe()},
            {"n", phi.dim()},
            {"volume_method", to_string(profile.method())},
            {"mc_seed", profile.seed()},
            {"knots", profile.table().size()}};
  const auto zero = check_zero_condition(profile);
  side["zero_condition"] = zero.holds;
  side["zero_exponent"] = zero.exponent;
  side["zero_r2"] = zero.r2;
  const auto tail = classify_tail(profile);
  side["tail"] = to_string(tail.tail);
  side["tail_exponent"] = tail.exponent;
  side["tail_r2"] = tail.r2;
  CheckResult zc = verdict(zero.holds, {{"exponent", zero.exponent}}, {{"margin", 0.05}});
  zc.name = "sobolev.zero_condition";
  zc.wall_seconds = seconds_since(t0);
  report.checks.push_back(zc);

  if (zero.holds) {
    const auto conj = sobolev_conjugate(profile);
    side["h_infinity"] = std::isfinite(conj.h_infinity()) ? json(conj.h_infinity()) : json("inf");
    try {
      side["slope_1e2_1e4"] = sobolev_slope(conj).slope;
    } catch (const std::exception&) {
      side["slope_1e2_1e4"] = nullptr;
    }
    if (!csv.empty()) {
      if (csv.has_parent_path()) std::filesystem::create_directories(csv.parent_path());
      std::ofstream os(csv);
      if (!os) throw DomainError("cannot write " + csv.string());
      os << "t,H,phi_n\n" << std::setprecision(17);
      const auto hs = conj.h_values();
      const double hi = std::isfinite(conj.h_infinity()) ? std::min(hs.back(), 0.999 * conj.h_infinity()) : hs.back();
      for (double t : geomspace(hs.front(), hi, o.rows)) os << t << "," << conj.H(t) << "," << conj(t) << "\n";
    }
  }
  report.outputs = side;
  if (!csv.empty()) {
    std::ofstream js(csv.string() + ".json");
    js << side.dump(2) << "\n";
  }
  return report;
}

RunReport run_conjugate(const std::string& spec, int n, const std::vector<double>& at) {
  RunReport report;
  report.command = "conjugate";
  const bool one_d = spec.find('[') == std::string::npos && spec != "quadratic";
  if (one_d) {
    if (at.size() != 1) throw ConfigError("conjugate: a 1-D spec takes a single --at value");
    const auto B = parse_young(spec);
    report.outputs = {{"spec", B.describe()}, {"at", at[0]}, {"value", B.conjugate()(at[0])}};
  } else {
    const auto phi = parse_nfunction(spec, n);
    if (static_cast<int>(at.size()) != phi.dim()) throw ConfigError("conjugate: --at must have one value per dimension");
    if (phi.has_analytic_conjugate()) {
      report.outputs = {{"spec", phi.describe()}, {"at", at}, {"value", phi.analytic_conjugate(at)}, {"method", "analytic"}};
    } else {
      const auto c = conjugate_nd_numeric(phi, at);
      report.outputs = {{"spec", phi.describe()}, {"at", at},        {"value", c.value},
                        {"argmax", c.argmax},     {"residual", c.residual}, {"method", "numeric"}};
    }
  }
  return report;
}

namespace {

std::string substitute(std::string s, const std::string& value) {
  for (auto pos = s.find("{x}"); pos != std::string::npos; pos = s.find("{x}", pos + value.size()))
    s.replace(pos, 3, value);
  return s;
}

std::string format_value(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

struct SweepRow {
  double axis = 0.0;
  double lambda = 0.0, energy = 0.0, residual = 0.0, slope = 0.0, h = 0.0;
  int iterations = 0;
  std::string status, tail, error;
};

}  // namespace

RunReport run_sweep(const FlatConfig& cfg, const std::filesystem::path& out_dir, int workers) {
  const std::string axis = cfg.get("sweep.axis");
  const std::string kind = cfg.get_or("sweep.kind", "solve");
  if (axis != "r" && axis != "nodes" && axis != "param") throw ConfigError(cfg.source() + ": sweep.axis must be r, nodes or param");
  if (kind != "solve" && kind != "sobolev") throw ConfigError(cfg.source() + ": sweep.kind must be solve or sobolev");
  if (kind == "sobolev" && axis != "param") throw ConfigError(cfg.source() + ": sobolev sweeps run over sweep.axis = param");
  const auto values = cfg.get_list("sweep.values");
  // Validate the base point before spawning workers.
  if (kind == "solve" && axis != "param") problem_from_config(cfg);
  solver_config_from(cfg);

  RunReport report;
  report.command = "sweep";
  report.seed = static_cast<std::uint64_t>(cfg.get_int_or("seed", 1));
  std::vector<SweepRow> rows(values.size());
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      SweepRow& row = rows[i];
      row.axis = values[i];
      try {
        FlatConfig point = cfg;
        if (axis == "r") point.set("r", format_value(values[i]));
        if (axis == "nodes") point.set("domain.nodes", format_value(values[i]));
        if (axis == "param") {
          point.set("phi", substitute(cfg.get("phi"), format_value(values[i])));
          if (cfg.has("b")) point.set("b", substitute(cfg.get("b"), format_value(values[i])));
        }
        if (kind == "solve") {
          const Problem p = problem_from_config(point);
          const SolveResult res = minimize(p, solver_config_from(point));
          row.lambda = res.lambda;
          row.energy = res.energy;
          row.residual = res.weak_residual;
          row.iterations = res.iterations;
          row.status = to_string(res.status);
          row.h = p.domain.spacing(0);
        } else {
          SymmetralOptions o;
          o.s_max = point.get_double_or("sobolev.s_max", o.s_max);
          const auto prof = symmetral(parse_nfunction(point.get("phi"), point.get_int_or("n", 2)), 64, o);
          const auto conj = sobolev_conjugate(prof);
          row.slope = sobolev_slope(conj).slope;
          row.tail = to_string(conj.tail());
          row.status = "ok";
        }
      } catch (const std::exception& e) {
        row.status = "error";
        row.error = e.what();
      }
    }
  };
  const int count = std::max(1, std::min<int>(workers, static_cast<int>(values.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < count; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << std::setprecision(12);
  if (kind == "solve") {
    csv << "axis,lambda,energy,weak_residual,iterations\n";
    for (const auto& r : rows) csv << r.axis << "," << r.lambda << "," << r.energy << "," << r.residual << "," << r.iterations << "\n";
  } else {
    csv << "axis,slope,tail\n";
    for (const auto& r : rows) csv << r.axis << "," << r.slope << "," << r.tail << "\n";
  }

  json points = json::array();
  for (const auto& r : rows) {
    CheckResult c = verdict(r.status == "converged" || r.status == "ok", {{"axis", r.axis}, {"status", r.status}}, json::object());
    if (!r.error.empty()) c.measured["error"] = r.error;
    std::ostringstream label;
    label << std::setprecision(12) << r.axis;
    c.name = "sweep.point[" + label.str() + "]";
    report.checks.push_back(std::move(c));
    points.push_back({{"axis", r.axis}, {"lambda", r.lambda}, {"slope", r.slope}, {"status", r.status}});
  }
  report.outputs["points"] = points;

  if (kind == "solve" && axis == "nodes" && rows.size() >= 2) {
    json orders = json::array();
    double min_order = kInf;
    if (cfg.has("sweep.reference")) {
      const double ref = cfg.get_double("sweep.reference");
      for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const double o = std::log(std::abs(rows[i].lambda - ref) / std::abs(rows[i + 1].lambda - ref)) /
                         std::log(rows[i].h / rows[i + 1].h);
        orders.push_back(o);
        min_order = std::min(min_order, o);
      }
    } else if (rows.size() >= 3) {
      for (std::size_t i = 0; i + 2 < rows.size(); ++i) {
        const double o = std::log(std::abs(rows[i].lambda - rows[i + 1].lambda) / std::abs(rows[i + 1].lambda - rows[i + 2].lambda)) /
                         std::log(rows[i].h / rows[i + 1].h);
        orders.push_back(o);
        min_order = std::min(min_order, o);
      }
    }
    report.outputs["observed_orders"] = orders;
    if (cfg.has("sweep.order_min")) {
      const double need = cfg.get_double("sweep.order_min");
      CheckResult c = verdict(min_order >= need, {{"min_order", min_order}}, {{"order_min", need}});
      c.name = "sweep.order";
      report.checks.push_back(std::move(c));
    }
  }
  if (kind == "solve" && cfg.has("sweep.rel_spread")) {
    double lo = kInf, hi = -kInf;
    for (const auto& r : rows) {
      lo = std::min(lo, r.lambda);
      hi = std::max(hi, r.lambda);
    }
    const double spread = (hi - lo) / std::abs(lo);
    const double need = cfg.get_double("sweep.rel_spread");
    CheckResult c = verdict(spread <= need, {{"spread", spread}}, {{"rel", need}});
    c.name = "sweep.lambda_spread";
    report.checks.push_back(std::move(c));
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream(out_dir / "sweep.csv") << csv.str();
    write_report(report, out_dir / "report.json");
  }
  report.outputs["csv"] = csv.str();
  return report;
}

}  // namespace aniso
