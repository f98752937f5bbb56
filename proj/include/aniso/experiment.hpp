#pragma once

// Batch experiments behind the command-line tool: property suites, solves,
// Sobolev-conjugate tabulation and parameter sweeps, each producing a RunReport.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aniso/config.hpp"
#include "aniso/sobolev.hpp"
#include "aniso/solver.hpp"
#include "json.hpp"

namespace aniso {

struct CheckResult {
  std::string name;
  std::string status;  // "pass", "fail" or "inconclusive"
  nlohmann::json measured = nlohmann::json::object();
  nlohmann::json tolerance = nlohmann::json::object();
  double wall_seconds = 0.0;
};

struct RunReport {
  std::string command;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;
  nlohmann::json outputs = nlohmann::json::object();

  int failures() const;
  bool passed() const { return failures() == 0; }
  nlohmann::json to_json() const;
};

void write_report(const RunReport& report, const std::filesystem::path& path);

/// Check names of a property suite: young, youngnd, sobolev, grid, solver, or all.
std::vector<std::string> suite_checks(const std::string& suite);
RunReport run_verify(const std::string& suite, std::uint64_t seed);

/// Keys: phi, b, domain.extents, domain.nodes, r, tol.energy, tol.residual,
/// tol.constraint, max_iters, seed, plus optional initial_guess, preconditioner,
/// gate (on/off), expect.lambda and expect.rel_tol.
Problem problem_from_config(const FlatConfig& cfg);
SolverConfig solver_config_from(const FlatConfig& cfg);
/// Writes report.json, u.csv and u.bin under out_dir when it is non-empty.
RunReport run_solve(const FlatConfig& cfg, const std::filesystem::path& out_dir);

struct SobolevRunOptions {
  int knots = 64;
  SymmetralOptions symmetral;
  int rows = 200;  // CSV rows
};
/// CSV columns t, H(t), Phi_n(t) plus a JSON sidecar (`<csv>.json`) with flags and fits.
RunReport run_sobolev(const std::string& phi_spec, int n, const std::filesystem::path& csv,
                      const SobolevRunOptions& options);

/// Conjugate of an n-D spec at a point, or of a 1-D spec when n == 1 and the spec is 1-D.
RunReport run_conjugate(const std::string& spec, int n, const std::vector<double>& at);

/// Extra keys: sweep.axis (r | nodes | param), sweep.values, sweep.kind (solve |
/// sobolev), sweep.reference, sweep.order_min, sweep.rel_spread. `param` substitutes
/// each value for `{x}` in phi and b. Writes sweep.csv and report.json.
RunReport run_sweep(const FlatConfig& cfg, const std::filesystem::path& out_dir, int workers);

}  // namespace aniso
