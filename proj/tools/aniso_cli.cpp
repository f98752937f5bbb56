// Command-line front end. Exit codes: 0 all checks passed, 1 a check failed,
// 2 bad configuration or arguments, 3 any other runtime error.

#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "aniso/error.hpp"
#include "aniso/experiment.hpp"

namespace {

void print_summary(const aniso::RunReport& report) {
  for (const auto& c : report.checks) std::cout << (c.status == "pass" ? "PASS " : c.status == "fail" ? "FAIL " : "INCONCLUSIVE ") << c.name << "  " << c.measured.dump() << "\n";
}

int exit_code(const aniso::RunReport& report) { return report.passed() ? 0 : 1; }

std::vector<double> parse_point(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw aniso::ConfigError("--at: expected comma-separated numbers, got '" + text + "'");
    }
  }
  if (out.empty()) throw aniso::ConfigError("--at: empty point");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic Orlicz-Sobolev toolkit"};
  app.require_subcommand(1);

  auto* conj = app.add_subcommand("conjugate", "Young conjugate of a 1-D or n-D family at a point");
  std::string conj_spec, conj_at;
  int conj_n = 0;
  conj->add_option("--phi", conj_spec, "Family spec, e.g. power(3) or sepsum[power(2),exppow(2)]")->required();
  conj->add_option("--at", conj_at, "Point, comma separated")->required();
  conj->add_option("--n", conj_n, "Dimension for radial or quadratic specs");

  auto* sob = app.add_subcommand("sobolev-conjugate", "Tabulate H and the Sobolev conjugate");
  std::string sob_spec, sob_out;
  int sob_n = 2;
  aniso::SobolevRunOptions sob_opts;
  sob->add_option("--phi", sob_spec, "n-D family spec")->required();
  sob->add_option("--n", sob_n, "Dimension")->check(CLI::Range(2, 3));
  sob->add_option("--out", sob_out, "CSV output path")->required();
  sob->add_option("--s-max", sob_opts.symmetral.s_max, "Upper end of the symmetral range");
  sob->add_option("--knots", sob_opts.knots, "Minimum number of level knots")->check(CLI::Range(64, 100000));
  sob->add_option("--seed", sob_opts.symmetral.seed, "Monte Carlo seed");

  auto* solve = app.add_subcommand("solve", "Constrained minimization from a config file");
  std::string solve_cfg, solve_out;
  solve->add_option("--config", solve_cfg, "Config file")->required();
  solve->add_option("--out-dir", solve_out, "Output directory")->required();
  std::string solve_seed;
  solve->add_option("--seed", solve_seed, "Overrides the config seed");

  auto* verify = app.add_subcommand("verify", "Run a property suite");
  std::string suite = "all";
  std::uint64_t seed = 20240601;
  verify->add_option("--suite", suite, "young, youngnd, sobolev, grid, solver or all");
  verify->add_option("--seed", seed, "Master seed");
  std::string verify_out;
  verify->add_option("--out", verify_out, "Write the JSON report here");

  auto* sweep = app.add_subcommand("sweep", "Parameter sweep from a config file");
  std::string sweep_cfg, sweep_out;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  sweep->add_option("--config", sweep_cfg, "Config file")->required();
  sweep->add_option("--out-dir", sweep_out, "Output directory")->required();
  sweep->add_option("--workers", workers, "Worker threads")->check(CLI::Range(1, 256));
  std::string sweep_seed;
  sweep->add_option("--seed", sweep_seed, "Overrides the config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*conj) {
      const auto report = aniso::run_conjugate(conj_spec, conj_n, parse_point(conj_at));
      std::cout << report.outputs.dump(2) << "\n";
      return 0;
    }
    if (*sob) {
      const auto report = aniso::run_sobolev(sob_spec, sob_n, sob_out, sob_opts);
      print_summary(report);
      std::cout << report.outputs.dump(2) << "\n";
      return exit_code(report);
    }
    if (*solve) {
      auto cfg = aniso::FlatConfig::load(solve_cfg);
      if (!solve_seed.empty()) cfg.set("seed", solve_seed);
      const auto report = aniso::run_solve(cfg, solve_out);
      print_summary(report);
      std::cout << "lambda = " << report.outputs["lambda"] << "\n";
      return exit_code(report);
    }
    if (*verify) {
      const auto report = aniso::run_verify(suite, seed);
      print_summary(report);
      if (!verify_out.empty()) aniso::write_report(report, verify_out);
      return exit_code(report);
    }
    if (*sweep) {
      auto cfg = aniso::FlatConfig::load(sweep_cfg);
      if (!sweep_seed.empty()) cfg.set("seed", sweep_seed);
      const auto report = aniso::run_sweep(cfg, sweep_out, workers);
      print_summary(report);
      return exit_code(report);
    }
  } catch (const aniso::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
