#pragma once

// Constrained minimization of int Phi(grad u) subject to int B(u) = r on a
// Dirichlet grid, multiplier extraction, weak residuals and the constraint path.

#include <string>
#include <vector>

#include "aniso/grid.hpp"
#include "aniso/young1d.hpp"
#include "aniso/youngnd.hpp"

namespace aniso {

struct Problem {
  NFunction phi;
  YoungFunction1D B;
  GridDomain domain;
  double r = 1.0;
};

enum class Preconditioner {
  None,       // plain nodal gradient
  Laplacian,  // H^1_0 metric
  Secant,     // -div(w grad) with cell weights w = Phi_xi(xi).xi / |xi|^2, refreshed each step
};

struct SolverConfig {
  int max_iterations = 2000;
  double tol_energy = 1e-12;
  double tol_residual = 1e-6;
  double tol_constraint = 1e-10;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 40;
  std::string initial_guess = "sine";  // "sine" or "random"
  std::uint64_t seed = 1;
  Preconditioner preconditioner = Preconditioner::Secant;
  bool growth_gate = true;
};

enum class SolveStatus { Converged, Stalled, MaxIterations };
const char* to_string(SolveStatus s);

enum class GateStatus { Unrestricted, Certified, Inconclusive, Violated };
const char* to_string(GateStatus s);

struct GrowthGate {
  GateStatus status = GateStatus::Unrestricted;
  std::string note;
};

/// B must grow essentially more slowly than Phi_n when the Sobolev tail is
/// infinite; any B is allowed on a finite tail or in one dimension.
GrowthGate check_growth_gate(const NFunction& phi, const YoungFunction1D& B);

struct SolveResult {
  Field u;
  double lambda = 0.0;
  double energy = 0.0;
  double constraint_error = 0.0;
  double weak_residual = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::MaxIterations;
  std::vector<double> energy_trace;      // accepted iterates, starting with the projected guess
  std::vector<double> constraint_trace;  // |int B(u) - r| / r after every accepted projection
  double conjugate_modular_phi = 0.0;    // int Phi_bullet(Phi_xi(grad u))
  double conjugate_modular_b = 0.0;      // int B_bullet(b(|u|))
  GrowthGate gate;
};

/// int B(u) over nodes.
double constraint_integral(const Field& u, const YoungFunction1D& B);

/// s > 0 with int B(s u) = r to |.| <= tol r. DegenerateInputError for u = 0.
double projection_scale(const Field& u, const YoungFunction1D& B, double r, double tol);
Field project_to_constraint(const Field& u, const YoungFunction1D& B, double r, double tol);

double energy(const Field& u, const NFunction& phi);
/// g = -div Phi_xi(grad u), so that <g, v> = int Phi_xi(grad u) . grad v for every nodal v.
Field energy_gradient(const Field& u, const NFunction& phi);
/// -g.
Field descent_direction(const Field& u, const NFunction& phi);

/// [int Phi_xi(grad u) . grad u] / [int b(|u|) |u|].
double lagrange_multiplier(const Field& u, const NFunction& phi, const YoungFunction1D& B);

struct WeakResidual {
  double residual = 0.0;
  double conjugate_modular_phi = 0.0;
  double conjugate_modular_b = 0.0;
};
/// max_j |<dF, phi_j> - lambda <dG, phi_j>| / (1 + |<dF, phi_j>|) over the nodal hat basis.
WeakResidual weak_residual(const Field& u, double lambda, const NFunction& phi, const YoungFunction1D& B);

/// delta with int B((1 - eps) u + delta v) = int B(u), by safeguarded secant from
/// the linearized guess eps int b(u)u / int b(u)v.
double constraint_path(const Field& u, const Field& v, double eps, const YoungFunction1D& B);

SolveResult minimize(const Problem& problem, const SolverConfig& config = {});

/// Projected initial guess prod_i sin(pi x_i / L_i) (or seeded random positive values).
Field initial_guess(const Problem& problem, const SolverConfig& config);

}  // namespace aniso
