#pragma once

// n-dimensional N-functions Phi: R^n -> [0, inf) with gradients, Young
// conjugates, and the radial-minorant / strict-convexification constructions.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "aniso/numeric.hpp"
#include "aniso/young1d.hpp"

namespace aniso {

/// Phi(xi) = sum_i A_i(xi_i).
struct SeparableSum {
  std::vector<YoungFunction1D> terms;
};

/// Phi(xi) = A(|xi|).
struct Radial {
  YoungFunction1D profile;
  int dim = 2;
};

/// Phi(xi) = sum_k A_k(|rows_k . xi|). Rows must span R^n.
struct LinearComposite {
  std::vector<std::vector<double>> rows;
  std::vector<YoungFunction1D> funcs;
};

/// User-supplied value and gradient maps.
struct Custom {
  int dim = 2;
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  std::string name = "custom";
};

using Structure = std::variant<SeparableSum, Radial, LinearComposite, Custom>;

/// Immutable, shareable n-dimensional N-function.
class NFunction {
 public:
  explicit NFunction(Structure structure);

  static NFunction separable(std::vector<YoungFunction1D> terms);
  static NFunction radial(YoungFunction1D profile, int dim);
  static NFunction composite(std::vector<std::vector<double>> rows, std::vector<YoungFunction1D> funcs);
  static NFunction custom(int dim, std::function<double(std::span<const double>)> value,
                          std::function<void(std::span<const double>, std::span<double>)> gradient,
                          std::string name = "custom");

  int dim() const noexcept { return dim_; }
  const Structure& structure() const noexcept { return state_->structure; }
  std::string describe() const;

  /// Phi(xi); xi.size() must equal dim().
  double operator()(std::span<const double> xi) const;
  /// Phi_xi(xi) written into out. At a kink the symmetric average of one-sided limits.
  void gradient(std::span<const double> xi, std::span<double> out) const;
  std::vector<double> gradient(std::span<const double> xi) const;

  /// Conjugate in closed form when the structure allows it (separable, radial).
  bool has_analytic_conjugate() const noexcept;
  /// Sum of 1-D conjugates (separable) or conjugate profile of |xi'| (radial).
  double analytic_conjugate(std::span<const double> xi_prime) const;

  /// A_h(t) = Phi(t e_h) as a 1-D function, when the structure makes it explicit.
  double axis_value(int axis, double t) const;

 private:
  struct State {
    Structure structure;
    std::vector<YoungFunction1D> conjugates;  // separable terms or radial profile
  };
  std::shared_ptr<const State> state_;
  int dim_ = 0;
};

double eval_nd(const NFunction& phi, std::span<const double> xi);
std::vector<double> grad_nd(const NFunction& phi, std::span<const double> xi);

/// Result of the concave maximization sup_xi (xi . xi' - Phi(xi)).
struct ConjugatePoint {
  double value = 0.0;
  std::vector<double> argmax;
  double residual = 0.0;  // |xi' - Phi_xi(argmax)|
  int iterations = 0;
};

/// Numerical conjugate: damped Newton ascent (finite-difference Hessian, gradient
/// fallback) with backtracking from xi = 0. Stops when the gradient residual is
/// at most 1e-9 (1 + |xi'|); ConvergenceError after 1e4 steps.
ConjugatePoint conjugate_nd_numeric(const NFunction& phi, std::span<const double> xi_prime);

/// Phi_bullet(xi'): analytic where available, numerical otherwise.
double conjugate_nd(const NFunction& phi, std::span<const double> xi_prime);

/// Per-solver cache of conjugate evaluations. Not shared across threads.
class ConjugateHandle {
 public:
  explicit ConjugateHandle(NFunction phi) : phi_(std::move(phi)) {}
  const NFunction& source() const noexcept { return phi_; }
  const ConjugatePoint& at(std::span<const double> xi_prime);
  double operator()(std::span<const double> xi_prime) { return at(xi_prime).value; }
  std::size_t cached() const noexcept { return cache_.size(); }

 private:
  NFunction phi_;
  std::map<std::vector<double>, ConjugatePoint> cache_;
};

/// Phi(xi) + Phi_bullet(eta) - xi . eta (nonnegative by the Young inequality).
double young_gap(const NFunction& phi, std::span<const double> xi, std::span<const double> eta);

/// Phi_bullet(Phi_xi(xi)) <= Phi_xi(xi) . xi <= Phi(2 xi), each with 1e-9 absolute
/// (plus 1e-12 relative) slack.
bool gradient_sandwich_check(const NFunction& phi, std::span<const double> xi);

/// Greatest convex minorant of m(r) = min_{|w|=1} Phi(r w) over [r_min, r_max].
/// Directions: sphere_samples deterministic points refined by projected descent on
/// the sphere; the convex envelope is assembled from supporting lines at the hull
/// vertices so it stays below the sampled profile between radii as well. m is
/// sampled at 8 * radial_knots log-spaced radii.
struct MinorantOptions {
  double r_min = 1e-3;
  double r_max = 1e3;
  std::uint64_t seed = 7;
};
YoungFunction1D radial_minorant(const NFunction& phi, int sphere_samples, int radial_knots,
                                const MinorantOptions& options = {});

/// Psi = Phi + G(Phi_-(xi)) with G(t) = c (t - log(1 + t)), i.e. g(s) = c s / (1 + s).
NFunction strictly_convexify(const NFunction& phi, double c);

/// Sampled N-function diagnostics (evenness, convexity, growth at 0 and infinity,
/// gradient vs central differences).
struct NFunctionDiagnostics {
  bool zero_at_origin = true;
  bool even = true;
  bool convex = true;
  bool superlinear = true;
  bool sublinear_at_zero = true;
  double max_gradient_error = 0.0;  // relative, vs central differences
  bool ok() const {
    return zero_at_origin && even && convex && superlinear && sublinear_at_zero && max_gradient_error <= 1e-5;
  }
};
NFunctionDiagnostics validate_nfunction(const NFunction& phi, Rng& rng, int samples, double radius = 2.0);

/// Families from the worked examples.
namespace families {
/// sum_i (1/p_i) t^p_i log^alpha_i (c + t); plain powers when every alpha_i is 0.
NFunction anisotropic_power_log(const std::vector<double>& p, const std::vector<double>& alpha, double c);
/// sum_i (exp(|xi_i|^alpha_i) - 1).
NFunction exp_power_sum(const std::vector<double>& alpha);
/// sum_{i<n} (1/p_i)|xi_i|^p_i + (exp(|xi_n|^alpha) - 1).
NFunction mixed_power_exp(const std::vector<double>& p, double alpha);
/// |xi_1 - xi_2|^p + |xi_1|^q log^alpha(c + |xi_1|) in R^2.
NFunction two_direction(double p, double q, double alpha, double c);
/// (1/2)|xi|^2 in R^n.
NFunction quadratic(int n);
}  // namespace families

}  // namespace aniso
