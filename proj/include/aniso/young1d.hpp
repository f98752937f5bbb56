#pragma once

// One-dimensional N-functions B(t) = int_0^|t| b(tau) dtau and their Young
// conjugates.

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace aniso {

/// Density families. `Derived` covers value tables and numerical conjugates,
/// which have no closed-form density parameters.
enum class DensityKind { Power, PowerLog, ExpPower, ExpLinear, Tabulated, Derived };

/// Parameters of a density b. The function built from it is
///   Power      B(t) = scale * t^p                         (scale defaults to 1/p)
///   PowerLog   B(t) = scale * t^p * log^alpha(c + t)      (scale defaults to 1/p, c > 1)
///   ExpPower   B(t) = scale * (exp(t^alpha) - 1)          (alpha > 1)
///   ExpLinear  B(t) = scale * (exp(t) - t - 1)
///   Tabulated  b piecewise linear through (tau_k, b_k), power-law tail past the last knot
struct Density1D {
  DensityKind kind = DensityKind::Power;
  double p = 2.0;
  double alpha = 0.0;
  double c = 1.0;
  double scale = 0.5;
  std::vector<double> tau;
  std::vector<double> b;
};

/// Interpolation used by value-tabulated profiles.
enum class ValueInterp { Linear, LogLog };

namespace detail {
class Young1DImpl;
}

/// Immutable, cheaply copyable 1-D N-function. Evaluation is even in t.
class YoungFunction1D {
 public:
  /// Validates the density (b(0) = 0, nondecreasing, unbounded) and throws InvariantError otherwise.
  explicit YoungFunction1D(const Density1D& density);

  static YoungFunction1D power(double p);
  static YoungFunction1D power(double p, double scale);
  static YoungFunction1D power_log(double p, double alpha, double c);
  static YoungFunction1D power_log(double p, double alpha, double c, double scale);
  static YoungFunction1D exp_power(double alpha, double scale = 1.0);
  static YoungFunction1D exp_linear(double scale = 1.0);
  static YoungFunction1D tabulated(std::vector<double> tau, std::vector<double> b);
  /// Two-column CSV (tau, b(tau)), strictly increasing tau; a header line is skipped.
  static YoungFunction1D from_csv(const std::filesystem::path& path);
  /// Profile known by its values at positive knots; tails continue the end power laws.
  static YoungFunction1D from_values(std::vector<double> t, std::vector<double> values, ValueInterp interp);

  /// B(|t|); DomainError for non-finite t.
  double operator()(double t) const;
  /// b(|tau|).
  double density(double tau) const;
  /// b(|t|) sign(t), the derivative of B, 0 at t = 0.
  double derivative(double t) const;
  /// inf{tau >= 0 : b(tau) >= s}.
  double density_inverse(double s) const;
  /// inf{t >= 0 : B(t) >= y}.
  double inverse(double y) const;
  /// B*(s) = sup_t (s t - B(t)).
  YoungFunction1D conjugate() const;

  DensityKind kind() const;
  /// Closed-form parameters; kind() == Derived for profiles without them.
  const Density1D& parameters() const;
  std::string describe() const;

 private:
  explicit YoungFunction1D(std::shared_ptr<const detail::Young1DImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const detail::Young1DImpl> impl_;
  friend class detail::Young1DImpl;
};

double eval1d(const YoungFunction1D& B, double t);
YoungFunction1D conjugate1d(const YoungFunction1D& B);
double inverse1d(const YoungFunction1D& B, double y);

/// Sampled Delta_2 certificate. Heuristic: `holds` means the ratio B(2t)/B(t)
/// stayed finite on the grid and did not trend upward over the last decade.
struct Delta2Result {
  bool holds = false;
  double c_est = 0.0;
  std::vector<double> grid;
  std::vector<double> ratios;
};
Delta2Result delta2_check(const YoungFunction1D& B, double K, double t_max);

/// Sampled certificate for "A increases essentially more slowly than D".
/// For each gamma the ratio A(gamma t)/D(t) is sampled on a geometric grid in
/// [1, 1e8]; a gamma passes if the final ratio is below 1e-6, or if the ratio
/// is nonincreasing over the last two decades with log-log slope <= -0.02 over
/// the last one. Heuristic by nature.
struct GrowthCertificate {
  bool slower = false;
  std::vector<double> grid;
  std::vector<double> gammas;
  std::vector<std::vector<double>> ratios;
  std::vector<double> tail_slopes;
  std::vector<bool> passed;
};
GrowthCertificate growth_certificate(const YoungFunction1D& A, const YoungFunction1D& D,
                                     const std::vector<double>& gammas);
bool grows_essentially_slower(const YoungFunction1D& A, const YoungFunction1D& D,
                              const std::vector<double>& gammas);

}  // namespace aniso
