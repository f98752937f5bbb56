#pragma once

// Spherically increasing symmetral Phi_o of an n-D N-function, the integral
//   H(s) = ( int_0^s (tau / Phi_o(tau))^{1/(n-1)} dtau )^{(n-1)/n},
// and the Sobolev conjugate Phi_n = Phi_o o H^{-1}.

#include <cstdint>
#include <vector>

#include "aniso/numeric.hpp"
#include "aniso/young1d.hpp"
#include "aniso/youngnd.hpp"

namespace aniso {

inline constexpr std::uint64_t kDefaultVolumeSeed = 0x5eed0f1e7e15ULL;

enum class VolumeMethod {
  Auto,        // exact for radial, quadrature when separable (possibly after a linear change of variables), else MC
  Exact,
  Quadrature,
  MonteCarlo,
};

const char* to_string(VolumeMethod m);

struct LevelVolume {
  double volume = 0.0;
  double stderr_estimate = 0.0;
  double log_volume = 0.0;  // stays finite when volume overflows
  VolumeMethod method = VolumeMethod::Auto;
};

/// |{xi : Phi(xi) <= t}|. `budget` is the MC sample count (ignored by the
/// deterministic paths). Throws InvariantError when the level set is unbounded.
LevelVolume level_volume(const NFunction& phi, double t, int budget = 1 << 15,
                         std::uint64_t seed = kDefaultVolumeSeed, VolumeMethod method = VolumeMethod::Auto);

struct SymmetralOptions {
  double s_min = 1e-8;
  double s_max = 1e8;
  int per_decade = 8;  // level knots per decade of t, on top of the requested minimum
  int mc_samples = 1 << 15;
  std::uint64_t seed = kDefaultVolumeSeed;
  VolumeMethod method = VolumeMethod::Auto;
};

/// Phi_o(s) = inf{t > 0 : (V(t) / omega_n)^{1/n} >= s}, tabulated from level
/// volumes at geometric t and convexified; piecewise power between knots.
class SymmetralProfile {
 public:
  int dim() const noexcept { return dim_; }
  /// Phi_o(s); 0 for s <= 0.
  double operator()(double s) const { return table_.value(s); }
  double log_value(double s) const { return table_.log_value(s); }
  /// Radius of the ball with the volume of {Phi <= t}.
  double radius(double t) const { return table_.inverse(t); }
  const LogLogTable& table() const noexcept { return table_; }
  YoungFunction1D young() const;

  const std::vector<double>& level_t() const noexcept { return level_t_; }
  const std::vector<double>& log_volumes() const noexcept { return log_volume_; }
  const std::vector<double>& volume_errors() const noexcept { return volume_err_; }
  VolumeMethod method() const noexcept { return method_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double s_min() const noexcept { return s_min_; }
  double s_max() const noexcept { return s_max_; }

 private:
  friend SymmetralProfile symmetral(const NFunction&, int, const SymmetralOptions&);
  int dim_ = 2;
  LogLogTable table_;
  std::vector<double> level_t_, log_volume_, volume_err_;
  VolumeMethod method_ = VolumeMethod::Auto;
  std::uint64_t seed_ = 0;
  double s_min_ = 0.0, s_max_ = 0.0;
};

/// Requires knots >= 64 and dim >= 2.
SymmetralProfile symmetral(const NFunction& phi, int knots = 64, const SymmetralOptions& options = {});

/// Local exponent of the integrand (tau / Phi_o)^{1/(n-1)} near 0 or near infinity.
struct ExponentCheck {
  bool holds = false;
  double exponent = 0.0;
  double r2 = 1.0;
};

/// int_0 (tau / Phi_o(tau))^{1/(n-1)} dtau < inf, read off the fitted integrand
/// exponent on the first tabulated decade (> -1 with margin 0.05).
/// InconclusiveError when the fit is poor (R^2 < 0.99) and local slopes disagree.
ExponentCheck check_zero_condition(const SymmetralProfile& profile);

enum class TailClass { InfiniteTail, FiniteTail };
const char* to_string(TailClass c);

struct TailClassification {
  TailClass tail = TailClass::InfiniteTail;
  double exponent = 0.0;
  double r2 = 1.0;
};

/// InfiniteTail iff the fitted integrand exponent on the last tabulated decade is >= -1.
TailClassification classify_tail(const SymmetralProfile& profile);

class SobolevConjugate {
 public:
  int dim() const noexcept { return dim_; }
  double H(double s) const;
  /// inf{s >= 0 : H(s) >= t}; +inf past H(inf) on a finite tail.
  double H_inverse(double t) const;
  /// Phi_n(t); +inf past H(inf) on a finite tail.
  double operator()(double t) const;
  double h_infinity() const noexcept { return h_inf_; }
  TailClass tail() const noexcept { return tail_.tail; }
  const TailClassification& tail_fit() const noexcept { return tail_; }
  const ExponentCheck& zero_fit() const noexcept { return zero_; }

  /// Knots s_k of the profile and H(s_k).
  const std::vector<double>& knots() const noexcept { return s_; }
  std::vector<double> h_values() const;
  /// Phi_n tabulated at H(s_k), continued by end power laws. On a finite tail
  /// the continuation is finite, whereas operator() returns +inf past H(inf).
  YoungFunction1D young() const;

 private:
  friend SobolevConjugate sobolev_conjugate(const SymmetralProfile&);
  double cumulative(double s) const;  // I(s) = int_0^s f
  int dim_ = 2;
  LogLogTable profile_;
  std::vector<double> s_, log_f_, exps_, cum_;
  double left_exp_ = 0.0, right_exp_ = 0.0, cum_inf_ = kInf, h_inf_ = kInf;
  ExponentCheck zero_;
  TailClassification tail_;
};

/// PreconditionError when the zero condition fails.
SobolevConjugate sobolev_conjugate(const SymmetralProfile& profile);

/// Fitted log-log slope of Phi_n over [a, b].
PowerFit sobolev_slope(const SobolevConjugate& conj, double a = 1e2, double b = 1e4);

}  // namespace aniso
