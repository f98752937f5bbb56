#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "aniso/error.hpp"
#include "aniso/numeric.hpp"
#include "aniso/young1d.hpp"
#include "doctest.h"

using namespace aniso;

namespace {

// Plain bisection with a fixed iteration count, independent of the library's inverse.
double bisect_oracle(const YoungFunction1D& B, double y) {
  double lo = 0.0, hi = 1.0;
  while (B(hi) < y) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (B(mid) < y ? lo : hi) = mid;
  }
  return hi;
}

// Composite Simpson on [a, b] with n panels.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("closed-form values") {
  CHECK(YoungFunction1D::power(2.0)(3.0) == doctest::Approx(4.5));
  CHECK(YoungFunction1D::power(2.0)(-3.0) == doctest::Approx(4.5));
  for (const auto& B : {YoungFunction1D::power(3.0), YoungFunction1D::power_log(2.0, 1.0, std::numbers::e),
                        YoungFunction1D::exp_power(2.0), YoungFunction1D::exp_linear()})
    CHECK(B(0.0) == 0.0);
  CHECK_THROWS_AS(YoungFunction1D::power(2.0)(std::nan("")), DomainError);
  CHECK_THROWS_AS(eval1d(YoungFunction1D::power(2.0), kInf), DomainError);
}

TEST_CASE("values agree with quadrature of the density") {
  for (const auto& B : {YoungFunction1D::power_log(2.5, 1.5, 3.0), YoungFunction1D::exp_power(1.7),
                        YoungFunction1D::exp_linear(2.0)}) {
    for (double t : {0.1, 0.9, 2.5}) {
      // tau = t x^2 smooths the power-type behaviour of b at 0.
      const double q = simpson([&](double x) { return B.density(t * x * x) * 2.0 * t * x; }, 0.0, 1.0, 4000);
      CHECK(B(t) == doctest::Approx(q).epsilon(1e-9));
    }
  }
}

TEST_CASE("tabulated density integrates exactly") {
  // b(tau) = tau^2 sampled densely; the piecewise-linear integral is the trapezoid sum.
  std::vector<double> tau, b;
  for (int k = 0; k <= 400; ++k) {
    tau.push_back(0.01 * k);
    b.push_back(tau.back() * tau.back());
  }
  const auto B = YoungFunction1D::tabulated(tau, b);
  double trap = 0.0;
  for (int k = 0; k < 200; ++k) trap += 0.5 * (b[k] + b[k + 1]) * 0.01;
  CHECK(B(2.0) == doctest::Approx(trap).epsilon(1e-10));
  CHECK(B(2.0) == doctest::Approx(8.0 / 3.0).epsilon(1e-4));
}

TEST_CASE("tabulated density from csv") {
  const auto path = std::filesystem::temp_directory_path() / "aniso_density.csv";
  {
    std::ofstream os(path);
    os << "tau,b\n0,0\n1,1\n2,4\n3,9\n";
  }
  const auto B = YoungFunction1D::from_csv(path);
  CHECK(B(1.0) == doctest::Approx(0.5));
  CHECK(B(2.0) == doctest::Approx(0.5 + 2.5));
  std::filesystem::remove(path);
}

TEST_CASE("invalid densities are rejected") {
  CHECK_THROWS_AS(YoungFunction1D::power(1.0), InvariantError);
  CHECK_THROWS_AS(YoungFunction1D::tabulated({0.0, 1.0, 2.0}, {0.0, 2.0, 1.0}), InvariantError);
  CHECK_THROWS_AS(YoungFunction1D::tabulated({0.0, 1.0}, {1.0, 2.0}), InvariantError);
}

TEST_CASE("conjugate pairs") {
  const auto q = YoungFunction1D::power(2.0).conjugate();
  for (double s : {0.3, 1.0, 7.0}) CHECK(q(s) == doctest::Approx(0.5 * s * s).epsilon(1e-10));

  for (double p : {1.3, 3.0, 4.5}) {
    const double pc = p / (p - 1.0);
    const auto c = conjugate1d(YoungFunction1D::power(p));
    for (double s : {0.2, 1.0, 5.0}) CHECK(c(s) == doctest::Approx(std::pow(s, pc) / pc).epsilon(1e-9));
  }

  const auto e = YoungFunction1D::exp_linear().conjugate();
  for (double s : {0.5, 1.0, 2.0}) CHECK(e(s) == doctest::Approx((1 + s) * std::log1p(s) - s).epsilon(1e-9));
}

TEST_CASE("involution on random parameterizations") {
  Rng rng(11);
  for (int k = 0; k < 50; ++k) {
    const auto B = YoungFunction1D::power_log(rng.uniform(1.3, 4.0), rng.uniform(0.0, 2.0), rng.uniform(1.5, 10.0));
    const auto B2 = B.conjugate().conjugate();
    for (double t : geomspace(1e-3, 1e3, 20)) CHECK(std::abs(B2(t) - B(t)) / std::max(1.0, B(t)) <= 1e-6);
  }
}

TEST_CASE("Young inequality and its equality case") {
  Rng rng(12);
  const auto B = YoungFunction1D::exp_power(1.8);
  const auto Bc = B.conjugate();
  for (int i = 0; i < 10000; ++i) {
    const double t = rng.uniform(0.0, 2.5), s = rng.uniform(0.0, 50.0);
    CHECK(s * t <= B(t) + Bc(s) + 1e-10 * (1 + B(t) + Bc(s)));
    const double sb = B.density(t);
    CHECK(std::abs(B(t) + Bc(sb) - sb * t) <= 1e-8 * (1 + B(t)));
  }
}

TEST_CASE("inverse") {
  CHECK(YoungFunction1D::power(2.0, 1.0).inverse(9.0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(inverse1d(YoungFunction1D::exp_power(2.0), 0.0) == 0.0);
  const auto B = YoungFunction1D::power_log(2.0, 1.0, std::numbers::e, 1.0);
  CHECK(B.inverse(10.0) == doctest::Approx(bisect_oracle(B, 10.0)).epsilon(1e-9));
  for (double t : geomspace(1e-3, 1e3, 30)) CHECK(B.inverse(B(t)) == doctest::Approx(t).epsilon(1e-8));
}

TEST_CASE("lin inequality") {
  Rng rng(13);
  const auto B = YoungFunction1D::power_log(1.4, 0.7, 2.0);
  for (int i = 0; i < 10000; ++i) {
    const double t = rng.uniform(0.0, 100.0), h = rng.uniform();
    CHECK(B(h * t) <= h * B(t) + 1e-12 * (1 + B(t)));
  }
}

TEST_CASE("delta2 certificate") {
  for (double p : {1.5, 2.0, 3.0}) {
    const auto r = delta2_check(YoungFunction1D::power(p), 1.0, 1e6);
    CHECK(r.holds);
    CHECK(r.c_est == doctest::Approx(std::pow(2.0, p)).epsilon(1e-9));
    CHECK(!r.grid.empty());
  }
  CHECK_FALSE(delta2_check(YoungFunction1D::exp_power(2.0), 1.0, 20.0).holds);
  const auto pl = delta2_check(YoungFunction1D::power_log(2.0, 1.0, std::numbers::e), 1.0, 1e8);
  CHECK(pl.holds);
  CHECK(pl.ratios.back() == doctest::Approx(4.0).epsilon(0.05));
  CHECK_THROWS_AS(delta2_check(YoungFunction1D::power(2.0), 10.0, 5.0), DomainError);
}

TEST_CASE("essential growth comparison") {
  const auto t2 = YoungFunction1D::power(2.0, 1.0), t3 = YoungFunction1D::power(3.0, 1.0), t5 = YoungFunction1D::power(5.0, 1.0);
  CHECK(grows_essentially_slower(t2, t3, {0.5, 1.0, 10.0}));
  CHECK_FALSE(grows_essentially_slower(t3, t3, {2.0}));
  const auto e = YoungFunction1D::exp_linear();
  CHECK(grows_essentially_slower(t2, e, {0.5, 1.0, 10.0}));
  CHECK(grows_essentially_slower(t5, e, {0.5, 1.0, 10.0}));
  const auto cert = growth_certificate(t2, t3, {1.0});
  CHECK(cert.passed.size() == 1);
  CHECK(cert.grid.front() == doctest::Approx(1.0));
}
