#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fracdiff/error.hpp"
#include "fracdiff/sturm_liouville.hpp"

using namespace fracdiff;

namespace {

constexpr double kPi = std::numbers::pi;

OperatorCoefficients constant(double p, double q, double l) {
  return {[p](double) { return p; }, [q](double) { return q; }, l};
}

}  // namespace

TEST_CASE("sine modes of -u''") {
  const auto sys = solve_eigen(constant(1, 0, kPi), 3, 2000);
  CHECK(sys.nodes() == 2000);
  for (std::size_t i = 0; i < 3; ++i) {
    const double k = static_cast<double>(i + 1);
    CHECK(std::abs(sys.lambdas[i] - k * k) / (k * k) <= 1e-4);
    for (std::size_t j = 0; j < sys.nodes(); j += 97) {
      CHECK(sys.mode(i)[j] == doctest::Approx(std::sqrt(2 / kPi) * std::sin(k * sys.x(j))).epsilon(1e-9));
    }
  }
}

TEST_CASE("discrete eigenvalues match the finite-difference formula") {
  const auto sys = solve_eigen(constant(1, 0, kPi), 10, 401);
  const double h = sys.h();
  for (std::size_t i = 0; i < 10; ++i) {
    const double s = std::sin((i + 1.0) * h / 2);
    CHECK(sys.lambdas[i] == doctest::Approx(4 * s * s / (h * h)).epsilon(1e-12));
  }
}

TEST_CASE("constant q shifts the spectrum") {
  const auto a = solve_eigen(constant(1, 0, kPi), 6, 801);
  const auto b = solve_eigen(constant(1, 2.5, kPi), 6, 801);
  for (std::size_t i = 0; i < 6; ++i) CHECK(b.lambdas[i] == doctest::Approx(a.lambdas[i] + 2.5).epsilon(1e-12));
}

TEST_CASE("analytic reference spectrum") {
  CHECK(analytic_eigen(1.0, 2).lambdas[0] == doctest::Approx(kPi * kPi).epsilon(1e-15));
  CHECK(analytic_eigen(1.0, 2).lambdas[1] == doctest::Approx(4 * kPi * kPi).epsilon(1e-15));
  CHECK(analytic_eigen(2.0, 1).lambdas[0] == doctest::Approx(kPi * kPi / 4).epsilon(1e-15));
  const auto sys = analytic_eigen(1.0, 3);
  CHECK(sys.inner(sys.mode(0), sys.mode(0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("variable coefficients: orthonormal, increasing, sign convention") {
  OperatorCoefficients c{[](double x) { return 1 + x * x; }, [](double x) { return std::exp(x); }, 2.0};
  const auto sys = solve_eigen(c, 12, 1001);
  for (std::size_t i = 0; i < 12; ++i) {
    if (i > 0) CHECK(sys.lambdas[i] > sys.lambdas[i - 1]);
    CHECK(sys.mode(i)[1] > 0.0);
    for (std::size_t k = 0; k <= i; ++k) {
      CHECK(sys.inner(sys.mode(i), sys.mode(k)) == doctest::Approx(i == k ? 1.0 : 0.0).epsilon(1e-10));
    }
  }
  // Rayleigh quotient lower bound: lambda_1 >= min p pi^2 / l^2 + min q.
  CHECK(sys.lambdas[0] >= kPi * kPi / 4 + 1.0);
}

TEST_CASE("coefficient violations") {
  try {
    solve_eigen(constant(-1, 0, 1), 2, 101);
    FAIL("expected CoefficientError");
  } catch (const CoefficientError& e) {
    CHECK(std::string(e.what()).find("p(x) > 0") != std::string::npos);
  }
  CHECK_THROWS_AS(solve_eigen(constant(1, -1, 1), 2, 101), CoefficientError);
  CHECK_THROWS_AS(solve_eigen(constant(1, 0, 1), 200, 101), ResolutionError);
  CHECK_THROWS_AS(solve_eigen(constant(1, 0, 1), 2, 3), ResolutionError);
}

TEST_CASE("projection and reconstruction") {
  const auto sys = solve_eigen(constant(1, 0, 1), 40, 1001);
  std::vector<double> f(sys.nodes());
  auto m3 = sys.mode(2);
  std::copy(m3.begin(), m3.end(), f.begin());
  const auto c = project(f, sys);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(c[i] - (i == 2 ? 1.0 : 0.0)) <= 1e-8);

  std::vector<double> zero(sys.nodes(), 0.0);
  for (double v : project(zero, sys)) CHECK(v == 0.0);

  std::vector<double> para(sys.nodes());
  for (std::size_t j = 0; j < sys.nodes(); ++j) para[j] = sys.x(j) * (1 - sys.x(j));
  const auto cp = project(para, sys);
  for (std::size_t i = 0; i < 6; ++i) {
    const double k = i + 1.0;
    const double want = 2 * std::sqrt(2.0) * (1 - std::pow(-1.0, k)) / std::pow(k * kPi, 3);
    CHECK(std::abs(cp[i] - want) <= 1e-5 * std::abs(cp[0]));
  }
  const auto back = reconstruct(cp, sys);
  for (std::size_t j = 0; j < sys.nodes(); j += 50) CHECK(back[j] == doctest::Approx(para[j]).epsilon(1e-4));
}

TEST_CASE("interpolation between nodes") {
  const auto sys = solve_eigen(constant(1, 0, kPi), 4, 2001);
  for (double x : {0.0, 0.123, 1.0, 2.5, kPi}) {
    CHECK(sys.interpolate(1, x) == doctest::Approx(std::sqrt(2 / kPi) * std::sin(2 * x)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(sys.interpolate(0, 4.0), DomainError);
}

TEST_CASE("decay diagnostic") {
  const std::vector<double> lam = {1, 4, 9, 16};
  const auto e3 = coefficient_decay_diagnostic(std::vector<double>{0, 0, 1, 0}, lam);
  CHECK(e3.s1 == 81.0);
  CHECK(e3.s2 == 6561.0);
  const auto two = coefficient_decay_diagnostic(std::vector<double>{1, 1, 0, 0}, lam);
  CHECK(two.s1 == 17.0);

  const auto sys = solve_eigen(constant(1, 0, 1), 200, 2001);
  std::vector<double> smooth(sys.nodes()), one(sys.nodes(), 1.0);
  for (std::size_t j = 0; j < sys.nodes(); ++j) smooth[j] = sys.x(j) * (1 - sys.x(j));
  CHECK(coefficient_decay_diagnostic(project(smooth, sys), sys.lambdas).s1_plateau);
  CHECK_FALSE(coefficient_decay_diagnostic(project(one, sys), sys.lambdas).s1_plateau);
}

TEST_CASE("eigen CSV round trip") {
  const auto sys = solve_eigen(constant(1, 0.5, 1.5), 5, 101);
  std::stringstream ss;
  write_eigen_csv(ss, sys);
  const std::string text = ss.str();
  CHECK(text.rfind("i,lambda_i,0,", 0) == 0);
  const auto back = read_eigen_csv(ss);
  CHECK(back.lambdas == sys.lambdas);
  CHECK(back.modes == sys.modes);
  CHECK(back.length == sys.length);
  std::stringstream bad("i,lambda_i,0,1\n");
  CHECK_THROWS_AS(read_eigen_csv(bad), InputError);
}
