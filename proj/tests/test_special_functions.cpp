#include <doctest.h>

#include <mpfr.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fracdiff/error.hpp"
#include "fracdiff/gamma.hpp"
#include "fracdiff/mittag_leffler.hpp"

using namespace fracdiff;

namespace {

// Taylor series of E_{a,b}(z) in MPFR with enough precision to absorb the
// cancellation for negative z.
double mpfr_ml(double a, double b, double z) {
  const double mag = std::pow(std::abs(z), 1.0 / a);
  const mpfr_prec_t prec = 120 + static_cast<mpfr_prec_t>(1.6 * mag / std::log(2.0));
  mpfr_t s, term, zk, arg, g;
  mpfr_inits2(prec, s, term, zk, arg, g, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_d(s, 0, MPFR_RNDN);
  mpfr_set_d(zk, 1, MPFR_RNDN);
  for (long k = 0; k < 200000; ++k) {
    mpfr_set_d(arg, a, MPFR_RNDN);
    mpfr_mul_si(arg, arg, k, MPFR_RNDN);
    mpfr_add_d(arg, arg, b, MPFR_RNDN);
    if (mpfr_cmp_d(arg, 0) <= 0 && mpfr_integer_p(arg)) {
      mpfr_set_d(term, 0, MPFR_RNDN);
    } else {
      mpfr_gamma(g, arg, MPFR_RNDN);
      mpfr_div(term, zk, g, MPFR_RNDN);
    }
    mpfr_add(s, s, term, MPFR_RNDN);
    if (k > 10 && mpfr_get_d(arg, MPFR_RNDN) > 3 && !mpfr_zero_p(term)) {
      if (std::abs(mpfr_get_d(term, MPFR_RNDN)) < 1e-30 * std::abs(mpfr_get_d(s, MPFR_RNDN))) break;
    }
    mpfr_mul_d(zk, zk, z, MPFR_RNDN);
  }
  const double r = mpfr_get_d(s, MPFR_RNDN);
  mpfr_clears(s, term, zk, arg, g, static_cast<mpfr_ptr>(nullptr));
  return r;
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace

TEST_CASE("gamma agrees with the C library") {
  for (double x : {0.1, 0.5, 1.0, 1.5, 2.7, 5.0, 10.5, 30.0, 100.0, 170.5, -0.5, -1.5, -2.3, -10.7}) {
    CAPTURE(x);
    CHECK(rel(fracdiff::gamma(x), std::tgamma(x)) < 1e-14);
    CHECK(std::abs(fracdiff::lgamma(x) - std::lgamma(x)) < 1e-13 * std::max(1.0, std::abs(std::lgamma(x))));
  }
  CHECK(fracdiff::gamma(0.5) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-15));
}

TEST_CASE("reciprocal gamma vanishes at the poles") {
  for (double x : {0.0, -1.0, -2.0, -17.0}) CHECK(rgamma(x) == 0.0);
  CHECK(rel(rgamma(-0.5), 1.0 / std::tgamma(-0.5)) < 1e-14);
  CHECK(rgamma(170.5) > 0.0);
  CHECK(rel(rgamma(170.5), 1.0 / std::tgamma(170.5)) < 1e-13);
  CHECK(rgamma(200.0) == 0.0);
  int sign = 0;
  fracdiff::lgamma(-0.5, &sign);
  CHECK(sign == -1);
  CHECK(sinpi(1.0) == 0.0);
  CHECK(sinpi(0.5) == 1.0);
}

TEST_CASE("Mittag-Leffler elementary values") {
  CHECK(ml({1.0, 1.0, -1.0}).value == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(ml({1.0, 2.0, 1.0}).value == doctest::Approx(std::numbers::e - 1.0).epsilon(1e-14));
  CHECK(ml({0.5, 1.0, -1.0}).value == doctest::Approx(std::numbers::e * std::erfc(1.0)).epsilon(1e-15));
  CHECK(ml({0.6, 1.3, 0.0}).value == doctest::Approx(1.0 / std::tgamma(1.3)).epsilon(1e-15));
  // E_{1,2}(-x) = (1 - e^{-x}) / x.
  for (double x : {0.3, 2.0, 10.0, 45.0}) {
    CHECK(rel(ml({1.0, 2.0, -x}).value, -std::expm1(-x) / x) < 1e-13);
  }
}

TEST_CASE("Mittag-Leffler against the MPFR Taylor oracle") {
  const double as[] = {0.3, 0.5, 0.6, 0.7, 0.8, 0.95, 0.999, 1.0};
  const double bs[] = {0.3, 0.5, 1.0, 1.3, 1.5, 1.8, 2.0, 2.6, -0.1, 0.0};
  const double zs[] = {-0.5, -1.2, -1.5, -3, -7, -15, -30, -50, -120, 0.5, 2, 5};
  double worst = 0.0;
  for (double a : as) {
    for (double b : bs) {
      for (double z : zs) {
        if (std::pow(std::abs(z), 1.0 / a) > 300) continue;
        const double want = mpfr_ml(a, b, z);
        const auto got = ml_general(a, b, z);
        CAPTURE(a);
        CAPTURE(b);
        CAPTURE(z);
        const double err = std::abs(got.value - want);
        CHECK(err <= std::max(1e-12 * std::abs(want), 1e-300));
        worst = std::max(worst, err / std::abs(want));
      }
    }
  }
  MESSAGE("worst relative error " << worst);
}

TEST_CASE("asymptotic branch agrees with the series oracle for large |z|") {
  const double want = mpfr_ml(0.7, 0.7, -50.0);
  CHECK(rel(ml({0.7, 0.7, -50.0}).value, want) < 1e-8);
  CHECK(ml({0.7, 0.7, -50.0}).method_used == MLMethod::asymptotic);
}

TEST_CASE("branches agree where their domains overlap") {
  for (double a : {0.4, 0.75}) {
    for (double b : {0.5, 1.0, 1.6}) {
      for (double z : {-0.9, -0.5}) {
        const double t = ml_detail::taylor(a, b, z).value;
        CHECK(rel(ml_detail::integral(a, b, z).value, t) < 1e-12);
      }
      for (double z : {-40.0, -200.0}) {
        CHECK(rel(ml_detail::asymptotic_optimal(a, b, z).value, ml_detail::integral(a, b, z).value) < 1e-11);
      }
    }
  }
  for (double b : {0.5, 1.0, 2.5}) {
    for (double x : {1.5, 8.0, 30.0}) {
      CHECK(rel(ml_detail::kummer(b, x).value, mpfr_ml(1.0, b, -x)) < 1e-12);
    }
  }
}

TEST_CASE("method selection is deterministic") {
  CHECK(ml({0.5, 1.0, -0.5}).method_used == MLMethod::taylor);
  CHECK(ml({0.5, 1.0, -100.0}).method_used == MLMethod::asymptotic);
  CHECK(ml({1.0, 1.5, -20.0}).method_used == MLMethod::kummer);
  CHECK(method_name(MLMethod::integral) == "integral");
  const auto a = ml({0.63, 0.9, -4.2});
  const auto b = ml({0.63, 0.9, -4.2});
  CHECK(a.value == b.value);
  CHECK(a.method_used == b.method_used);
}

TEST_CASE("invalid Mittag-Leffler parameters") {
  CHECK_THROWS_AS(ml({0.0, 1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(ml({1.2, 1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(ml({0.5, 0.0, -1.0}), DomainError);
  CHECK_THROWS_AS(ml({0.5, 1.0, std::nan("")}), DomainError);
  CHECK_THROWS_AS(ml({0.5, 1.0, 1e6}), OverflowError);
}

TEST_CASE("derivative identity") {
  CHECK(ml_derivative({1.0, 1.0, -1.0}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
  CHECK(ml_derivative({1.0, 2.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-13));
  // Finite difference of the erfc identity.
  auto f = [](double z) { return std::exp(z * z) * std::erfc(-z); };
  const double h = 1e-5;
  const double fd = (f(-1.0 + h) - f(-1.0 - h)) / (2 * h);
  CHECK(ml_derivative({0.5, 1.0, -1.0}) == doctest::Approx(fd).epsilon(1e-8));
  CHECK_THROWS_AS(ml_derivative({0.5, 1.0, 0.0}), DomainError);
}

TEST_CASE("algebraic expansion") {
  const auto one = ml_asymptotic({0.5, 1.0, -100.0}, 1);
  CHECK(one.value == doctest::Approx(1.0 / (100.0 * std::sqrt(std::numbers::pi))).epsilon(1e-14));
  CHECK(rel(one.value, ml({0.5, 1.0, -100.0}).value) < 1e-3);
  const auto exp_case = ml_asymptotic({1.0, 1.0, -30.0}, 3);
  CHECK(exp_case.value == 0.0);
  CHECK(exp_case.degenerate_terms == std::vector<int>{1, 2, 3});
  // The Taylor series is out of reach at |z| = 1e4; the integral
  // representation serves as the independent reference.
  const double want = ml_detail::integral(0.6, 0.3, -1e4).value;
  CHECK(std::abs(ml_asymptotic({0.6, 0.3, -1e4}, 2).value - want) < 1e-11);
}

TEST_CASE("bound constant M") {
  const std::vector<double> origin = {0.0};
  CHECK(ml_bound_check(0.9, origin) == doctest::Approx(1.0).epsilon(1e-15));
  std::vector<double> grid;
  for (int k = 0; k <= 120; ++k) grid.push_back(std::pow(10.0, -2.0 + 6.0 * k / 120.0));
  for (double a : {0.3, 0.5}) {
    const double m = ml_bound_check(a, grid);
    CHECK(std::isfinite(m));
    CHECK(m > 0.99);
    std::vector<double> fine;
    for (int k = 0; k <= 480; ++k) fine.push_back(std::pow(10.0, -2.0 + 6.0 * k / 480.0));
    CHECK(ml_bound_check(a, fine) == doctest::Approx(m).epsilon(1e-2));
  }
}
