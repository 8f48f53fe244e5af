#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <memory>
#include <numbers>
#include <sstream>

#include "fracdiff/error.hpp"
#include "fracdiff/mittag_leffler.hpp"
#include "fracdiff/verification.hpp"

using namespace fracdiff;

namespace {

constexpr double kPi = std::numbers::pi;

ProblemSpec single_mode(double alpha, std::size_t steps) {
  ProblemSpec s;
  s.alpha = alpha;
  s.length = kPi;
  s.T = 1.0;
  s.u0 = parse("sqrt(2/pi)*sin(x)");
  s.n_modes = 8;
  s.n_time_steps = steps;
  return s;
}

}  // namespace

TEST_CASE("maximum principle holds for decaying data") {
  ProblemSpec s;
  s.alpha = 0.5;
  s.u0 = parse("sin(pi*x)");
  s.n_modes = 16;
  s.grid_size = 501;
  s.n_time_steps = 100;
  const auto sol = solve(s);
  const auto r = check_maximum_principle(sol, s);
  CHECK(r.applicable);
  CHECK(r.passed);
  CHECK(r.measured <= 0.0);
}

TEST_CASE("zero solution passes both principles with measured 0") {
  ProblemSpec s;
  s.grid_size = 201;
  s.n_modes = 4;
  s.n_time_steps = 20;
  const auto sol = solve(s);
  const auto mx = check_maximum_principle(sol, s);
  const auto mn = check_minimum_principle(sol, s);
  CHECK(mx.passed);
  CHECK(mx.measured == 0.0);
  CHECK(mn.passed);
  CHECK(mn.measured == 0.0);
}

TEST_CASE("positive source: principle inapplicable, violation visible when forced") {
  ProblemSpec s;
  s.F = parse("1");
  s.grid_size = 401;
  s.n_modes = 32;
  s.n_time_steps = 100;
  const auto sol = solve(s);
  const auto r = check_maximum_principle(sol, s);
  CHECK_FALSE(r.applicable);
  CHECK_FALSE(r.passed);
  const auto forced = check_maximum_principle(sol, s, {}, false);
  CHECK_FALSE(forced.passed);
  CHECK(forced.measured > 0.0);
  // The same source keeps the minimum on the boundary.
  const auto mn = check_minimum_principle(sol, s);
  CHECK(mn.applicable);
  CHECK(mn.passed);
}

TEST_CASE("stability estimate") {
  auto a = single_mode(0.5, 100);
  CHECK(check_stability(a, a, 0.0, 0.0, 0.0).measured == 0.0);

  auto b = a;
  b.F = parse("0.01");
  const auto r = check_stability(a, b, 0.01, 0.0, 0.0);
  CHECK(r.passed);
  CHECK(r.bound == doctest::Approx(0.01 / std::tgamma(1.5)).epsilon(1e-14));

  auto c = a;
  c.u0 = parse("sqrt(2/pi)*sin(x) + 0.05*sin(x)");
  const auto rc = check_stability(a, c, 0.0, 0.05, 0.0);
  CHECK(rc.passed);
  CHECK(rc.measured == doctest::Approx(0.05).epsilon(1e-3));

  CHECK_THROWS_AS(check_stability(a, b, 0.001, 0.0, 0.0), PreconditionError);
  auto other = b;
  other.alpha = 0.6;
  CHECK_THROWS_AS(check_stability(a, other, 1.0, 1.0, 1.0), PreconditionError);
}

TEST_CASE("residual check") {
  const auto s = single_mode(0.5, 1000);
  const auto sol = solve(s);
  const auto r = check_residual(sol, s, 1e-2);
  CHECK(r.passed);
  auto bad = sol;
  bad.c[0] *= 1.01;
  CHECK_FALSE(check_residual(bad, s, 1e-2).passed);
  CHECK_FALSE(check_residual(sol, s, 1e-3).applicable);

  const auto heat = single_mode(1.0, 10000);
  const auto hsol = solve(heat);
  const auto hr = check_residual(hsol, heat, 1e-3, 50);
  CHECK(hr.passed);
  CHECK(hr.measured <= 1e-4);
}

TEST_CASE("residual check with sources and boundary data") {
  ProblemSpec s;
  s.alpha = 0.7;
  s.length = 1.0;
  s.p = parse("1+x");
  s.q = parse("1");
  s.u0 = parse("x + sin(pi*x)");
  s.phi2 = parse("1 + t");
  s.F = parse("x*exp(-t)");
  s.n_modes = 64;
  s.grid_size = 1001;
  s.n_time_steps = 500;
  const auto sol = solve(s);
  const auto r = check_residual(sol, s, 0.02);
  INFO(to_text(r));
  CHECK(r.passed);
}

TEST_CASE("asymptotic slopes") {
  const auto a = asymptotic_slope(0.6, 0.3, 1.0, 4.0, 1e2, 1e4, 41);
  CHECK(a.passed);
  const auto b = asymptotic_slope(0.5, 0.5, 1.0, 4.0, 1e2, 1e4, 41);
  CHECK(b.passed);
  const auto res = asymptotic_slope(0.5, 0.5, 4.0, 4.0, 1e2, 1e4, 41);
  CHECK(res.passed);
  CHECK_THROWS_AS(asymptotic_slope(0.5, 0.5, 1.0, 4.0, 10.0, 1e4, 41), DomainError);
  CHECK_THROWS_AS(asymptotic_slope(0.5, 0.5, 1.0, 4.0, 1e2, 1e3, 41), DomainError);
}

TEST_CASE("uniqueness evidence") {
  ProblemSpec s;
  s.alpha = 0.5;
  s.u0 = parse("x*(1-x)");
  s.n_modes = 32;
  s.grid_size = 801;
  s.n_time_steps = 200;
  const auto r = check_uniqueness_evidence(s, 3);
  CHECK(r.passed);
  CHECK(r.details.find("successive discrepancies") != std::string::npos);

  auto single = single_mode(0.5, 200);
  const auto rs = check_uniqueness_evidence(single, 3);
  CHECK(rs.passed);
  CHECK(rs.measured < 1e-6);
}

TEST_CASE("uniqueness report on rough data") {
  ProblemSpec s;
  s.alpha = 0.5;
  s.u0 = parse("((x-0.25)/sqrt((x-0.25)^2+1e-30) - (x-0.75)/sqrt((x-0.75)^2+1e-30))/2");
  s.n_modes = 64;
  s.grid_size = 801;
  s.n_time_steps = 100;
  const auto r = check_uniqueness_evidence(s, 2);
  CHECK(std::isfinite(r.measured));
  CHECK_FALSE(r.details.empty());
}

TEST_CASE("checks are deterministic") {
  const auto s = single_mode(0.5, 100);
  const auto a = check_uniqueness_evidence(s, 2);
  const auto b = check_uniqueness_evidence(s, 2);
  CHECK(to_json(a) == to_json(b));
}

TEST_CASE("report serialization") {
  CheckReport r{"residual", true, true, 1.5e-3, 2e-3, "dt 0.001"};
  const auto j = nlohmann::json::parse(to_json(r));
  CHECK(j["name"] == "residual");
  CHECK(j["passed"] == true);
  CHECK(j["measured"].get<double>() == 1.5e-3);
  CheckReport n{"stability", false, false, std::nan(""), std::nan(""), ""};
  CHECK(nlohmann::json::parse(to_json(n))["measured"].is_null());
  std::ostringstream os;
  write_jsonl(os, {r, n});
  const std::string lines = os.str();
  CHECK(std::count(lines.begin(), lines.end(), '\n') == 2);
  CHECK(to_text(r).rfind("PASS residual", 0) == 0);
  CHECK(to_text(n).rfind("SKIP stability", 0) == 0);
}
