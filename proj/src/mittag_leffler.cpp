#include "fracdiff/mittag_leffler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fracdiff/error.hpp"
#include "fracdiff/gamma.hpp"
#include "fracdiff/quadrature.hpp"

namespace fracdiff {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Largest z^{1/alpha} for which exp() of it stays finite with room for the
// algebraic prefactor.
constexpr double kMaxExponent = 700.0;

// Above this |z| the alpha = 1 positive series is replaced by the (then
// exponentially accurate) algebraic expansion.
constexpr double kKummerLimit = 600.0;

// alpha = 1, z > 0: Taylor terms are all positive, so the series is usable up
// to the point where 500 terms still converge.
constexpr double kExpTaylorLimit = 100.0;

// Accept the asymptotic branch when its first omitted term is below this
// fraction of the sum.
constexpr double kAsymptoticAcceptance = 1e-15;

[[noreturn]] void throw_domain(const char* what, double alpha, double beta, double z) {
  std::ostringstream os;
  os.precision(17);
  os << "Mittag-Leffler E_{alpha,beta}(z): " << what << " (alpha=" << alpha << ", beta=" << beta
     << ", z=" << z << ")";
  throw DomainError(os.str());
}

void check_order(double alpha, double beta, double z) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw_domain("alpha must lie in (0, 1]", alpha, beta, z);
  if (!std::isfinite(beta)) throw_domain("beta must be finite", alpha, beta, z);
  if (!std::isfinite(z)) throw_domain("z must be finite", alpha, beta, z);
}

MLResult exponential_residue_plus_algebraic(double beta, double z) {
  // alpha = 1, large z > 0: E_{1,b}(z) = z^{1-b} e^z - sum_k z^{-k}/Gamma(b-k) + O(e^{-z}) corrections
  if (z > kMaxExponent) throw OverflowError("Mittag-Leffler value exceeds double range");
  const double lead = std::pow(z, 1.0 - beta) * std::exp(z);
  double sum = 0.0;
  double zpow = 1.0;
  for (int k = 1; k <= 30; ++k) {
    zpow /= z;
    sum -= zpow * rgamma(beta - k);
  }
  return {lead + sum, MLMethod::asymptotic, 4 * kEps * (std::abs(lead) + std::abs(sum))};
}

}  // namespace

std::string_view method_name(MLMethod m) noexcept {
  switch (m) {
    case MLMethod::taylor:
      return "taylor";
    case MLMethod::asymptotic:
      return "asymptotic";
    case MLMethod::integral:
      return "integral";
    case MLMethod::kummer:
      return "kummer";
  }
  return "unknown";
}

namespace ml_detail {

MLResult taylor(double alpha, double beta, double z, int max_terms) {
  double sum = 0.0;
  double abs_sum = 0.0;
  double zk = 1.0;
  double last = 0.0;
  for (int k = 0; k < max_terms; ++k) {
    const double arg = alpha * k + beta;
    const double term = zk * rgamma(arg);
    sum += term;
    abs_sum += std::abs(term);
    last = std::abs(term);
    // Gamma is increasing beyond 2, so from there on the terms shrink monotonically.
    if (k >= 1 && arg > 2.0 && last < 1e-16 * std::abs(sum)) break;
    zk *= z;
    if (zk == 0.0) break;
  }
  return {sum, MLMethod::taylor, last + 4 * kEps * abs_sum};
}

MLResult asymptotic_optimal(double alpha, double beta, double z) {
  // Individual coefficients 1/Gamma(b - a k) can be accidentally tiny near a
  // Gamma pole, so truncation is steered by the envelope
  // |1/Gamma(x)| <= Gamma(1 - x) / pi (valid for x < 0) rather than by the
  // terms themselves. The error estimate is the envelope of the first
  // omitted term.
  // The coefficients depend on (alpha, beta) only; solver loops call this
  // with one parameter pair and many z.
  struct Coefficients {
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double beta = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> rg;         // 1/Gamma(b - a k)
    std::vector<double> log_env;    // lgamma(1 - (b - a k)), for b - a k < 0
  };
  thread_local std::array<Coefficients, 8> slots;
  thread_local std::size_t next_slot = 0;
  Coefficients* found = nullptr;
  for (auto& c : slots) {
    if (c.alpha == alpha && c.beta == beta) found = &c;
  }
  if (!found) {
    found = &slots[next_slot];
    next_slot = (next_slot + 1) % slots.size();
    found->alpha = alpha;
    found->beta = beta;
    found->rg.assign(4 * kMaxAsymptoticTerms + 1, 0.0);
    found->log_env.assign(4 * kMaxAsymptoticTerms + 1, 0.0);
    for (int k = 1; k <= 4 * kMaxAsymptoticTerms; ++k) {
      const double arg = beta - alpha * k;
      found->rg[k] = rgamma(arg);
      if (arg < 0.0) found->log_env[k] = lgamma(1.0 - arg);
    }
  }
  const Coefficients& cache = *found;
  const double inv = 1.0 / z;
  const double log_abs_z = std::log(std::abs(z));
  double zpow = 1.0;
  double sum = 0.0;
  double abs_sum = 0.0;
  double prev_env = std::numeric_limits<double>::infinity();
  double omitted = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 4 * kMaxAsymptoticTerms; ++k) {
    zpow *= inv;
    const double arg = beta - alpha * k;
    double env = 0.0;
    if (arg < 0.0) {
      env = std::exp(cache.log_env[k] - k * log_abs_z) / std::numbers::pi;
      if (env >= prev_env) {
        omitted = env;
        break;
      }
      prev_env = env;
    }
    const double term = -zpow * cache.rg[k];
    if (arg >= 0.0) env = std::abs(term);
    sum += term;
    abs_sum += std::abs(term);
    omitted = env;
    if (zpow == 0.0) {
      omitted = 0.0;
      break;
    }
  }
  return {sum, MLMethod::asymptotic, omitted + 4 * kEps * abs_sum};
}

MLResult integral(double alpha, double beta, double z) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw_domain("integral form needs alpha < 1", alpha, beta, z);
  if (z == 0.0) return {rgamma(beta), MLMethod::integral, 0.0};
  if (beta >= 1.0 + alpha) {
    const MLResult lower = integral(alpha, beta - alpha, z);
    return {(lower.value - rgamma(beta - alpha)) / z, MLMethod::integral,
            (lower.est_abs_error + kEps * std::abs(rgamma(beta - alpha))) / std::abs(z)};
  }

  // E = 1/(a pi) int_0^inf s^g e^{-s^{1/a}} (s A - z B) / (s^2 - 2 s z C + z^2) ds  [+ residue]
  // with g = (1-b)/a > -1. Substituting w = s^{1+g} removes the endpoint power.
  const double g = (1.0 - beta) / alpha;
  const double gp1 = 1.0 + g;
  const double A = sinpi(1.0 - beta);
  const double B = sinpi(1.0 - beta + alpha);
  const double C = std::cos(std::numbers::pi * alpha);
  const double S = std::sin(std::numbers::pi * alpha);
  const double inv_alpha = 1.0 / alpha;

  const double r_cut = 60.0 + 5.0 * std::max(0.0, 1.0 - beta);
  const double s_max = std::pow(r_cut, alpha);
  auto w_of = [&](double s) { return std::pow(s, gp1); };

  auto h = [&](double w) {
    const double ls = std::log(w) / gp1;
    const double s = std::exp(ls);
    const double decay = std::exp(-std::exp(ls * inv_alpha));
    const double d = s - z * C;
    const double denom = d * d + (z * S) * (z * S);
    return decay * (s * A - z * B) / denom;
  };

  std::vector<double> breaks{0.0, w_of(s_max)};
  if (s_max > 1.0) breaks.push_back(w_of(1.0));
  const double az = std::abs(z);
  if (az < s_max) {
    breaks.push_back(w_of(az));
    if (0.5 * az > 0.0) breaks.push_back(w_of(0.5 * az));
    if (2.0 * az < s_max) breaks.push_back(w_of(2.0 * az));
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  double residue = 0.0;
  if (z > 0.0) {
    const double e = std::pow(z, inv_alpha);
    if (e > kMaxExponent) throw OverflowError("Mittag-Leffler value exceeds double range");
    residue = inv_alpha * std::pow(z, g) * std::exp(e);
  }
  const double scale = 1.0 / (alpha * std::numbers::pi * gp1);
  const double abs_tol = residue != 0.0 ? 1e-17 * std::abs(residue) / scale : 1e-300;
  const auto q = quad::integrate(h, breaks, 1e-14, abs_tol, 600);
  const double value = scale * q.value + residue;
  return {value, MLMethod::integral,
          scale * q.abs_error + 4 * kEps * (std::abs(residue) + std::abs(scale * q.value))};
}

MLResult kummer(double beta, double x) {
  if (!(beta > 0.0)) throw_domain("Kummer form needs beta > 0", 1.0, beta, -x);
  // e^{-x} 1F1(b-1; b; x) = sum_k p_k w_k with Poisson weights p_k = e^{-x} x^k / k!
  // and w_k = (b-1)/(b-1+k) (w_0 = 1).
  const double bm1 = beta - 1.0;
  double p = std::exp(-x);
  double sum = p;
  double abs_sum = p;
  double last = p;
  for (int k = 1; k < 100000; ++k) {
    p *= x / k;
    if (bm1 == 0.0) break;
    const double term = p * bm1 / (bm1 + k);
    sum += term;
    abs_sum += std::abs(term);
    last = std::abs(term);
    if (k > x && last < 1e-17 * std::abs(sum)) break;
  }
  const double rg = rgamma(beta);
  return {rg * sum, MLMethod::kummer, std::abs(rg) * (last + 8 * kEps * abs_sum)};
}

}  // namespace ml_detail

MLResult ml_general(double alpha, double beta, double z) {
  check_order(alpha, beta, z);
  if (z == 0.0) return {rgamma(beta), MLMethod::taylor, 0.0};

  if (alpha == 1.0) {
    if (beta == 1.0) return {std::exp(z), MLMethod::taylor, kEps * std::exp(z)};
    if (z > 0.0) {
      if (z <= kExpTaylorLimit) return ml_detail::taylor(1.0, beta, z);
      return exponential_residue_plus_algebraic(beta, z);
    }
    if (-z <= ml_detail::kTaylorRadius) return ml_detail::taylor(1.0, beta, z);
    if (beta <= 0.0) {
      // E_{1,b}(z) = 1/Gamma(b) + z E_{1,b+1}(z)
      const MLResult up = ml_general(1.0, beta + 1.0, z);
      return {rgamma(beta) + z * up.value, up.method_used,
              std::abs(z) * up.est_abs_error + kEps * std::abs(rgamma(beta))};
    }
    if (-z <= kKummerLimit) return ml_detail::kummer(beta, -z);
    return ml_detail::asymptotic_optimal(1.0, beta, z);
  }

  if (std::abs(z) <= ml_detail::kTaylorRadius) return ml_detail::taylor(alpha, beta, z);
  if (z < 0.0) {
    const MLResult asym = ml_detail::asymptotic_optimal(alpha, beta, z);
    if (asym.value != 0.0 && asym.est_abs_error <= kAsymptoticAcceptance * std::abs(asym.value)) {
      return asym;
    }
  }
  return ml_detail::integral(alpha, beta, z);
}

MLResult ml(const MLParams& params) {
  check_order(params.alpha, params.beta, params.z);
  if (!(params.beta > 0.0)) throw_domain("beta must be positive", params.alpha, params.beta, params.z);
  return ml_general(params.alpha, params.beta, params.z);
}

double ml_derivative(const MLParams& params) {
  const auto [alpha, beta, z] = params;
  check_order(alpha, beta, z);
  if (!(beta > 0.0)) throw_domain("beta must be positive", alpha, beta, z);
  if (z == 0.0) {
    throw_domain("derivative identity is singular at z = 0 (use 1/Gamma(alpha+beta))", alpha, beta,
                 z);
  }
  const double lower = ml_value(alpha, beta - 1.0, z);
  const double same = ml_value(alpha, beta, z);
  return (lower - (beta - 1.0) * same) / (alpha * z);
}

AsymptoticSum ml_asymptotic(const MLParams& params, int p) {
  const auto [alpha, beta, z] = params;
  check_order(alpha, beta, z);
  if (!(z < 0.0)) throw_domain("asymptotic expansion is for z < 0", alpha, beta, z);
  if (p < 1 || p > kMaxAsymptoticTerms) throw_domain("term count out of range", alpha, beta, z);
  AsymptoticSum out;
  const double inv = 1.0 / z;
  double zpow = 1.0;
  for (int k = 1; k <= p; ++k) {
    zpow *= inv;
    const double arg = beta - alpha * k;
    if (arg <= 0.0 && arg == std::floor(arg)) {
      out.degenerate_terms.push_back(k);
      continue;
    }
    out.value -= zpow * rgamma(arg);
  }
  return out;
}

double ml_bound_check(double alpha, std::span<const double> x_grid) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw_domain("bound check needs 0 < alpha < 1", alpha, 1.0, 0.0);
  double m = 0.0;
  for (double x : x_grid) {
    if (!(x >= 0.0)) throw_domain("grid points must be nonnegative", alpha, 1.0, -x);
    m = std::max(m, std::abs(ml_value(alpha, 1.0, -x)) * (1.0 + x));
  }
  return m;
}

}  // namespace fracdiff
