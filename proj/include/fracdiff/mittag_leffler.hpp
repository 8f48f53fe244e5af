#pragma once

// Two-parameter Mittag-Leffler function
//
//   E_{a,b}(z) = sum_{k>=0} z^k / Gamma(a k + b),   0 < a <= 1, real z,
//
// the time-dependence of every series solution of the fractional diffusion
// problem. Evaluation picks one of several representations from (a, b, z)
// alone, so the chosen method is deterministic:
//
//   |z| <= 1                 Taylor series with running powers
//   a < 1, z < -1            asymptotic expansion truncated at its smallest
//                            term, if that term is below 1e-15 |sum|;
//                            otherwise the real-axis integral representation
//   a < 1, z > 1             exponential residue plus the same integral
//   a = 1                    exp(z) for b = 1; a Kummer-transformed positive
//                            series for z < -1; Taylor / residue for z > 0
//
// The integral representation requires b < 1 + a; larger b are reduced with
// E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a)) / z.

#include <span>
#include <string_view>
#include <vector>

namespace fracdiff {

struct MLParams {
  double alpha = 1.0;
  double beta = 1.0;
  double z = 0.0;
};

enum class MLMethod { taylor, asymptotic, integral, kummer };

std::string_view method_name(MLMethod m) noexcept;

struct MLResult {
  double value = 0.0;
  MLMethod method_used = MLMethod::taylor;
  double est_abs_error = 0.0;
};

// Validated entry point: alpha in (0, 1], beta > 0, z finite.
// Throws DomainError on bad parameters and OverflowError when z > 0 is large
// enough that E exceeds the double range.
MLResult ml(const MLParams& params);

// Same evaluation without the beta > 0 restriction (beta only has to be
// finite). The solver needs E_{a,b} with b <= 0 in closed forms and in the
// derivative identity.
MLResult ml_general(double alpha, double beta, double z);

inline double ml_value(double alpha, double beta, double z) {
  return ml_general(alpha, beta, z).value;
}

// dE_{a,b}/dz from E'_{a,b}(z) = (E_{a,b-1}(z) - (b-1) E_{a,b}(z)) / (a z).
// Throws DomainError at z = 0, where the identity is singular; the derivative
// there is 1/Gamma(a+b).
double ml_derivative(const MLParams& params);

struct AsymptoticSum {
  double value = 0.0;
  // Indices k whose coefficient 1/Gamma(b - a k) vanishes (Gamma pole).
  std::vector<int> degenerate_terms;
};

inline constexpr int kMaxAsymptoticTerms = 64;

// p-term algebraic expansion for z < 0:
//   E_{a,b}(z) ~ -sum_{k=1}^{p} z^{-k} / Gamma(b - a k).
AsymptoticSum ml_asymptotic(const MLParams& params, int p);

// Empirical constant M = max_x |E_a(-x)| (1 + x) over a grid of x >= 0.
double ml_bound_check(double alpha, std::span<const double> x_grid);

// Individual representations, exposed for branch-consistency testing.
namespace ml_detail {

inline constexpr int kTaylorMaxTerms = 500;
inline constexpr double kTaylorRadius = 1.0;

MLResult taylor(double alpha, double beta, double z, int max_terms = kTaylorMaxTerms);

// Asymptotic expansion truncated before its smallest nonzero term (z < 0).
// est_abs_error is the magnitude of that first omitted term.
MLResult asymptotic_optimal(double alpha, double beta, double z);

// Real-axis integral representation, alpha < 1, z != 0. Any finite beta.
MLResult integral(double alpha, double beta, double z);

// alpha = 1, z = -x < 0, beta > 0: E_{1,b}(-x) = e^{-x} 1F1(b-1; b; x) / Gamma(b).
MLResult kummer(double beta, double x);

}  // namespace ml_detail

}  // namespace fracdiff
