#include "fracdiff/gamma.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace fracdiff {

namespace {

constexpr double kLanczosG = 607.0 / 128.0;
constexpr double kLanczosCoef[15] = {
    0.99999999999999709182,     57.156235665862923517,      -59.597960355475491248,
    14.136097974741747174,      -0.49191381609762019978,    .33994649984811888699e-4,
    .46523628927048575665e-4,   -.98374475304879564677e-4,  .15808870322491248884e-3,
    -.21026444172410488319e-3,  .21743961811521264320e-3,   -.16431810653676389022e-3,
    .84418223983852743293e-4,   -.26190838401581408670e-4,  .36899182659531622704e-5};

// Lanczos sum for Gamma(z + 1).
double lanczos_sum(double z) {
  double sum = kLanczosCoef[0];
  for (int k = 14; k >= 1; --k) sum += kLanczosCoef[k] / (z + k);
  return sum;
}

bool is_pole(double x) { return x <= 0.0 && x == std::floor(x); }

}  // namespace

double sinpi(double x) {
  if (!std::isfinite(x)) return std::numeric_limits<double>::quiet_NaN();
  double r = std::fmod(x, 2.0);  // (-2, 2)
  if (r > 1.0) r -= 2.0;
  if (r < -1.0) r += 2.0;
  // r in [-1, 1]; fold into [-1/2, 1/2] where sin(pi r) is relatively accurate.
  if (r > 0.5) return std::sin(std::numbers::pi * (1.0 - r));
  if (r < -0.5) return -std::sin(std::numbers::pi * (1.0 + r));
  return std::sin(std::numbers::pi * r);
}

double gamma(double x) {
  if (std::isnan(x)) return x;
  if (is_pole(x)) return std::copysign(std::numeric_limits<double>::infinity(), 1.0);
  if (x < 0.5) {
    const double s = sinpi(x);
    return std::numbers::pi / (s * gamma(1.0 - x));
  }
  if (x > 171.7) return std::numeric_limits<double>::infinity();
  const double z = x - 1.0;
  const double t = z + kLanczosG + 0.5;
  const double half = 0.5 * (z + 0.5);
  const double p = std::pow(t, half);
  const double sqrt_two_pi = 2.5066282746310005024;
  return sqrt_two_pi * lanczos_sum(z) * (p * std::exp(-t)) * p;
}

double lgamma(double x, int* sign) {
  if (is_pole(x)) {
    if (sign) *sign = 1;
    return std::numeric_limits<double>::infinity();
  }
  if (x < 0.5) {
    const double s = sinpi(x);
    int inner = 1;
    const double lg = std::log(std::numbers::pi / std::abs(s)) - lgamma(1.0 - x, &inner);
    if (sign) *sign = (s < 0 ? -1 : 1) * inner;
    return lg;
  }
  if (sign) *sign = 1;
  if (x < 15.0) return std::log(gamma(x));
  const double z = x - 1.0;
  const double t = z + kLanczosG + 0.5;
  const double log_sqrt_two_pi = 0.91893853320467274178;
  return log_sqrt_two_pi + (z + 0.5) * std::log(t) - t + std::log(lanczos_sum(z));
}

double rgamma(double x) {
  if (is_pole(x)) return 0.0;
  if (x < 0.5) {
    // 1/Gamma(x) = sin(pi x) Gamma(1 - x) / pi
    const double g = gamma(1.0 - x);
    if (std::isinf(g)) {
      int sgn = 1;
      const double lg = lgamma(x, &sgn);
      return sgn * std::exp(-lg);
    }
    return sinpi(x) * g / std::numbers::pi;
  }
  if (x < 170.0) return 1.0 / gamma(x);
  return std::exp(-lgamma(x));
}

}  // namespace fracdiff
