#include "fracdiff/fractional_calculus.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "fracdiff/error.hpp"
#include "fracdiff/gamma.hpp"
#include "fracdiff/kernels.hpp"

namespace fracdiff {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_uniform(const SampledFunction& f, std::size_t min_nodes) {
  f.validate();
  if (!f.grid.is_uniform()) throw InputError("discrete fractional operators need a uniform grid");
  if (f.grid.size() < min_nodes) {
    std::ostringstream os;
    os << "grid has " << f.grid.size() << " nodes; at least " << min_nodes << " required";
    throw InputError(os.str());
  }
}

}  // namespace

TimeGrid TimeGrid::uniform(double horizon, std::size_t steps) {
  if (!(horizon > 0.0) || steps == 0) throw InputError("uniform grid needs horizon > 0 and steps >= 1");
  TimeGrid g;
  g.t_.resize(steps + 1);
  g.dt_ = horizon / static_cast<double>(steps);
  for (std::size_t k = 0; k <= steps; ++k) g.t_[k] = static_cast<double>(k) * g.dt_;
  g.t_.back() = horizon;
  g.uniform_ = true;
  return g;
}

TimeGrid TimeGrid::from_nodes(std::vector<double> nodes) {
  if (nodes.empty() || nodes.front() != 0.0) throw InputError("time grid must start exactly at 0");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) throw InputError("time grid must be strictly increasing");
  }
  TimeGrid g;
  g.t_ = std::move(nodes);
  if (g.t_.size() >= 2) {
    const double dt = g.t_[1];
    bool uniform = true;
    for (std::size_t k = 1; k < g.t_.size() && uniform; ++k) {
      const double expect = static_cast<double>(k) * dt;
      uniform = std::abs(g.t_[k] - expect) <= 1e-12 * expect;
    }
    g.uniform_ = uniform;
    g.dt_ = uniform ? dt : 0.0;
  }
  return g;
}

void SampledFunction::validate() const {
  if (values.size() != grid.size()) throw InputError("sample count does not match grid size");
  for (std::size_t i = first_valid; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw InputError("non-finite sample value");
  }
}

SampledFunction sample(const TimeGrid& grid, double (*f)(double)) {
  return sample<double (*)(double)>(grid, std::move(f));
}

std::vector<double> l1_weights(std::size_t n, double alpha) {
  std::vector<double> b(n, 0.0);
  if (n == 0) return b;
  if (alpha == 1.0) {
    b[0] = 1.0;
    return b;
  }
  const double e = 1.0 - alpha;
  double prev = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double next = std::pow(static_cast<double>(k + 1), e);
    b[k] = next - prev;
    prev = next;
  }
  return b;
}

std::vector<double> caputo_l1_values(std::span<const double> v, double dt, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("Caputo order must lie in (0, 1]");
  const std::size_t n = v.size();
  std::vector<double> out(n, kNaN);
  if (n < 2) return out;
  const std::size_t steps = n - 1;
  // drev[j] = v[steps - j] - v[steps - j - 1], so d_{m-k} sits contiguously for dot().
  std::vector<double> drev(steps);
  for (std::size_t j = 0; j < steps; ++j) drev[j] = v[steps - j] - v[steps - j - 1];
  const double scale = std::pow(dt, -alpha) * rgamma(2.0 - alpha);
  if (alpha == 1.0) {
    // Only b_0 is nonzero: the backward difference quotient.
    for (std::size_t m = 1; m <= steps; ++m) out[m] = scale * drev[steps - m];
    return out;
  }
  const auto b = l1_weights(steps, alpha);
  for (std::size_t m = 1; m <= steps; ++m) {
    const std::span<const double> w(b.data(), m);
    const std::span<const double> d(drev.data() + (steps - m), m);
    out[m] = scale * kernels::dot(w, d);
  }
  return out;
}

SampledFunction caputo_l1(const SampledFunction& f, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("Caputo order must lie in (0, 1]");
  require_uniform(f, 3);
  if (f.first_valid != 0) throw InputError("Caputo derivative needs the sample at t = 0");
  SampledFunction out{f.grid, caputo_l1_values(f.values, f.grid.dt(), alpha), 1};
  return out;
}

double caputo_power(double alpha, double beta, double t) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("Caputo order must lie in (0, 1]");
  if (!(beta > 0.0)) throw DomainError("power rule needs beta > 0");
  if (!(t >= 0.0)) throw DomainError("power rule needs t >= 0");
  return gamma(1.0 + beta) * rgamma(1.0 - alpha + beta) * std::pow(t, beta - alpha);
}

SampledFunction rl_integral(const SampledFunction& f, double alpha) {
  if (!(alpha >= 0.0)) throw DomainError("fractional integral order must be >= 0");
  if (alpha == 0.0) {
    f.validate();
    return f;
  }
  require_uniform(f, 2);
  if (f.first_valid != 0) throw InputError("fractional integral needs every sample");
  const std::size_t steps = f.grid.size() - 1;
  const double a1 = alpha + 1.0;
  // Interior weights c_m = (m+1)^{a+1} - 2 m^{a+1} + (m-1)^{a+1}, c_0 = 1.
  std::vector<double> pw(steps + 2);
  for (std::size_t m = 0; m < pw.size(); ++m) pw[m] = std::pow(static_cast<double>(m), a1);
  std::vector<double> c(steps + 1);
  c[0] = 1.0;
  for (std::size_t m = 1; m <= steps; ++m) c[m] = pw[m + 1] - 2.0 * pw[m] + pw[m - 1];
  std::vector<double> frev(steps + 1);
  for (std::size_t j = 0; j <= steps; ++j) frev[j] = f.values[steps - j];

  const double scale = std::pow(f.grid.dt(), alpha) * rgamma(alpha + 2.0);
  SampledFunction out{f.grid, std::vector<double>(steps + 1, 0.0), 0};
  for (std::size_t n = 1; n <= steps; ++n) {
    const double nm1 = static_cast<double>(n - 1);
    const double start = pw[n - 1] - (nm1 - alpha) * std::pow(static_cast<double>(n), alpha);
    // sum_{m=0}^{n-1} c_m f_{n-m}; f_{n-m} = frev[steps - n + m]
    const double inner = kernels::dot(std::span<const double>(c.data(), n),
                                      std::span<const double>(frev.data() + (steps - n), n));
    out.values[n] = scale * (start * f.values[0] + inner);
  }
  return out;
}

}  // namespace fracdiff
