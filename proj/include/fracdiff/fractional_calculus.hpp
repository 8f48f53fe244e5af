#pragma once

// Discrete fractional operators on sampled functions of time:
//   - Caputo derivative  D^a f = I^{1-a} f'  by the L1 scheme (order 2 - a),
//   - Riemann-Liouville integral I^a f by product trapezoidal weights,
// and the analytic power rule D^a t^b = Gamma(1+b)/Gamma(1-a+b) t^{b-a}
// used as an oracle throughout the tests.

#include <cstddef>
#include <span>
#include <vector>

namespace fracdiff {

// Strictly increasing time nodes starting exactly at 0.
class TimeGrid {
 public:
  static TimeGrid uniform(double horizon, std::size_t steps);
  // Detects uniform spacing (to 1e-12 relative) automatically.
  static TimeGrid from_nodes(std::vector<double> nodes);

  const std::vector<double>& nodes() const noexcept { return t_; }
  std::size_t size() const noexcept { return t_.size(); }
  bool is_uniform() const noexcept { return uniform_; }
  // Step of a uniform grid; 0 otherwise.
  double dt() const noexcept { return dt_; }
  double operator[](std::size_t i) const noexcept { return t_[i]; }

 private:
  std::vector<double> t_;
  bool uniform_ = false;
  double dt_ = 0.0;
};

struct SampledFunction {
  TimeGrid grid;
  std::vector<double> values;
  // Nodes before this index carry no value (NaN); the Caputo derivative is
  // not available at t = 0.
  std::size_t first_valid = 0;

  // Throws InputError on length mismatch or non-finite valid samples.
  void validate() const;
};

SampledFunction sample(const TimeGrid& grid, double (*f)(double));

template <class F>
SampledFunction sample(const TimeGrid& grid, F&& f) {
  SampledFunction s{grid, std::vector<double>(grid.size()), 0};
  for (std::size_t i = 0; i < grid.size(); ++i) s.values[i] = f(grid[i]);
  return s;
}

// L1 discrete Caputo derivative at nodes t[1..]; values[0] is NaN.
// For alpha = 1 this is the backward difference quotient.
// Throws DomainError for alpha outside (0, 1], InputError for non-uniform
// grids or fewer than 3 nodes.
SampledFunction caputo_l1(const SampledFunction& f, double alpha);

// Raw L1 sums for uniformly spaced samples v[0..n): out[k] for k >= 1, out[0] = NaN.
std::vector<double> caputo_l1_values(std::span<const double> v, double dt, double alpha);

// L1 weights b_k = (k+1)^{1-a} - k^{1-a}, k = 0..n-1 (b_0 = 1, rest 0 for a = 1).
std::vector<double> l1_weights(std::size_t n, double alpha);

// Exact Caputo derivative of t^beta (beta > 0).
double caputo_power(double alpha, double beta, double t);

// Product-trapezoidal Riemann-Liouville integral of order alpha >= 0 on a
// uniform grid. alpha = 0 returns the samples unchanged.
SampledFunction rl_integral(const SampledFunction& f, double alpha);

}  // namespace fracdiff
