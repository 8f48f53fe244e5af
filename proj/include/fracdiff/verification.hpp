#pragma once

// Executable checks of the analytic properties of the fractional diffusion
// problem on finite sample grids. Each check returns a CheckReport and never
// throws for a well-formed input; a pass is numerical evidence only.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "fracdiff/spectral_solver.hpp"

namespace fracdiff {

struct CheckReport {
  std::string name;
  bool passed = false;
  // False when a hypothesis of the underlying theorem fails on the samples;
  // the check then says nothing and `passed` is false.
  bool applicable = true;
  double measured = 0.0;
  double bound = 0.0;
  std::string details;
};

// Space-time samples: every `x_stride`-th eigen grid node and `t_samples`
// equally spaced times in (0, T] plus t = 0.
struct SampleGrid {
  std::size_t x_stride = 20;
  std::size_t t_samples = 100;
};

// With F <= 0 the positive maximum of u is attained on the parabolic boundary
// (t = 0 or x in {0, l}). measured = max interior u - max(0, boundary max),
// bound = 1e-6 (1 + |boundary max|). `require_hypothesis = false` evaluates
// the inequality even when F > 0 somewhere (negative controls).
CheckReport check_maximum_principle(const SpectralSolution& sol, const ProblemSpec& spec,
                                    const SampleGrid& grid = {}, bool require_hypothesis = true);
// The mirror statement: with F >= 0 the negative minimum lies on the parabolic boundary.
CheckReport check_minimum_principle(const SpectralSolution& sol, const ProblemSpec& spec,
                                    const SampleGrid& grid = {}, bool require_hypothesis = true);

// ||u - u~|| <= max(eps0, eps1) + T^a / Gamma(1 + a) eps. Throws
// PreconditionError if the specs differ in anything but data, or if the
// sampled data distances exceed eps (source), eps0 (initial), eps1 (boundary).
CheckReport check_stability(const ProblemSpec& a, const ProblemSpec& b, double eps, double eps0,
                            double eps1, const SampleGrid& grid = {});
// Same check on already computed solutions sharing one eigen system.
CheckReport check_stability(const ProblemSpec& a, const SpectralSolution& sa, const ProblemSpec& b,
                            const SpectralSolution& sb, double eps, double eps0, double eps1,
                            const SampleGrid& grid = {});

// Frozen scheme-error model of the residual check:
//   bound = S (C1 (dt^{2-a} + L) + C2 h^2) + source truncation + initial tail,
// with S = max(1, sum_i lambda_i (|c_i| + max_t |Duhamel_i|) + max|phi1| + max|phi2|)
// and the initial-layer term L = (dt / t_min)^{min(2-a, 1+a)} that the L1
// truncation error picks up from the t^a behaviour of the solution (at a = 1,
// from stiff modes: lambda^2 e^{-lambda t} dt <= lambda dt / (e t)).
// C1 = 1/2 is the backward-difference constant at a = 1; C2 = 0 because the
// modes satisfy the discrete spatial operator exactly at the nodes.
inline constexpr double kResidualC1 = 0.5;
inline constexpr double kResidualC2 = 0.0;

// Residual |D^a u - (p u')' + q u - F| with the L1 scheme in time and the
// conservative second difference in space, on the solution's time grid and
// every `x_stride`-th node, for t >= t_min. The report also requires the
// initial mismatch to stay within the coefficient tail times max |X_i| and the boundary
// mismatch within 1e-8 of the data scale. t_min must be at least 10 dt.
CheckReport check_residual(const SpectralSolution& sol, const ProblemSpec& spec, double t_min,
                           std::size_t x_stride = 10);

// Log-log slope of the modal response to the source t^{b-1} E_{a,b}(-lambda t^a)
// on [t_lo, t_hi]; predicted b - a - 1 (a != b) or -a - 1 (a = b); bound 0.05.
// Throws DomainError unless t_lo >= 100 and t_hi >= 100 t_lo, or if the
// response changes sign in the window and in the once-shrunk window.
CheckReport asymptotic_slope(double alpha, double beta, double lambda, double lambda_k, double t_lo,
                             double t_hi, std::size_t n_pts);

// Solves at `levels` resolutions, each doubling n_modes, the grid intervals
// and the time steps, and once more with the mode sum taken in reverse order.
// measured = discrepancy between the two finest levels; bound = half the
// previous discrepancy (or 1e-8 if that is already below 1e-8).
CheckReport check_uniqueness_evidence(const ProblemSpec& spec, std::size_t levels = 3,
                                      const SampleGrid& grid = {});

std::string to_json(const CheckReport& r);
void write_jsonl(std::ostream& os, const std::vector<CheckReport>& reports);
std::string to_text(const CheckReport& r);

}  // namespace fracdiff
