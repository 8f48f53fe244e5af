#pragma once

// Series solution of the time-fractional diffusion problem
//
//   D_t^a u = (p u_x)_x - q u + F   on (0, l) x (0, T],
//   u(0, t) = phi1(t),  u(l, t) = phi2(t),  u(x, 0) = u0(x),
//
// with D_t^a the Caputo derivative, 0 < a <= 1. The Dirichlet data are
// removed by the affine lift v = u + (x/l)(phi1 - phi2) - phi1, after which
//
//   v = sum_i T_i(t) X_i(x),
//   T_i(t) = c_i E_a(-lambda_i t^a) + int_0^t s^{a-1} E_{a,a}(-lambda_i s^a) F1_i(t - s) ds,
//
// where (lambda_i, X_i) are the Sturm-Liouville eigenpairs, c_i = (v0, X_i)
// and F1_i = (F1, X_i) for the lifted source F1.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fracdiff/expression.hpp"
#include "fracdiff/fractional_calculus.hpp"
#include "fracdiff/sturm_liouville.hpp"

namespace fracdiff {

struct ProblemSpec {
  double alpha = 0.5;
  double length = 1.0;
  double T = 1.0;
  Expr p = parse("1");
  Expr q = parse("0");
  Expr u0 = parse("0");
  Expr phi1 = parse("0");
  Expr phi2 = parse("0");
  Expr F = parse("0");
  std::size_t n_modes = 64;
  std::size_t grid_size = 2001;
  std::size_t n_time_steps = 1024;

  // Parameter ranges, variable usage per field, and the corner compatibility
  // u0(0) = phi1(0), u0(l) = phi2(0) (to 1e-10). Throws InputError,
  // DomainError or CompatibilityError.
  void validate() const;
  OperatorCoefficients coefficients() const;
  bool homogeneous() const;
};

// u = v + lift, lift(x, t) = (1 - x/l) phi1(t) + (x/l) phi2(t).
struct BoundaryLift {
  Expr phi1;
  Expr phi2;
  double length = 1.0;
  bool identity = true;
  double operator()(double x, double t) const;
};

// Caputo derivative of boundary data phi(t). Catalogued forms (constants,
// c t^b, E_a(c t^a), t^{b-1} E_{a,b}(c t^a) and linear combinations) are
// differentiated analytically; anything else by quadrature of
//   Gamma(1-a)^{-1} int_0^t (t-s)^{-a} phi'(s) ds
// with phi' from finite differences (for a = 1, phi' itself).
class CaputoOfData {
 public:
  CaputoOfData(const Expr& phi, double alpha);
  double operator()(double t) const;
  bool analytic() const noexcept { return analytic_; }

 private:
  struct Term {
    enum Kind { constant, power, ml } kind;
    double coef;
    double beta;    // power exponent, or the ML second parameter
    double lambda;  // ML argument is lambda t^alpha
  };
  Expr phi_;
  double alpha_;
  bool analytic_ = false;
  std::vector<Term> terms_;
  double derivative(double t) const;
};

struct Homogenized {
  std::vector<double> v0;  // at the eigen grid nodes
  BoundaryLift lift;
  // Modal components F1_i(t), written to out[0..n_modes).
  std::function<void(double t, std::span<double> out)> modal_forcing;
  // F1 at the grid nodes.
  std::function<void(double t, std::span<double> out)> forcing_samples;
  bool zero_forcing = true;
};

Homogenized homogenize(const ProblemSpec& spec, const EigenSystem& sys);

struct TailEstimate {
  double ml_bound = 1.0;           // empirical M in |E_a(-x)| <= M / (1 + x)
  double coefficient_tail = 0.0;   // M * estimated sum_{i>n} |c_i|
  double duhamel_tail = 0.0;       // estimated sum_{i>n} max_t |Duhamel_i|
};

struct SpectralSolution {
  std::shared_ptr<const EigenSystem> sys;
  double alpha = 1.0;
  double T = 1.0;
  TimeGrid grid;
  std::vector<double> c;
  // Row-major n_modes x grid.size(); Duhamel part of T_i at the time nodes.
  std::vector<double> duhamel;
  bool has_duhamel = false;
  BoundaryLift lift;
  DecayDiagnostic decay;
  TailEstimate tail;
  std::vector<std::string> warnings;

  std::size_t n_modes() const noexcept { return c.size(); }
  std::span<const double> duhamel_row(std::size_t i) const noexcept {
    return {duhamel.data() + i * grid.size(), grid.size()};
  }
  // T_i(t), 0-based mode index; exact Mittag-Leffler part plus linearly
  // interpolated Duhamel part.
  double modal(std::size_t i, double t) const;
  void modal_all(double t, std::span<double> out) const;
};

// Pass `sys` to reuse an eigen system computed for the same operator and grid.
SpectralSolution solve(const ProblemSpec& spec, std::shared_ptr<const EigenSystem> sys = nullptr);

// F = 0 and phi1 = phi2 = 0 required (InputError otherwise).
SpectralSolution solve_homogeneous(const ProblemSpec& spec,
                                   std::shared_ptr<const EigenSystem> sys = nullptr);

// Quadrature on (0, dt) that never touches the endpoints: geometric grading
// (ratio 1/2, 60 levels) toward s = 0 with 6-point Gauss-Legendre on every
// piece. With `both_ends` the rule covers (0, dt/2) that way and appends its
// mirror image dt - s, in the same order.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule graded_rule(double dt, bool both_ends);

// 6-point Gauss-Legendre on (a, b).
QuadratureRule gauss_rule(double a, double b);

// Duhamel integral int_0^{t_n} K(s) g(t_n - s) ds, K(s) = s^{a-1} E_{a,a}(-lambda s^a),
// at every node of a uniform grid. Panels in the half nearer the kernel
// singularity take g piecewise linear and integrate K exactly through
// s^a E_{a,a+1} and s^{a+1} E_{a,a+2}. Panels in the half nearer t = 0 use
// samples of g: Gauss samples against K directly within 32 steps of the
// kernel singularity and against K cubic beyond; the first panel uses graded
// samples against K interpolated at 12 Chebyshev-Lobatto points within 32
// steps and cubic beyond. g(0) is never used, so sources singular at t = 0
// are admissible.
struct DuhamelInput {
  const TimeGrid* grid = nullptr;
  std::span<const double> g_at_nodes;  // g(t_m); entry 0 ignored
  // g at graded_rule(dt, true) nodes, for the first step
  std::span<const double> g_first_step;
  // g at graded_rule(dt, false) nodes, for the panel (0, dt)
  std::span<const double> g_panel0;
  // g at gauss_rule(t_j, t_{j+1}) nodes, j = 1 .. (steps + 1) / 2 - 1, in order
  std::span<const double> g_panels;
};
std::vector<double> duhamel_convolution(double alpha, double lambda, const DuhamelInput& in);

double eval_solution(const SpectralSolution& sol, double x, double t);
// u(x_j, t) at every eigen grid node.
std::vector<double> eval_solution_nodes(const SpectralSolution& sol, double t);

// du/dt = -sum c_i lambda_i t^{a-1} E_{a,a}(-lambda_i t^a) X_i(x) for
// homogeneous problems. Throws DomainError at t = 0 and PreconditionError
// when the solution carries a source or boundary lift.
double time_derivative(const SpectralSolution& sol, double x, double t);

// Response of mode k to the source t^{b-1} E_{a,b}(-lambda t^a) X_k(x):
// [lambda E_{a,a+b}(-lambda t^a) - lambda_k E_{a,a+b}(-lambda_k t^a)] / (lambda - lambda_k) t^{a+b-1}.
// Throws ResonanceError when |lambda - lambda_k| / lambda_k < 1e-8.
double closed_form_nonresonant(double alpha, double beta, double lambda, double lambda_k, double t);
// The limit lambda -> lambda_k:
// (1/a) [E_{a,a+b-1}(-lambda_k t^a) + (1 - b) E_{a,a+b}(-lambda_k t^a)] t^{a+b-1}.
double closed_form_resonant(double alpha, double beta, double lambda_k, double t);
inline constexpr double kResonanceThreshold = 1e-8;

void write_snapshot_csv(std::ostream& os, const SpectralSolution& sol, double t);
void write_modes_csv(std::ostream& os, const SpectralSolution& sol);

// Worker count for internal parallel loops: FRACSPEC_THREADS if set, else
// the hardware concurrency.
unsigned worker_count();

}  // namespace fracdiff
