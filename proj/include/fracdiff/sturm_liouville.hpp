#pragma once

// Dirichlet eigenproblem for L(u) = -(p u')' + q u on (0, l).
//
// The operator is discretized by conservative central differences,
//   (L_h u)_j = -(p_{j+1/2}(u_{j+1} - u_j) - p_{j-1/2}(u_j - u_{j-1})) / h^2 + q_j u_j,
// which is a symmetric tridiagonal matrix on the interior nodes. Eigenvalues
// come from Sturm-sequence bisection, eigenvectors from inverse iteration;
// modes are orthonormal in the trapezoidal inner product (u, v) = sum w_j u_j v_j.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace fracdiff {

struct OperatorCoefficients {
  std::function<double(double)> p;
  std::function<double(double)> q;
  double length = 1.0;
};

struct EigenSystem {
  double length = 1.0;
  // Number of intervals M; nodes are x_j = j h, j = 0..M.
  std::size_t intervals = 0;
  std::vector<double> lambdas;
  // Row-major n_modes x (M + 1); row i holds X_{i+1} at the nodes.
  std::vector<double> modes;
  // Trapezoidal weights of the discrete inner product.
  std::vector<double> weights;

  std::size_t n_modes() const noexcept { return lambdas.size(); }
  std::size_t nodes() const noexcept { return intervals + 1; }
  double h() const noexcept { return length / static_cast<double>(intervals); }
  double x(std::size_t j) const noexcept {
    return j == intervals ? length : static_cast<double>(j) * h();
  }
  // Mode i is 0-based: mode(0) is X_1.
  std::span<const double> mode(std::size_t i) const noexcept {
    return {modes.data() + i * nodes(), nodes()};
  }
  // X_{i+1}(x) by cubic Lagrange interpolation between nodes.
  double interpolate(std::size_t i, double x) const;
  // Interpolation stencil shared by all modes: first node index and weights.
  struct Stencil {
    std::size_t first;
    double w[4];
  };
  Stencil stencil(double x) const;
  double inner(std::span<const double> u, std::span<const double> v) const;
};

// First n_modes eigenpairs on a grid of grid_size nodes (h = l / (grid_size - 1)).
// Throws CoefficientError if p <= 0 or q < 0 at a grid point, ResolutionError
// unless 1 <= n_modes <= grid_size / 4, InputError for l <= 0.
EigenSystem solve_eigen(const OperatorCoefficients& coeffs, std::size_t n_modes,
                        std::size_t grid_size = 2001);

// Closed form for p = 1, q = 0: lambda_i = (i pi / l)^2, X_i = sqrt(2/l) sin(i pi x / l).
EigenSystem analytic_eigen(double length, std::size_t n_modes, std::size_t grid_size = 2001);

// Symmetric tridiagonal operator matrix on the interior nodes.
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;  // off[k] couples interior nodes k and k + 1
};
Tridiagonal assemble_operator(const OperatorCoefficients& coeffs, std::size_t grid_size);

// c_i = (f, X_i) for samples f at the grid nodes. Throws InputError on length mismatch.
std::vector<double> project(std::span<const double> f, const EigenSystem& sys);

// Sum of c_i X_i at the grid nodes.
std::vector<double> reconstruct(std::span<const double> c, const EigenSystem& sys);

struct DecayDiagnostic {
  double s1 = 0.0;  // sum lambda_i^2 c_i^2
  double s2 = 0.0;  // sum lambda_i^4 c_i^2
  bool s1_plateau = true;
  bool s2_plateau = true;
};

// Partial sums behind the smoothness hypotheses on the initial data. A sum
// counts as plateaued when its last quarter of terms adds at most 1 %.
DecayDiagnostic coefficient_decay_diagnostic(std::span<const double> c,
                                             std::span<const double> lambdas);

// CSV layout: header "i,lambda_i,<x_0>,...,<x_M>", then one row per mode.
void write_eigen_csv(std::ostream& os, const EigenSystem& sys);
EigenSystem read_eigen_csv(std::istream& is);

}  // namespace fracdiff
