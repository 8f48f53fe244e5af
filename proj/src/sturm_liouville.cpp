#include "fracdiff/sturm_liouville.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "fracdiff/error.hpp"
#include "fracdiff/format.hpp"
#include "fracdiff/kernels.hpp"

namespace fracdiff {

namespace {

void check_grid(double length, std::size_t n_modes, std::size_t grid_size) {
  if (!(length > 0.0) || !std::isfinite(length)) throw InputError("domain length must be positive");
  if (n_modes == 0 || n_modes > grid_size / 4) {
    std::ostringstream os;
    os << "n_modes = " << n_modes << " must lie in [1, grid_size/4] = [1, " << grid_size / 4
       << "] to be resolved on " << grid_size << " nodes";
    throw ResolutionError(os.str());
  }
}

std::vector<double> trapezoid_weights(std::size_t intervals, double h) {
  std::vector<double> w(intervals + 1, h);
  w.front() = w.back() = 0.5 * h;
  return w;
}

double node(double length, std::size_t j, std::size_t intervals) {
  return j == intervals ? length : static_cast<double>(j) * (length / static_cast<double>(intervals));
}

// Number of eigenvalues of the tridiagonal matrix strictly below x.
std::size_t sturm_count(const Tridiagonal& t, double x, double pivmin) {
  std::size_t count = 0;
  double d = t.diag[0] - x;
  if (std::abs(d) < pivmin) d = -pivmin;
  if (d < 0.0) ++count;
  for (std::size_t k = 1; k < t.diag.size(); ++k) {
    d = t.diag[k] - x - t.off[k - 1] * t.off[k - 1] / d;
    if (std::abs(d) < pivmin) d = -pivmin;
    if (d < 0.0) ++count;
  }
  return count;
}

// LU factorization with partial pivoting of a shifted tridiagonal matrix and
// the matching solve; same elimination order as LAPACK dgttrf / dgttrs.
struct TridiagonalLU {
  std::vector<double> dl, d, du, du2;
  std::vector<unsigned char> swapped;

  TridiagonalLU(const Tridiagonal& t, double shift, double pivmin) {
    const std::size_t n = t.diag.size();
    d.resize(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = t.diag[i] - shift;
    dl = t.off;
    du = t.off;
    du2.assign(n, 0.0);
    swapped.assign(n, 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(d[i]) >= std::abs(dl[i])) {
        if (d[i] == 0.0) d[i] = pivmin;
        const double fact = dl[i] / d[i];
        dl[i] = fact;
        d[i + 1] -= fact * du[i];
      } else {
        const double fact = d[i] / dl[i];
        d[i] = dl[i];
        dl[i] = fact;
        const double temp = du[i];
        du[i] = d[i + 1];
        d[i + 1] = temp - fact * d[i + 1];
        if (i + 2 < n) {
          du2[i] = du[i + 1];
          du[i + 1] = -fact * du[i + 1];
        }
        swapped[i] = 1;
      }
    }
    if (std::abs(d[n - 1]) < pivmin) d[n - 1] = d[n - 1] < 0.0 ? -pivmin : pivmin;
  }

  void solve(std::vector<double>& b) const {
    const std::size_t n = d.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!swapped[i]) {
        b[i + 1] -= dl[i] * b[i];
      } else {
        const double temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - dl[i] * b[i];
      }
    }
    b[n - 1] /= d[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (std::size_t i = n - 2; i-- > 0;) {
      b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
  }
};

}  // namespace

Tridiagonal assemble_operator(const OperatorCoefficients& coeffs, std::size_t grid_size) {
  const double l = coeffs.length;
  if (!(l > 0.0) || !std::isfinite(l)) throw InputError("domain length must be positive");
  if (grid_size < 4) throw ResolutionError("grid needs at least 4 nodes");
  if (!coeffs.p || !coeffs.q) throw InputError("operator coefficients p and q must both be given");
  const std::size_t m = grid_size - 1;
  const double h = l / static_cast<double>(m);

  auto fail = [](const char* what, double x, double v) {
    std::ostringstream os;
    os << what << " violated at x = " << format_double(x) << " (value " << format_double(v) << ")";
    throw CoefficientError(os.str());
  };
  std::vector<double> p_mid(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double x = (static_cast<double>(j) + 0.5) * h;
    p_mid[j] = coeffs.p(x);
    if (!(p_mid[j] > 0.0) || !std::isfinite(p_mid[j])) fail("positivity p(x) > 0", x, p_mid[j]);
  }
  Tridiagonal t;
  t.diag.resize(m - 1);
  t.off.resize(m - 2);
  for (std::size_t j = 0; j <= m; ++j) {
    const double x = node(l, j, m);
    const double pv = coeffs.p(x);
    if (!(pv > 0.0) || !std::isfinite(pv)) fail("positivity p(x) > 0", x, pv);
    const double qv = coeffs.q(x);
    if (!(qv >= 0.0) || !std::isfinite(qv)) fail("non-negativity q(x) >= 0", x, qv);
    if (j == 0 || j == m) continue;
    t.diag[j - 1] = (p_mid[j - 1] + p_mid[j]) / (h * h) + qv;
    if (j + 1 < m) t.off[j - 1] = -p_mid[j] / (h * h);
  }
  return t;
}

EigenSystem solve_eigen(const OperatorCoefficients& coeffs, std::size_t n_modes,
                        std::size_t grid_size) {
  check_grid(coeffs.length, n_modes, grid_size);
  const Tridiagonal t = assemble_operator(coeffs, grid_size);
  const std::size_t n = t.diag.size();

  double glo = std::numeric_limits<double>::infinity();
  double ghi = -glo;
  double max_off = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = (k > 0 ? std::abs(t.off[k - 1]) : 0.0) + (k + 1 < n ? std::abs(t.off[k]) : 0.0);
    glo = std::min(glo, t.diag[k] - r);
    ghi = std::max(ghi, t.diag[k] + r);
    if (k + 1 < n) max_off = std::max(max_off, std::abs(t.off[k]));
  }
  const double scale = std::max(std::abs(glo), std::abs(ghi));
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, max_off * max_off);
  const double eps = std::numeric_limits<double>::epsilon();

  EigenSystem sys;
  sys.length = coeffs.length;
  sys.intervals = grid_size - 1;
  sys.lambdas.resize(n_modes);
  sys.modes.assign(n_modes * grid_size, 0.0);
  sys.weights = trapezoid_weights(sys.intervals, sys.h());

  double lo = glo;
  for (std::size_t k = 0; k < n_modes; ++k) {
    double a = lo, b = ghi;
    while (b - a > 2.0 * eps * std::max(std::abs(a), std::abs(b)) + pivmin) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (sturm_count(t, mid, pivmin) >= k + 1) b = mid; else a = mid;
    }
    sys.lambdas[k] = 0.5 * (a + b);
    lo = a;
  }

  std::vector<double> v(n);
  for (std::size_t k = 0; k < n_modes; ++k) {
    const TridiagonalLU lu(t, sys.lambdas[k], eps * scale);
    for (std::size_t j = 0; j < n; ++j) v[j] = 1.0 + 0.25 * std::sin(0.7 * static_cast<double>(j + k));
    for (int it = 0; it < 3; ++it) {
      lu.solve(v);
      double mx = 0.0;
      for (double e : v) mx = std::max(mx, std::abs(e));
      for (double& e : v) e /= mx;
    }
    double* row = sys.modes.data() + k * grid_size;
    std::copy(v.begin(), v.end(), row + 1);
    std::span<double> cur(row, grid_size);
    // Modified Gram-Schmidt against the modes already accepted.
    for (std::size_t j = 0; j < k; ++j) {
      const double proj = sys.inner(cur, sys.mode(j));
      kernels::axpy(-proj, sys.mode(j), cur);
    }
    const double norm = std::sqrt(sys.inner(cur, cur));
    const double sign = row[1] < 0.0 ? -1.0 : 1.0;
    for (double& e : cur) e *= sign / norm;
  }
  return sys;
}

EigenSystem analytic_eigen(double length, std::size_t n_modes, std::size_t grid_size) {
  check_grid(length, n_modes, grid_size);
  EigenSystem sys;
  sys.length = length;
  sys.intervals = grid_size - 1;
  sys.lambdas.resize(n_modes);
  sys.modes.assign(n_modes * grid_size, 0.0);
  sys.weights = trapezoid_weights(sys.intervals, sys.h());
  const double amp = std::sqrt(2.0 / length);
  for (std::size_t i = 0; i < n_modes; ++i) {
    const double k = static_cast<double>(i + 1) * std::numbers::pi / length;
    sys.lambdas[i] = k * k;
    double* row = sys.modes.data() + i * grid_size;
    // Nodes are j/M of the length; sin(pi (i+1) j / M) reduced to keep exact zeros.
    for (std::size_t j = 1; j < sys.intervals; ++j) {
      const std::size_t r = ((i + 1) * j) % (2 * sys.intervals);
      row[j] = amp * std::sin(std::numbers::pi * static_cast<double>(r) /
                              static_cast<double>(sys.intervals));
    }
  }
  return sys;
}

double EigenSystem::inner(std::span<const double> u, std::span<const double> v) const {
  if (u.size() != nodes() || v.size() != nodes()) throw InputError("sample length does not match grid");
  // Interior weights are all h; endpoints carry h/2.
  const double s = kernels::dot(u.subspan(1, intervals - 1), v.subspan(1, intervals - 1));
  return h() * s + weights.front() * u.front() * v.front() + weights.back() * u.back() * v.back();
}

EigenSystem::Stencil EigenSystem::stencil(double x) const {
  const double s = x / h();
  const double m = static_cast<double>(intervals);
  double fl = std::floor(s);
  if (fl < 0.0) fl = 0.0;
  if (fl > m - 1.0) fl = m - 1.0;
  double first = std::clamp(fl - 1.0, 0.0, m - 3.0);
  Stencil st{static_cast<std::size_t>(first), {}};
  const double u = s - first;
  for (int k = 0; k < 4; ++k) {
    double w = 1.0;
    for (int j = 0; j < 4; ++j) {
      if (j != k) w *= (u - j) / static_cast<double>(k - j);
    }
    st.w[k] = w;
  }
  return st;
}

double EigenSystem::interpolate(std::size_t i, double x) const {
  if (!(x >= 0.0 && x <= length)) throw DomainError("x outside [0, l]");
  if (x == length) return mode(i)[intervals];
  const auto st = stencil(x);
  const auto m = mode(i);
  return st.w[0] * m[st.first] + st.w[1] * m[st.first + 1] + st.w[2] * m[st.first + 2] +
         st.w[3] * m[st.first + 3];
}

std::vector<double> project(std::span<const double> f, const EigenSystem& sys) {
  if (f.size() != sys.nodes()) {
    std::ostringstream os;
    os << "projection needs " << sys.nodes() << " samples, got " << f.size();
    throw InputError(os.str());
  }
  std::vector<double> c(sys.n_modes());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = sys.inner(f, sys.mode(i));
  return c;
}

std::vector<double> reconstruct(std::span<const double> c, const EigenSystem& sys) {
  if (c.size() > sys.n_modes()) throw InputError("more coefficients than modes");
  std::vector<double> f(sys.nodes(), 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) kernels::axpy(c[i], sys.mode(i), f);
  return f;
}

DecayDiagnostic coefficient_decay_diagnostic(std::span<const double> c,
                                             std::span<const double> lambdas) {
  if (c.size() != lambdas.size()) throw InputError("coefficient and eigenvalue lists differ in length");
  DecayDiagnostic d;
  const std::size_t n = c.size();
  const std::size_t head = n - n / 4;
  double h1 = 0.0, h2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double l2 = lambdas[i] * lambdas[i];
    const double t1 = l2 * c[i] * c[i];
    d.s1 += t1;
    d.s2 += l2 * t1;
    if (i + 1 == head) {
      h1 = d.s1;
      h2 = d.s2;
    }
  }
  if (n >= 4) {
    d.s1_plateau = d.s1 - h1 <= 1e-2 * d.s1;
    d.s2_plateau = d.s2 - h2 <= 1e-2 * d.s2;
  }
  return d;
}

void write_eigen_csv(std::ostream& os, const EigenSystem& sys) {
  os << "i,lambda_i";
  for (std::size_t j = 0; j < sys.nodes(); ++j) os << ',' << format_double(sys.x(j));
  os << '\n';
  for (std::size_t i = 0; i < sys.n_modes(); ++i) {
    os << (i + 1) << ',' << format_double(sys.lambdas[i]);
    for (double v : sys.mode(i)) os << ',' << format_double(v);
    os << '\n';
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  return out;
}

}  // namespace

EigenSystem read_eigen_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InputError("eigen CSV is empty");
  const auto head = split_csv(line);
  if (head.size() < 6 || head[0] != "i" || head[1] != "lambda_i") {
    throw InputError("eigen CSV header must start with i,lambda_i and list at least 4 nodes");
  }
  std::vector<double> xs(head.size() - 2);
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (!parse_double(head[j + 2], xs[j])) throw InputError("bad grid coordinate in eigen CSV header");
  }
  EigenSystem sys;
  sys.intervals = xs.size() - 1;
  sys.length = xs.back();
  if (xs.front() != 0.0 || !(sys.length > 0.0)) throw InputError("eigen CSV grid must run from 0 to l > 0");
  sys.weights = trapezoid_weights(sys.intervals, sys.h());
  std::size_t row = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    ++row;
    if (cells.size() != head.size()) throw InputError("eigen CSV row " + std::to_string(row) + " has wrong width");
    double idx = 0.0, lam = 0.0;
    if (!parse_double(cells[0], idx) || idx != static_cast<double>(row) || !parse_double(cells[1], lam)) {
      throw InputError("eigen CSV row " + std::to_string(row) + " has a bad index or eigenvalue");
    }
    sys.lambdas.push_back(lam);
    for (std::size_t j = 2; j < cells.size(); ++j) {
      double v = 0.0;
      if (!parse_double(cells[j], v)) throw InputError("eigen CSV row " + std::to_string(row) + " has a bad sample");
      sys.modes.push_back(v);
    }
  }
  if (sys.lambdas.empty()) throw InputError("eigen CSV has no modes");
  return sys;
}

}  // namespace fracdiff
