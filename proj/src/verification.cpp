#include "fracdiff/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "fracdiff/error.hpp"
#include "fracdiff/format.hpp"
#include "fracdiff/gamma.hpp"
#include "fracdiff/kernels.hpp"
#include "parallel.hpp"

namespace fracdiff {

namespace {

std::vector<std::size_t> sample_nodes(std::size_t intervals, std::size_t stride) {
  stride = std::max<std::size_t>(1, stride);
  std::vector<std::size_t> js;
  for (std::size_t j = 0; j < intervals; j += stride) js.push_back(j);
  js.push_back(intervals);
  return js;
}

std::vector<double> sample_times(double T, std::size_t n) {
  n = std::max<std::size_t>(1, n);
  std::vector<double> ts(n + 1);
  for (std::size_t k = 0; k <= n; ++k) ts[k] = k == n ? T : T * static_cast<double>(k) / static_cast<double>(n);
  return ts;
}

std::string density(std::size_t nx, std::size_t nt) {
  std::ostringstream os;
  os << nx << " x " << nt << " space-time samples";
  return os.str();
}

CheckReport principle(const SpectralSolution& sol, const ProblemSpec& spec, const SampleGrid& grid,
                      bool require_hypothesis, double sign, const char* name) {
  CheckReport r;
  r.name = name;
  const auto& sys = *sol.sys;
  const auto js = sample_nodes(sys.intervals, grid.x_stride);
  const auto ts = sample_times(sol.T, grid.t_samples);
  std::vector<double> xi;
  for (std::size_t k = 1; k + 1 < js.size(); ++k) xi.push_back(sys.x(js[k]));

  // Hypothesis: sign * F <= 0 on the sampled interior.
  double worst_f = -std::numeric_limits<double>::infinity();
  if (!spec.F.is_zero()) {
    std::vector<double> fv(xi.size());
    for (std::size_t k = 1; k < ts.size(); ++k) {
      spec.F.eval_x(xi, ts[k], fv);
      for (double v : fv) worst_f = std::max(worst_f, sign * v);
    }
  }
  const bool hypothesis = !(worst_f > 0.0);
  std::ostringstream det;
  det << density(js.size(), ts.size()) << "; ";
  if (!hypothesis) {
    det << "source has the wrong sign somewhere (" << (sign > 0 ? "max F = " : "min F = ")
        << format_double(sign * worst_f) << "); ";
    if (require_hypothesis) {
      r.applicable = false;
      r.passed = false;
      r.measured = std::numeric_limits<double>::quiet_NaN();
      r.bound = std::numeric_limits<double>::quiet_NaN();
      r.details = det.str() + "check not applicable";
      return r;
    }
  }

  double bmax = -std::numeric_limits<double>::infinity();
  double imax = -std::numeric_limits<double>::infinity();
  double iarg_x = 0.0, iarg_t = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const auto u = eval_solution_nodes(sol, ts[k]);
    for (std::size_t m = 0; m < js.size(); ++m) {
      const double v = sign * u[js[m]];
      const bool boundary = k == 0 || m == 0 || m + 1 == js.size();
      if (boundary) {
        bmax = std::max(bmax, v);
      } else if (v > imax) {
        imax = v;
        iarg_x = sys.x(js[m]);
        iarg_t = ts[k];
      }
    }
  }
  const double ref = std::max(0.0, bmax);
  r.measured = imax - ref;
  r.bound = 1e-6 * (1.0 + std::abs(bmax));
  r.passed = r.measured <= r.bound;
  det << (sign > 0 ? "boundary max " : "boundary min ") << format_double(sign * bmax)
      << (sign > 0 ? ", interior max " : ", interior min ") << format_double(sign * imax) << " at (x = "
      << format_double(iarg_x) << ", t = " << format_double(iarg_t) << ")";
  r.details = det.str();
  return r;
}

double max_abs_diff(const Expr& a, const Expr& b, const std::vector<double>& xs, double t) {
  std::vector<double> va(xs.size()), vb(xs.size());
  a.eval_x(xs, t, va);
  b.eval_x(xs, t, vb);
  double m = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) m = std::max(m, std::abs(va[j] - vb[j]));
  return m;
}

void require_same_operator(const ProblemSpec& a, const ProblemSpec& b) {
  const bool same = a.alpha == b.alpha && a.length == b.length && a.T == b.T && a.n_modes == b.n_modes &&
                    a.grid_size == b.grid_size && a.n_time_steps == b.n_time_steps &&
                    structurally_equal(a.p.root(), b.p.root()) && structurally_equal(a.q.root(), b.q.root());
  if (!same) throw PreconditionError("stability check needs problems that differ only in u0, phi1, phi2 and F");
}

}  // namespace

CheckReport check_maximum_principle(const SpectralSolution& sol, const ProblemSpec& spec,
                                    const SampleGrid& grid, bool require_hypothesis) {
  return principle(sol, spec, grid, require_hypothesis, 1.0, "maximum_principle");
}

CheckReport check_minimum_principle(const SpectralSolution& sol, const ProblemSpec& spec,
                                    const SampleGrid& grid, bool require_hypothesis) {
  return principle(sol, spec, grid, require_hypothesis, -1.0, "minimum_principle");
}

CheckReport check_stability(const ProblemSpec& a, const ProblemSpec& b, double eps, double eps0,
                            double eps1, const SampleGrid& grid) {
  require_same_operator(a, b);
  auto sys = std::make_shared<const EigenSystem>(solve_eigen(a.coefficients(), a.n_modes, a.grid_size));
  const auto sa = solve(a, sys);
  const auto sb = solve(b, sys);
  return check_stability(a, sa, b, sb, eps, eps0, eps1, grid);
}

CheckReport check_stability(const ProblemSpec& a, const SpectralSolution& sa, const ProblemSpec& b,
                            const SpectralSolution& sb, double eps, double eps0, double eps1,
                            const SampleGrid& grid) {
  require_same_operator(a, b);
  const auto& sys = *sa.sys;
  if (sb.sys->nodes() != sys.nodes()) throw PreconditionError("solutions live on different grids");
  const auto js = sample_nodes(sys.intervals, grid.x_stride);
  const auto ts = sample_times(a.T, grid.t_samples);

  // Data distances on the samples.
  std::vector<double> all_x(sys.nodes()), inner_x;
  for (std::size_t j = 0; j < sys.nodes(); ++j) all_x[j] = sys.x(j);
  for (std::size_t k = 1; k + 1 < js.size(); ++k) inner_x.push_back(sys.x(js[k]));
  const double d0 = max_abs_diff(a.u0, b.u0, all_x, 0.0);
  double d1 = 0.0, df = 0.0;
  const std::vector<double> origin = {0.0};
  for (std::size_t k = 0; k < ts.size(); ++k) {
    d1 = std::max({d1, max_abs_diff(a.phi1, b.phi1, origin, ts[k]), max_abs_diff(a.phi2, b.phi2, origin, ts[k])});
    if (k > 0) df = std::max(df, max_abs_diff(a.F, b.F, inner_x, ts[k]));
  }
  auto exceeds = [](double d, double e) { return d > e * (1.0 + 1e-9) + 1e-15; };
  if (exceeds(d0, eps0) || exceeds(d1, eps1) || exceeds(df, eps)) {
    std::ostringstream os;
    os << "sampled data distances exceed the stated bounds: |u0 - u0~| = " << format_double(d0) << " (eps0 = "
       << format_double(eps0) << "), |phi - phi~| = " << format_double(d1) << " (eps1 = " << format_double(eps1)
       << "), |F - F~| = " << format_double(df) << " (eps = " << format_double(eps) << ")";
    throw PreconditionError(os.str());
  }

  double diff = 0.0;
  for (double t : ts) {
    const auto ua = eval_solution_nodes(sa, t);
    const auto ub = eval_solution_nodes(sb, t);
    for (std::size_t j : js) diff = std::max(diff, std::abs(ua[j] - ub[j]));
  }
  CheckReport r;
  r.name = "stability";
  r.measured = diff;
  r.bound = std::max(eps0, eps1) + std::pow(a.T, a.alpha) * rgamma(1.0 + a.alpha) * eps;
  r.passed = r.measured <= r.bound * (1.0 + 1e-6) + 1e-6;
  std::ostringstream det;
  det << density(js.size(), ts.size()) << "; data distances u0 " << format_double(d0) << ", phi "
      << format_double(d1) << ", F " << format_double(df) << "; slack 1e-6";
  r.details = det.str();
  return r;
}

CheckReport check_residual(const SpectralSolution& sol, const ProblemSpec& spec, double t_min,
                           std::size_t x_stride) {
  const auto& sys = *sol.sys;
  const double dt = sol.grid.dt();
  const double h = sys.h();
  const double a = sol.alpha;
  CheckReport r;
  r.name = "residual";
  if (t_min < 10.0 * dt * (1.0 - 1e-12)) {
    r.applicable = false;
    r.measured = r.bound = std::numeric_limits<double>::quiet_NaN();
    r.details = "t_min must be at least 10 dt = " + format_double(10.0 * dt);
    return r;
  }
  const std::size_t nt = sol.grid.size();
  const std::size_t nodes = sys.nodes();
  const std::size_t nm = sol.n_modes();

  std::vector<double> u(nt * nodes);
  detail::parallel_for(nt, [&](std::size_t n) {
    const auto row = eval_solution_nodes(sol, sol.grid[n]);
    std::copy(row.begin(), row.end(), u.begin() + static_cast<std::ptrdiff_t>(n * nodes));
  });

  // Interior sample columns.
  std::vector<std::size_t> cols;
  const std::size_t stride = std::max<std::size_t>(1, x_stride);
  for (std::size_t j = 1; j < sys.intervals; j += stride) cols.push_back(j);
  std::vector<double> xc(cols.size()), pl(cols.size()), pr(cols.size()), qc(cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const double x = sys.x(cols[k]);
    xc[k] = x;
    pl[k] = spec.p(x - 0.5 * h, 0.0);
    pr[k] = spec.p(x + 0.5 * h, 0.0);
    qc[k] = spec.q(x, 0.0);
  }

  // Caputo derivative in time at each column.
  std::vector<double> dcap(cols.size() * nt);
  detail::parallel_for(cols.size(), [&](std::size_t k) {
    std::vector<double> col(nt);
    for (std::size_t n = 0; n < nt; ++n) col[n] = u[n * nodes + cols[k]];
    const auto d = caputo_l1_values(col, dt, a);
    std::copy(d.begin(), d.end(), dcap.begin() + static_cast<std::ptrdiff_t>(k * nt));
  });

  const auto hom = homogenize(spec, sys);
  std::size_t n0 = 1;
  while (n0 < nt && sol.grid[n0] < t_min * (1.0 - 1e-12)) ++n0;

  std::vector<double> pde(nt, 0.0), trunc(nt, 0.0);
  detail::parallel_for(nt - n0, [&](std::size_t idx) {
    const std::size_t n = n0 + idx;
    const double t = sol.grid[n];
    std::vector<double> f(cols.size(), 0.0), f1(nodes), g(nm);
    if (!spec.F.is_zero()) spec.F.eval_x(xc, t, f);
    double worst = 0.0, worst_tr = 0.0;
    if (sol.has_duhamel) {
      hom.forcing_samples(t, f1);
      hom.modal_forcing(t, g);
    }
    const double* un = u.data() + n * nodes;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const std::size_t j = cols[k];
      const double lu = -(pr[k] * (un[j + 1] - un[j]) - pl[k] * (un[j] - un[j - 1])) / (h * h) + qc[k] * un[j];
      worst = std::max(worst, std::abs(dcap[k * nt + n] + lu - f[k]));
      if (sol.has_duhamel) {
        double proj = 0.0;
        for (std::size_t i = 0; i < nm; ++i) proj += g[i] * sys.mode(i)[j];
        worst_tr = std::max(worst_tr, std::abs(f1[j] - proj));
      }
    }
    pde[n] = worst;
    trunc[n] = worst_tr;
  });
  const double pde_res = *std::max_element(pde.begin(), pde.end());
  const double trunc_res = *std::max_element(trunc.begin(), trunc.end());

  // Initial and boundary mismatch.
  double ic = 0.0, bc = 0.0;
  for (std::size_t j = 0; j < nodes; ++j) ic = std::max(ic, std::abs(u[j] - spec.u0(sys.x(j), 0.0)));
  double phimax = 0.0;
  for (std::size_t n = 0; n < nt; ++n) {
    const double t = sol.grid[n];
    const double a1 = spec.phi1(0.0, t), a2 = spec.phi2(0.0, t);
    phimax = std::max({phimax, std::abs(a1), std::abs(a2)});
    bc = std::max({bc, std::abs(u[n * nodes] - a1), std::abs(u[n * nodes + nodes - 1] - a2)});
  }

  double scale = phimax;
  for (std::size_t i = 0; i < nm; ++i) {
    double dm = 0.0;
    if (sol.has_duhamel) {
      for (double v : sol.duhamel_row(i)) dm = std::max(dm, std::abs(v));
    }
    scale += sys.lambdas[i] * (std::abs(sol.c[i]) + dm);
  }
  scale = std::max(1.0, scale);
  const double layer = std::pow(dt / t_min, std::min(2.0 - a, 1.0 + a));
  const double model = scale * (kResidualC1 * (std::pow(dt, 2.0 - a) + layer) + kResidualC2 * h * h);
  const double tail = std::isfinite(sol.tail.coefficient_tail) ? sol.tail.coefficient_tail : 0.0;
  double u0max = 0.0;
  for (std::size_t j = 0; j < nodes; ++j) u0max = std::max(u0max, std::abs(spec.u0(sys.x(j), 0.0)));
  // |sum_{i>n} c_i X_i(x)| <= sup |X_i| * sum_{i>n} |c_i|.
  double xmax = 0.0;
  for (std::size_t i = 0; i < nm; ++i) {
    for (double v : sys.mode(i)) xmax = std::max(xmax, std::abs(v));
  }
  const double ic_bound = tail * xmax + 1e-8 * std::max(1.0, u0max);
  const double bc_bound = 1e-8 * std::max(1.0, phimax);
  r.measured = pde_res;
  r.bound = model + trunc_res + tail;
  r.passed = r.measured <= r.bound && ic <= ic_bound && bc <= bc_bound;
  std::ostringstream det;
  det << density(cols.size(), nt - n0) << " (dt " << format_double(dt) << ", h " << format_double(h)
      << ", t >= " << format_double(t_min) << "); bound = scheme model " << format_double(model)
      << " + source truncation " << format_double(trunc_res) << " + initial tail " << format_double(tail)
      << "; initial mismatch " << format_double(ic) << " (limit " << format_double(ic_bound)
      << "), boundary mismatch " << format_double(bc) << " (limit " << format_double(bc_bound) << ")";
  r.details = det.str();
  return r;
}

CheckReport asymptotic_slope(double alpha, double beta, double lambda, double lambda_k, double t_lo,
                             double t_hi, std::size_t n_pts) {
  if (!(t_lo >= 100.0) || !(t_hi >= 100.0 * t_lo)) {
    throw DomainError("asymptotic window needs t_lo >= 100 and t_hi / t_lo >= 100");
  }
  if (n_pts < 3) throw DomainError("asymptotic fit needs at least 3 points");
  const bool resonant = std::abs(lambda - lambda_k) / lambda_k < kResonanceThreshold;
  auto phi = [&](double t) {
    return resonant ? closed_form_resonant(alpha, beta, lambda_k, t)
                    : closed_form_nonresonant(alpha, beta, lambda, lambda_k, t);
  };
  auto fit = [&](double lo, double hi, double& slope) {
    std::vector<double> lx(n_pts), ly(n_pts);
    double sgn = 0.0;
    for (std::size_t k = 0; k < n_pts; ++k) {
      const double t = lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(n_pts - 1));
      const double v = phi(t);
      if (v == 0.0 || (sgn != 0.0 && (v > 0.0) != (sgn > 0.0))) return false;
      sgn = v;
      lx[k] = std::log(t);
      ly[k] = std::log(std::abs(v));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < n_pts; ++k) {
      sx += lx[k]; sy += ly[k]; sxx += lx[k] * lx[k]; sxy += lx[k] * ly[k];
    }
    const double n = static_cast<double>(n_pts);
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return true;
  };
  double slope = 0.0;
  double lo = t_lo;
  if (!fit(lo, t_hi, slope)) {
    lo = std::sqrt(t_lo * t_hi);
    if (!fit(lo, t_hi, slope)) throw DomainError("modal response changes sign inside the asymptotic window");
  }
  const bool equal = std::abs(alpha - beta) <= 1e-12;
  const double predicted = equal ? -alpha - 1.0 : beta - alpha - 1.0;
  CheckReport r;
  r.name = "asymptotic_slope";
  r.measured = std::abs(slope - predicted);
  r.bound = 0.05;
  r.passed = r.measured <= r.bound;
  std::ostringstream det;
  det << "fitted slope " << format_double(slope) << ", predicted " << format_double(predicted) << " on ["
      << format_double(lo) << ", " << format_double(t_hi) << "] with " << n_pts << " points"
      << (resonant ? " (resonant)" : "");
  r.details = det.str();
  return r;
}

CheckReport check_uniqueness_evidence(const ProblemSpec& spec, std::size_t levels, const SampleGrid& grid) {
  CheckReport r;
  r.name = "uniqueness";
  levels = std::max<std::size_t>(2, levels);
  const std::size_t shrink = std::size_t{1} << (levels - 1);
  const std::size_t base_intervals = std::max<std::size_t>(8, (spec.grid_size - 1) / shrink);
  const std::size_t base_steps = std::max<std::size_t>(4, spec.n_time_steps / shrink);
  const std::size_t base_modes = std::max<std::size_t>(1, spec.n_modes / shrink);

  std::vector<SpectralSolution> sols;
  std::vector<std::string> warnings;
  for (std::size_t k = 0; k < levels; ++k) {
    ProblemSpec s = spec;
    const std::size_t f = std::size_t{1} << k;
    s.grid_size = base_intervals * f + 1;
    s.n_time_steps = base_steps * f;
    s.n_modes = std::min(base_modes * f, s.grid_size / 4);
    sols.push_back(solve(s));
    for (const auto& w : sols.back().warnings) {
      if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
    }
  }
  // Common samples: nodes of the coarsest grid, which every finer grid contains.
  const auto& coarse = *sols.front().sys;
  const auto js = sample_nodes(coarse.intervals, std::max<std::size_t>(1, grid.x_stride / shrink));
  const auto ts = sample_times(spec.T, grid.t_samples);
  std::vector<double> disc(levels - 1, 0.0);
  for (double t : ts) {
    std::vector<std::vector<double>> rows;
    for (const auto& s : sols) rows.push_back(eval_solution_nodes(s, t));
    for (std::size_t k = 0; k + 1 < levels; ++k) {
      const std::size_t ratio_k = std::size_t{1} << k;
      for (std::size_t j : js) {
        const double a = rows[k][j * ratio_k];
        const double b = rows[k + 1][j * ratio_k * 2];
        disc[k] = std::max(disc[k], std::abs(a - b));
      }
    }
  }
  // Mode sum in the opposite order on the finest level.
  const auto& fine = sols.back();
  double reorder = 0.0;
  for (double t : ts) {
    std::vector<double> tm(fine.n_modes());
    fine.modal_all(t, tm);
    const auto fwd = eval_solution_nodes(fine, t);
    std::vector<double> rev(fine.sys->nodes(), 0.0);
    for (std::size_t i = tm.size(); i-- > 0;) kernels::axpy(tm[i], fine.sys->mode(i), rev);
    for (std::size_t j = 0; j < rev.size(); ++j) {
      reorder = std::max(reorder, std::abs(fwd[j] - rev[j] - fine.lift(fine.sys->x(j), t)));
    }
  }
  r.measured = disc.back();
  const double prev = levels >= 3 ? disc[levels - 3] : disc.back();
  r.bound = prev <= 1e-8 ? 1e-8 : 0.5 * prev;
  r.passed = r.measured <= r.bound && reorder <= 1e-12 * (1.0 + r.measured) + 1e-12;
  std::ostringstream det;
  det << levels << " resolutions from " << base_modes << " modes / " << base_intervals + 1 << " nodes / "
      << base_steps << " steps; successive discrepancies";
  for (double d : disc) det << ' ' << format_double(d);
  det << "; reordered mode sum differs by " << format_double(reorder);
  for (const auto& w : warnings) det << "; warning: " << w;
  r.details = det.str();
  return r;
}

std::string to_json(const CheckReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["passed"] = r.passed;
  j["applicable"] = r.applicable;
  j["measured"] = std::isfinite(r.measured) ? nlohmann::ordered_json(r.measured) : nlohmann::ordered_json(nullptr);
  j["bound"] = std::isfinite(r.bound) ? nlohmann::ordered_json(r.bound) : nlohmann::ordered_json(nullptr);
  j["details"] = r.details;
  return j.dump();
}

void write_jsonl(std::ostream& os, const std::vector<CheckReport>& reports) {
  for (const auto& r : reports) os << to_json(r) << '\n';
}

std::string to_text(const CheckReport& r) {
  std::ostringstream os;
  os << (r.applicable ? (r.passed ? "PASS" : "FAIL") : "SKIP") << ' ' << r.name << ": measured "
     << format_double(r.measured) << ", bound " << format_double(r.bound) << " (" << r.details << ")";
  return os.str();
}

}  // namespace fracdiff
