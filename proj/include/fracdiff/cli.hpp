#pragma once

// Batch front-end: `fracspec solve|check|ml-eval|eigen`.
//
// Exit status: 0 when every requested check passes, 2 when a check fails,
// 1 on input errors (unreadable or invalid config, bad expressions,
// coefficient or compatibility violations, bad arguments).

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fracdiff/spectral_solver.hpp"
#include "fracdiff/verification.hpp"

namespace fracdiff::cli {

struct StabilityConfig {
  double eps = 0.0;
  double eps0 = 0.0;
  double eps1 = 0.0;
  // Perturbed data; missing entries copy the main problem.
  std::string u0, phi1, phi2, F;
};

struct AsymptoticConfig {
  double beta = 0.5;
  double lambda = 1.0;
  // Either an explicit lambda_k or a 1-based mode index into the spectrum.
  std::optional<double> lambda_k;
  std::size_t mode = 1;
  double t_lo = 1e2;
  double t_hi = 1e4;
  std::size_t n_pts = 41;
};

struct RunConfig {
  ProblemSpec problem;
  // Expression texts as given (or defaulted), echoed in summary.txt.
  std::string p = "1", q = "0", u0 = "0", phi1 = "0", phi2 = "0", F = "0";
  std::vector<double> snapshots;
  std::vector<std::string> checks;
  std::string output_dir = "output";
  SampleGrid samples;
  double residual_t_min = 0.0;  // 0 selects 10 dt
  std::size_t uniqueness_levels = 3;
  std::optional<StabilityConfig> stability;
  AsymptoticConfig asymptotic;
};

inline const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {"maximum_principle", "minimum_principle", "stability",
                                                 "residual", "asymptotic_slope", "uniqueness"};
  return names;
}

// Throws InputError naming the offending key (or expression byte offset).
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

// Runs the checks listed in the config, in the listed order.
std::vector<CheckReport> run_checks(const RunConfig& cfg, const SpectralSolution& sol);

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace fracdiff::cli
