#include "fracdiff/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fracdiff/error.hpp"
#include "fracdiff/format.hpp"
#include "fracdiff/mittag_leffler.hpp"

namespace fracdiff::cli {

namespace {

using json = nlohmann::json;

[[noreturn]] void key_error(const std::string& key, const std::string& msg) {
  throw InputError("config key '" + key + "': " + msg);
}

double get_number(const json& j, const std::string& key) {
  if (!j.is_number()) key_error(key, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) key_error(key, "expected a finite number");
  return v;
}

std::size_t get_count(const json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<long long>() <= 0) key_error(key, "expected a positive integer");
  return static_cast<std::size_t>(j.get<long long>());
}

std::string get_expr_text(const json& j, const std::string& key) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) return format_double(j.get<double>());
  key_error(key, "expected an expression string");
}

Expr compile(const std::string& text, const std::string& key) {
  try {
    return parse(text);
  } catch (const ParseError& e) {
    key_error(key, e.what());
  }
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) {
      throw InputError("unknown config key '" + where + k + "'");
    }
  }
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("config must be a JSON object");
  check_keys(j,
             {"alpha", "length", "T", "p", "q", "u0", "phi1", "phi2", "F", "n_modes", "grid_size",
              "n_time_steps", "snapshots", "checks", "output_dir", "samples", "residual", "uniqueness",
              "stability", "asymptotic"},
             "");
  RunConfig cfg;
  auto& pr = cfg.problem;
  if (j.contains("alpha")) pr.alpha = get_number(j["alpha"], "alpha");
  if (j.contains("length")) pr.length = get_number(j["length"], "length");
  if (j.contains("T")) pr.T = get_number(j["T"], "T");
  if (!(pr.alpha > 0.0 && pr.alpha <= 1.0)) key_error("alpha", "must lie in (0, 1]");
  if (!(pr.length > 0.0)) key_error("length", "must be positive");
  if (!(pr.T > 0.0)) key_error("T", "must be positive");
  for (auto [key, text] : {std::pair<const char*, std::string*>{"p", &cfg.p}, {"q", &cfg.q}, {"u0", &cfg.u0},
                           {"phi1", &cfg.phi1}, {"phi2", &cfg.phi2}, {"F", &cfg.F}}) {
    if (j.contains(key)) *text = get_expr_text(j[key], key);
  }
  pr.p = compile(cfg.p, "p");
  pr.q = compile(cfg.q, "q");
  pr.u0 = compile(cfg.u0, "u0");
  pr.phi1 = compile(cfg.phi1, "phi1");
  pr.phi2 = compile(cfg.phi2, "phi2");
  pr.F = compile(cfg.F, "F");
  if (j.contains("n_modes")) pr.n_modes = get_count(j["n_modes"], "n_modes");
  if (j.contains("grid_size")) pr.grid_size = get_count(j["grid_size"], "grid_size");
  if (j.contains("n_time_steps")) pr.n_time_steps = get_count(j["n_time_steps"], "n_time_steps");

  if (j.contains("snapshots")) {
    if (!j["snapshots"].is_array()) key_error("snapshots", "expected an array of times");
    for (const auto& v : j["snapshots"]) {
      const double t = get_number(v, "snapshots");
      if (!(t >= 0.0 && t <= pr.T)) key_error("snapshots", "time " + format_double(t) + " lies outside [0, T]");
      cfg.snapshots.push_back(t);
    }
  } else {
    cfg.snapshots = {pr.T};
  }
  if (j.contains("checks")) {
    if (!j["checks"].is_array()) key_error("checks", "expected an array of check names");
    for (const auto& v : j["checks"]) {
      if (!v.is_string()) key_error("checks", "expected check names as strings");
      const auto name = v.get<std::string>();
      const auto& known = known_checks();
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        std::string list;
        for (const auto& k : known) list += (list.empty() ? "" : ", ") + k;
        key_error("checks", "unknown check '" + name + "' (known: " + list + ")");
      }
      cfg.checks.push_back(name);
    }
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) key_error("output_dir", "expected a path");
    cfg.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("samples")) {
    const auto& s = j["samples"];
    if (!s.is_object()) key_error("samples", "expected an object");
    check_keys(s, {"x_stride", "t_samples"}, "samples.");
    if (s.contains("x_stride")) cfg.samples.x_stride = get_count(s["x_stride"], "samples.x_stride");
    if (s.contains("t_samples")) cfg.samples.t_samples = get_count(s["t_samples"], "samples.t_samples");
  }
  if (j.contains("residual")) {
    const auto& s = j["residual"];
    if (!s.is_object()) key_error("residual", "expected an object");
    check_keys(s, {"t_min"}, "residual.");
    if (s.contains("t_min")) cfg.residual_t_min = get_number(s["t_min"], "residual.t_min");
  }
  if (j.contains("uniqueness")) {
    const auto& s = j["uniqueness"];
    if (!s.is_object()) key_error("uniqueness", "expected an object");
    check_keys(s, {"levels"}, "uniqueness.");
    if (s.contains("levels")) cfg.uniqueness_levels = get_count(s["levels"], "uniqueness.levels");
  }
  if (j.contains("stability")) {
    const auto& s = j["stability"];
    if (!s.is_object()) key_error("stability", "expected an object");
    check_keys(s, {"eps", "eps0", "eps1", "u0", "phi1", "phi2", "F"}, "stability.");
    StabilityConfig st;
    st.u0 = cfg.u0;
    st.phi1 = cfg.phi1;
    st.phi2 = cfg.phi2;
    st.F = cfg.F;
    if (s.contains("eps")) st.eps = get_number(s["eps"], "stability.eps");
    if (s.contains("eps0")) st.eps0 = get_number(s["eps0"], "stability.eps0");
    if (s.contains("eps1")) st.eps1 = get_number(s["eps1"], "stability.eps1");
    for (auto [key, text] : {std::pair<const char*, std::string*>{"u0", &st.u0}, {"phi1", &st.phi1},
                             {"phi2", &st.phi2}, {"F", &st.F}}) {
      if (s.contains(key)) {
        *text = get_expr_text(s[key], std::string("stability.") + key);
        compile(*text, std::string("stability.") + key);
      }
    }
    cfg.stability = st;
  }
  if (j.contains("asymptotic")) {
    const auto& s = j["asymptotic"];
    if (!s.is_object()) key_error("asymptotic", "expected an object");
    check_keys(s, {"beta", "lambda", "lambda_k", "mode", "t_lo", "t_hi", "n_pts"}, "asymptotic.");
    auto& a = cfg.asymptotic;
    if (s.contains("beta")) a.beta = get_number(s["beta"], "asymptotic.beta");
    if (s.contains("lambda")) a.lambda = get_number(s["lambda"], "asymptotic.lambda");
    if (s.contains("lambda_k")) a.lambda_k = get_number(s["lambda_k"], "asymptotic.lambda_k");
    if (s.contains("mode")) a.mode = get_count(s["mode"], "asymptotic.mode");
    if (s.contains("t_lo")) a.t_lo = get_number(s["t_lo"], "asymptotic.t_lo");
    if (s.contains("t_hi")) a.t_hi = get_number(s["t_hi"], "asymptotic.t_hi");
    if (s.contains("n_pts")) a.n_pts = get_count(s["n_pts"], "asymptotic.n_pts");
  }
  if (std::find(cfg.checks.begin(), cfg.checks.end(), "stability") != cfg.checks.end() && !cfg.stability) {
    key_error("stability", "the stability check needs a 'stability' section");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<CheckReport> run_checks(const RunConfig& cfg, const SpectralSolution& sol) {
  std::vector<CheckReport> out;
  const auto& spec = cfg.problem;
  for (const auto& name : cfg.checks) {
    CheckReport r;
    try {
      if (name == "maximum_principle") {
        r = check_maximum_principle(sol, spec, cfg.samples);
      } else if (name == "minimum_principle") {
        r = check_minimum_principle(sol, spec, cfg.samples);
      } else if (name == "residual") {
        const double t_min = cfg.residual_t_min > 0.0 ? cfg.residual_t_min : 10.0 * sol.grid.dt();
        r = check_residual(sol, spec, t_min);
      } else if (name == "uniqueness") {
        r = check_uniqueness_evidence(spec, cfg.uniqueness_levels, cfg.samples);
      } else if (name == "asymptotic_slope") {
        const auto& a = cfg.asymptotic;
        double lk = 0.0;
        if (a.lambda_k) {
          lk = *a.lambda_k;
        } else {
          if (a.mode > sol.sys->n_modes()) throw InputError("asymptotic.mode exceeds n_modes");
          lk = sol.sys->lambdas[a.mode - 1];
        }
        r = asymptotic_slope(spec.alpha, a.beta, a.lambda, lk, a.t_lo, a.t_hi, a.n_pts);
      } else if (name == "stability") {
        const auto& st = *cfg.stability;
        ProblemSpec other = spec;
        other.u0 = parse(st.u0);
        other.phi1 = parse(st.phi1);
        other.phi2 = parse(st.phi2);
        other.F = parse(st.F);
        const auto sb = solve(other, sol.sys);
        r = check_stability(spec, sol, other, sb, st.eps, st.eps0, st.eps1, cfg.samples);
      }
    } catch (const PreconditionError& e) {
      r = {};
      r.name = name;
      r.passed = false;
      r.measured = r.bound = std::numeric_limits<double>::quiet_NaN();
      r.details = std::string("precondition violated: ") + e.what();
    } catch (const DomainError& e) {
      r = {};
      r.name = name;
      r.passed = false;
      r.measured = r.bound = std::numeric_limits<double>::quiet_NaN();
      r.details = std::string("check failed: ") + e.what();
    }
    out.push_back(r);
  }
  return out;
}

namespace {

void write_summary(std::ostream& os, const RunConfig& cfg, const SpectralSolution& sol,
                   const std::vector<CheckReport>& reports) {
  const auto& p = cfg.problem;
  os << "alpha = " << format_double(p.alpha) << '\n'
     << "length = " << format_double(p.length) << '\n'
     << "T = " << format_double(p.T) << '\n'
     << "p = " << cfg.p << '\n'
     << "q = " << cfg.q << '\n'
     << "u0 = " << cfg.u0 << '\n'
     << "phi1 = " << cfg.phi1 << '\n'
     << "phi2 = " << cfg.phi2 << '\n'
     << "F = " << cfg.F << '\n'
     << "n_modes = " << p.n_modes << '\n'
     << "grid_size = " << p.grid_size << '\n'
     << "n_time_steps = " << p.n_time_steps << '\n'
     << "snapshots =";
  for (double t : cfg.snapshots) os << ' ' << format_double(t);
  os << "\nchecks =";
  for (const auto& c : cfg.checks) os << ' ' << c;
  os << "\noutput_dir = " << cfg.output_dir << '\n'
     << "samples.x_stride = " << cfg.samples.x_stride << '\n'
     << "samples.t_samples = " << cfg.samples.t_samples << '\n'
     << "residual.t_min = " << format_double(cfg.residual_t_min > 0.0 ? cfg.residual_t_min : 10.0 * sol.grid.dt()) << '\n'
     << "uniqueness.levels = " << cfg.uniqueness_levels << '\n';
  if (cfg.stability) {
    const auto& s = *cfg.stability;
    os << "stability.eps = " << format_double(s.eps) << '\n'
       << "stability.eps0 = " << format_double(s.eps0) << '\n'
       << "stability.eps1 = " << format_double(s.eps1) << '\n'
       << "stability.u0 = " << s.u0 << '\n'
       << "stability.phi1 = " << s.phi1 << '\n'
       << "stability.phi2 = " << s.phi2 << '\n'
       << "stability.F = " << s.F << '\n';
  }
  const auto& a = cfg.asymptotic;
  os << "asymptotic.beta = " << format_double(a.beta) << '\n'
     << "asymptotic.lambda = " << format_double(a.lambda) << '\n'
     << "asymptotic.lambda_k = " << (a.lambda_k ? format_double(*a.lambda_k) : "mode " + std::to_string(a.mode)) << '\n'
     << "asymptotic.window = " << format_double(a.t_lo) << ' ' << format_double(a.t_hi) << '\n'
     << "asymptotic.n_pts = " << a.n_pts << '\n';
  os << "\nlambda_1 = " << format_double(sol.sys->lambdas.front()) << '\n'
     << "lambda_n = " << format_double(sol.sys->lambdas.back()) << '\n'
     << "decay s1 = " << format_double(sol.decay.s1) << (sol.decay.s1_plateau ? " (levels off)" : " (growing)") << '\n'
     << "decay s2 = " << format_double(sol.decay.s2) << (sol.decay.s2_plateau ? " (levels off)" : " (growing)") << '\n'
     << "tail M = " << format_double(sol.tail.ml_bound) << '\n'
     << "tail coefficients = " << format_double(sol.tail.coefficient_tail) << '\n'
     << "tail source = " << format_double(sol.tail.duhamel_tail) << '\n';
  for (const auto& w : sol.warnings) os << "warning: " << w << '\n';
  if (!reports.empty()) os << '\n';
  for (const auto& r : reports) os << to_text(r) << '\n';
}

int pipeline(const std::string& config_path, const std::string& output_override, std::size_t modes,
             std::size_t steps, bool quiet, bool check_mode, std::ostream& out) {
  RunConfig cfg = load_config(config_path);
  if (!output_override.empty()) cfg.output_dir = output_override;
  if (modes) cfg.problem.n_modes = modes;
  if (steps) cfg.problem.n_time_steps = steps;
  if (check_mode && cfg.checks.empty()) {
    cfg.checks = {"maximum_principle", "minimum_principle", "residual", "uniqueness"};
  }
  std::shared_ptr<const EigenSystem> sys;
  try {
    cfg.problem.validate();
    sys = std::make_shared<const EigenSystem>(
        solve_eigen(cfg.problem.coefficients(), cfg.problem.n_modes, cfg.problem.grid_size));
  } catch (const CoefficientError& e) {
    throw InputError(std::string("config keys 'p'/'q': ") + e.what() +
                     "; the operator needs p(x) > 0 and q(x) >= 0 on [0, l]");
  }
  const auto sol = solve(cfg.problem, sys);
  if (!quiet) {
    out << "solved " << sol.n_modes() << " modes on " << sys->nodes() << " nodes, " << sol.grid.size() - 1
        << " time steps\n";
    for (const auto& w : sol.warnings) out << "warning: " << w << '\n';
  }
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw InputError("cannot create output directory '" + cfg.output_dir + "': " + ec.message());
  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(cfg.output_dir) / name);
    if (!f) throw InputError("cannot write '" + name + "' in '" + cfg.output_dir + "'");
    return f;
  };
  if (!check_mode) {
    for (double t : cfg.snapshots) {
      auto f = open("snapshot_t" + format_double(t) + ".csv");
      write_snapshot_csv(f, sol, t);
    }
    auto f = open("modes.csv");
    write_modes_csv(f, sol);
  }
  const auto reports = run_checks(cfg, sol);
  {
    auto f = open("checks.jsonl");
    write_jsonl(f, reports);
  }
  {
    auto f = open("summary.txt");
    write_summary(f, cfg, sol, reports);
  }
  bool failed = false;
  for (const auto& r : reports) {
    if (!quiet) out << to_text(r) << '\n';
    failed = failed || (r.applicable && !r.passed);
  }
  return failed ? 2 : 0;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral solver for the time-fractional diffusion equation"};
  app.require_subcommand(1);
  std::string config, output;
  std::size_t modes = 0, steps = 0;
  bool quiet = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON problem definition")->required()->check(CLI::ExistingFile);
    sub->add_option("--output", output, "output directory (overrides output_dir)");
    sub->add_option("--modes", modes, "number of modes (overrides n_modes)")->check(CLI::PositiveNumber);
    sub->add_option("--time-steps", steps, "number of time steps (overrides n_time_steps)")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", quiet, "suppress progress output");
  };
  auto* solve_cmd = app.add_subcommand("solve", "solve, write snapshots, modes and requested checks");
  add_common(solve_cmd);
  auto* check_cmd = app.add_subcommand("check", "solve and run checks only");
  add_common(check_cmd);
  auto* eigen_cmd = app.add_subcommand("eigen", "write the eigen system as eigen.csv");
  add_common(eigen_cmd);
  auto* ml_cmd = app.add_subcommand("ml-eval", "evaluate E_{alpha,beta}(z)");
  std::vector<std::string> ml_args;
  ml_cmd->add_option("args", ml_args, "alpha beta z")->expected(3)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? 0 : 1;
  }

  try {
    if (*ml_cmd) {
      double v[3];
      for (int k = 0; k < 3; ++k) {
        if (!parse_double(ml_args[k], v[k])) throw InputError("ml-eval: '" + ml_args[k] + "' is not a number");
      }
      try {
        const auto r = ml({v[0], v[1], v[2]});
        out << format_double(r.value) << '\n';
      } catch (const DomainError& e) {
        throw InputError(std::string("usage: ml-eval alpha beta z with 0 < alpha <= 1, beta > 0; ") + e.what());
      }
      return 0;
    }
    if (*eigen_cmd) {
      RunConfig cfg = load_config(config);
      if (!output.empty()) cfg.output_dir = output;
      if (modes) cfg.problem.n_modes = modes;
      EigenSystem sys;
      try {
        sys = solve_eigen(cfg.problem.coefficients(), cfg.problem.n_modes, cfg.problem.grid_size);
      } catch (const CoefficientError& e) {
        throw InputError(std::string("config keys 'p'/'q': ") + e.what() +
                         "; the operator needs p(x) > 0 and q(x) >= 0 on [0, l]");
      }
      std::filesystem::create_directories(cfg.output_dir);
      std::ofstream f(std::filesystem::path(cfg.output_dir) / "eigen.csv");
      if (!f) throw InputError("cannot write eigen.csv in '" + cfg.output_dir + "'");
      write_eigen_csv(f, sys);
      if (!quiet) out << "wrote " << sys.n_modes() << " eigenpairs\n";
      return 0;
    }
    return pipeline(config, output, modes, steps, quiet, check_cmd->parsed(), out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace fracdiff::cli
