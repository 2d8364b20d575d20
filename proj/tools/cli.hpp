#pragma once

// Command-line front end.  parse_and_dispatch is the whole program; main()
// only forwards argv and the standard streams.
//
// Exit codes: 0 success, 1 invalid request, 2 numerical failure.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "qcollapse/checks.hpp"
#include "qcollapse/qcollapse.hpp"

namespace qcollapse::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_invalid = 1;
inline constexpr int exit_numerical = 2;

struct Options {
  // problem
  double gamma = 1.0;
  double beta_tilde = 1.0;
  int ell = 0;
  double hbar = 1.0;
  double mass = 1.0;
  std::string config;
  std::string sweep;
  std::string out = "-";

  // params
  std::optional<double> classical_limit;
  double angular_momentum = 1.0;

  // profile
  double xi_min = 0.05;
  double xi_max = 30.0;
  int n_xi = 400;

  // check
  int draws = 1000;
  std::uint64_t seed = 20240917;

  // observables
  double obs_xi_max = 30.0;
  double tol = 1e-10;
  std::string format = "text";
  std::optional<double> at_time;

  // evolve
  std::string init = "self_similar";
  std::string core = "auto";
  double t0 = -1.0;
  double t_end = -0.1;
  double dt = 2.5e-4;
  double r_max = 40.0;
  int n_points = 8192;
  double r_core = 0.0;
  int record_every = 90;
  double r0 = 5.0;
  double width = 1.0;
  bool free_particle = false;
  bool fit = false;
  std::string snapshot;

  // fit
  std::string in;
  std::string x_column = "t";
  std::string y_column = "r_mean";
  double abs_t_min = 0.0;
  double abs_t_max = 1e300;

  // plot
  std::vector<std::string> inputs;
  std::vector<std::string> labels;
  std::string style = "auto";
  std::string title;
};

namespace detail {

// Options that were given explicitly on one of the subcommands.
struct Handles {
  CLI::App* sub = nullptr;
  CLI::Option* gamma = nullptr;
  CLI::Option* beta = nullptr;
  CLI::Option* t0 = nullptr;
  CLI::Option* t_end = nullptr;
};

inline void add_problem_options(CLI::App* s, Options& o, Handles& h) {
  h.gamma = s->add_option("--gamma", o.gamma, "Coupling gamma = beta_tilde - l(l+1), must exceed 1/4")
                ->capture_default_str();
  h.beta = s->add_option("--beta-tilde", o.beta_tilde, "Dimensionless strength 2 m beta / hbar^2");
  auto* ell = s->add_option("--ell", o.ell, "Angular momentum quantum number")->capture_default_str();
  h.gamma->excludes(h.beta)->excludes(ell);
  s->add_option("--hbar", o.hbar, "Planck constant in chosen units")->capture_default_str();
  s->add_option("--mass", o.mass, "Particle mass in chosen units")->capture_default_str();
  s->add_option("--config", o.config, "key=value file; flags given on the command line win");
}

inline void build_app(CLI::App& app, Options& o, std::map<std::string, Handles>& h) {
  app.description("Self-similar quantum collapse in the -beta/r^2 potential");
  app.require_subcommand(1);
  app.set_version_flag("--version", "qcollapse 1.0.0");

  {
    auto* s = app.add_subcommand("params", "Derive gamma, alpha and chi; optionally test the classical fall condition");
    auto& hh = h["params"];
    hh.sub = s;
    add_problem_options(s, o, hh);
    s->add_option("--classical-limit", o.classical_limit, "Coefficient c with r^2 U(r) -> c at the origin");
    s->add_option("--angular-momentum", o.angular_momentum, "Classical angular momentum M")->capture_default_str();
  }
  {
    auto* s = app.add_subcommand("profile", "Tabulate R(xi) and R'(xi) on a log grid");
    auto& hh = h["profile"];
    hh.sub = s;
    add_problem_options(s, o, hh);
    s->add_option("--xi-min", o.xi_min, "Smallest xi")->capture_default_str();
    s->add_option("--xi-max", o.xi_max, "Largest xi")->capture_default_str();
    s->add_option("--n", o.n_xi, "Number of log-spaced nodes")->capture_default_str();
    s->add_option("--out", o.out, "Output CSV path, - for stdout")->capture_default_str();
    s->add_option("--sweep", o.sweep, "gamma=v1,v2,... runs one table per value");
  }
  {
    auto* s = app.add_subcommand("check", "ODE residual, asymptote and special-function identity suites");
    auto& hh = h["check"];
    hh.sub = s;
    add_problem_options(s, o, hh);
    s->add_option("--draws", o.draws, "Randomized draws per identity")->capture_default_str();
    s->add_option("--seed", o.seed, "Seed for the randomized draws")->capture_default_str();
  }
  {
    auto* s = app.add_subcommand("observables", "Moments, C_r, C_p and the mean-energy coefficient");
    auto& hh = h["observables"];
    hh.sub = s;
    add_problem_options(s, o, hh);
    s->add_option("--xi-max", o.obs_xi_max, "Upper quadrature limit before the tail correction")
        ->capture_default_str();
    s->add_option("--tol", o.tol, "Relative quadrature tolerance")->capture_default_str();
    s->add_option("--format", o.format, "text or csv")->check(CLI::IsMember({"text", "csv"}))->capture_default_str();
    s->add_option("--t", o.at_time, "Also print <r>, <p> and the uncertainty product at this t < 0");
    s->add_option("--out", o.out, "Output path, - for stdout")->capture_default_str();
    s->add_option("--sweep", o.sweep, "gamma=v1,v2,... one CSV row per value");
  }
  {
    auto* s = app.add_subcommand("evolve", "Crank-Nicolson propagation of the radial wave function");
    auto& hh = h["evolve"];
    hh.sub = s;
    add_problem_options(s, o, hh);
    s->add_option("--init", o.init, "self_similar, escape or gaussian")
        ->check(CLI::IsMember({"self_similar", "escape", "gaussian"}))
        ->capture_default_str();
    s->add_option("--core", o.core, "auto, capped or flux")
        ->check(CLI::IsMember({"auto", "capped", "flux"}))
        ->capture_default_str();
    hh.t0 = s->add_option("--t0", o.t0, "Start time (escape default 0.1, gaussian 0)")->capture_default_str();
    hh.t_end = s->add_option("--t-end", o.t_end, "End time (escape default 1, gaussian 1)")->capture_default_str();
    s->add_option("--dt", o.dt, "Step magnitude; the sign follows t0 -> t-end")->capture_default_str();
    s->add_option("--r-max", o.r_max, "Box radius")->capture_default_str();
    s->add_option("--n-points", o.n_points, "Grid intervals")->capture_default_str();
    s->add_option("--r-core", o.r_core, "Core radius, 0 selects r_max/2048")->capture_default_str();
    s->add_option("--record-every", o.record_every, "Steps between recorded samples")->capture_default_str();
    s->add_option("--r0", o.r0, "Gaussian centre")->capture_default_str();
    s->add_option("--width", o.width, "Gaussian width")->capture_default_str();
    s->add_flag("--free", o.free_particle, "Switch the potential off (V = 0)");
    s->add_flag("--fit", o.fit, "Fit <r> ~ |t|^nu and print the exponent");
    s->add_option("--snapshot", o.snapshot, "Write the final state to this CSV");
    s->add_option("--out", o.out, "Record CSV path, - for stdout")->capture_default_str();
    s->add_option("--sweep", o.sweep, "gamma=v1,v2,... one record per value");
  }
  {
    auto* s = app.add_subcommand("fit", "Power-law fit of a record CSV column against |t|");
    auto& hh = h["fit"];
    hh.sub = s;
    s->add_option("--in", o.in, "Record CSV")->required();
    s->add_option("--x", o.x_column, "Time column")->capture_default_str();
    s->add_option("--y", o.y_column, "Value column")->capture_default_str();
    s->add_option("--abs-t-min", o.abs_t_min, "Ignore samples with |t| below this")->capture_default_str();
    s->add_option("--abs-t-max", o.abs_t_max, "Ignore samples with |t| above this");
    s->add_option("--config", o.config, "key=value file; flags given on the command line win");
  }
  {
    auto* s = app.add_subcommand("plot", "SVG plot of profile or record CSV files");
    auto& hh = h["plot"];
    hh.sub = s;
    s->add_option("--in", o.inputs, "Input CSV (repeatable)")->required();
    s->add_option("--label", o.labels, "Legend label per input (repeatable)");
    s->add_option("--style", o.style, "auto, profile, record or fig1")
        ->check(CLI::IsMember({"auto", "profile", "record", "fig1"}))
        ->capture_default_str();
    s->add_option("--title", o.title, "Plot title");
    s->add_option("--out", o.out, "Output SVG path, - for stdout")->capture_default_str();
    s->add_option("--config", o.config, "key=value file; flags given on the command line win");
  }
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Reads key=value lines; '#' starts a comment.  Keys are long flag names
// without the leading dashes.
inline std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    std::replace(key.begin(), key.end(), '_', '-');
    kv.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return kv;
}

struct Output {
  std::ofstream file;
  std::ostream* os = nullptr;

  Output(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      os = &fallback;
      return;
    }
    file.open(path, std::ios::binary);
    if (!file) throw InvalidInput("cannot write '" + path + "'");
    os = &file;
  }
  std::ostream& operator*() { return *os; }
};

inline CollapseParams problem_params(const Options& o, const Handles& h) {
  const bool by_beta = (h.beta && h.beta->count() > 0) || (h.sub && h.sub->get_option("--ell")->count() > 0);
  if (by_beta) return derive_params(o.beta_tilde, o.ell, o.hbar, o.mass);
  return params_from_gamma(o.gamma, o.hbar, o.mass);
}

inline std::vector<double> parse_sweep(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || trim(spec.substr(0, eq)) != "gamma")
    throw InvalidInput("--sweep expects gamma=v1,v2,...");
  std::vector<double> values;
  for (const auto& cell : split_commas(spec.substr(eq + 1))) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw InvalidInput("--sweep: cannot parse '" + cell + "'");
    }
  }
  if (values.empty()) throw InvalidInput("--sweep: no values");
  return values;
}

inline std::string gamma_tag(double g) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", g);
  return buf;
}

// profile.csv -> profile_gamma0.5.csv
inline std::string sweep_path(const std::string& path, double g) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  const std::string tag = "_gamma" + gamma_tag(g);
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + tag;
  return path.substr(0, dot) + tag + path.substr(dot);
}

inline int sweep_threads() {
  const char* env = std::getenv("QCOLLAPSE_THREADS");
  if (!env || !*env) return std::max(1, int(std::thread::hardware_concurrency()));
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw InvalidInput("QCOLLAPSE_THREADS must be a positive integer");
  return int(v);
}

// Runs job(k) for k < n on up to QCOLLAPSE_THREADS threads.  The first error
// (in index order) is rethrown after all jobs finish.
inline void run_parallel(std::size_t n, const std::function<void(std::size_t)>& job) {
  const std::size_t threads = std::min<std::size_t>(n, std::size_t(sweep_threads()));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < n;) {
      try {
        job(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline int cmd_params(const Options& o, const Handles& h, std::ostream& out) {
  if (o.classical_limit) {
    out << "classical_fall_allowed = "
        << (classical_fall_allowed(*o.classical_limit, o.angular_momentum, o.mass) ? "true" : "false") << "\n";
    if (h.gamma->count() == 0 && h.beta->count() == 0) return exit_ok;
  }
  const CollapseParams p = problem_params(o, h);
  out << "beta_tilde = " << format_double(p.beta_tilde) << "\n"
      << "ell = " << p.ell << "\n"
      << "gamma = " << format_double(p.gamma) << "\n"
      << "alpha = " << format_double(p.alpha) << "\n"
      << "hbar = " << format_double(p.hbar) << "\n"
      << "mass = " << format_double(p.mass) << "\n"
      << "chi = " << format_double(p.chi) << "\n"
      << "nu = " << format_double(CollapseParams::nu) << "\n";
  return exit_ok;
}

inline void write_profile(const CollapseParams& p, const Options& o, std::ostream& os) {
  const SelfSimilarProfile prof(p);
  write_profile_csv(os, build_profile_table(prof, log_grid(o.xi_min, o.xi_max, o.n_xi)));
}

inline int cmd_profile(const Options& o, const Handles& h, std::ostream& out) {
  if (!(o.xi_min > 0.0) || !(o.xi_max > o.xi_min) || o.n_xi < 2)
    throw InvalidInput("profile: need 0 < xi-min < xi-max and n >= 2");
  if (o.sweep.empty()) {
    Output dst(o.out, out);
    write_profile(problem_params(o, h), o, *dst);
    return exit_ok;
  }
  if (o.out == "-") throw InvalidInput("profile --sweep needs --out to name the files");
  const auto gammas = parse_sweep(o.sweep);
  std::vector<CollapseParams> ps;
  for (double g : gammas) ps.push_back(params_from_gamma(g, o.hbar, o.mass));
  run_parallel(ps.size(), [&](std::size_t k) {
    std::ofstream f(sweep_path(o.out, gammas[k]), std::ios::binary);
    if (!f) throw InvalidInput("cannot write '" + sweep_path(o.out, gammas[k]) + "'");
    write_profile(ps[k], o, f);
  });
  for (double g : gammas) out << sweep_path(o.out, g) << "\n";
  return exit_ok;
}

inline int cmd_check(const Options& o, const Handles& h, std::ostream& out) {
  if (o.draws < 1) throw InvalidInput("check: draws must be >= 1");
  std::vector<CheckResult> results;
  std::vector<CollapseParams> ps;
  if (h.gamma->count() > 0 || h.beta->count() > 0)
    ps.push_back(problem_params(o, h));
  else
    for (double g : {0.3, 0.5, 1.0, 2.0, 5.0, 10.0}) ps.push_back(params_from_gamma(g, o.hbar, o.mass));
  for (const auto& p : ps)
    for (auto& r : profile_suite(p)) results.push_back(r);
  for (auto& r : identity_suite(o.seed, o.draws)) results.push_back(r);

  char line[160];
  std::snprintf(line, sizeof line, "%-24s %-8s %-12s %-10s %-8s %s\n", "suite", "gamma", "worst", "tolerance",
                "samples", "result");
  out << line;
  bool all = true;
  for (const auto& r : results) {
    const std::string g = std::isnan(r.gamma) ? "-" : gamma_tag(r.gamma);
    std::snprintf(line, sizeof line, "%-24s %-8s %-12.3e %-10.1e %-8zu %s\n", r.name.c_str(), g.c_str(), r.worst,
                  r.tolerance, r.samples, r.passed() ? "PASS" : "FAIL");
    out << line;
    all = all && r.passed();
  }
  out << (all ? "all checks passed\n" : "some checks FAILED\n");
  return all ? exit_ok : exit_numerical;
}

inline int cmd_observables(const Options& o, const Handles& h, std::ostream& out) {
  Output dst(o.out, out);
  if (!o.sweep.empty()) {
    const auto gammas = parse_sweep(o.sweep);
    std::vector<ObservableReport> reports(gammas.size());
    std::vector<CollapseParams> ps;
    for (double g : gammas) ps.push_back(params_from_gamma(g, o.hbar, o.mass));
    run_parallel(ps.size(), [&](std::size_t k) { reports[k] = compute_observables(ps[k], o.obs_xi_max, o.tol); });
    write_observables_csv_header(*dst);
    for (const auto& r : reports) write_observables_csv_row(*dst, r);
    return exit_ok;
  }
  const ObservableReport r = compute_observables(problem_params(o, h), o.obs_xi_max, o.tol);
  if (o.format == "csv") {
    write_observables_csv_header(*dst);
    write_observables_csv_row(*dst, r);
  } else {
    write_observables_text(*dst, r);
  }
  if (o.at_time) {
    const Expectations e = expectations_at_time(r, *o.at_time);
    std::ostream& os = o.format == "csv" && o.out == "-" ? std::cerr : *dst;
    os << "t = " << format_double(*o.at_time) << ": <r> = " << format_double(e.r_mean)
       << ", <p> = " << format_double(e.p_mean) << ", <r><p> = " << format_double(e.uncertainty_product) << "\n";
  }
  return exit_ok;
}

struct EvolveResult {
  EvolutionRecord record;
  WavePacketState state;
  bool halted = false;
  std::string halt_message;
};

inline EvolveResult run_evolution(const CollapseParams& p, const Options& o, const Handles& h) {
  const RadialGrid grid = make_grid(o.r_max, o.n_points, o.r_core);
  double t0 = o.t0, t_end = o.t_end;
  InitialCondition ic;
  if (o.init == "escape") {
    if (h.t0->count() == 0) t0 = 0.1;
    if (h.t_end->count() == 0) t_end = 1.0;
    ic = InitialCondition::conjugated_self_similar(t0);
  } else if (o.init == "gaussian") {
    if (h.t0->count() == 0) t0 = 0.0;
    if (h.t_end->count() == 0) t_end = 1.0;
    ic = InitialCondition::gaussian(o.r0, o.width);
  } else {
    ic = InitialCondition::self_similar(t0);
  }
  if (!(o.dt > 0.0) && !(o.dt < 0.0)) throw InvalidInput("evolve: dt must be non-zero");
  if (!(t_end != t0)) throw InvalidInput("evolve: t-end must differ from t0");
  EvolveResult res;
  if (o.core == "auto")
    res.state = init_state(grid, p, ic);
  else
    res.state = init_state(grid, p, ic, o.core == "capped" ? CoreModel::capped : CoreModel::similarity_flux);
  if (o.init == "gaussian") res.state.t = t0;
  if (o.free_particle) std::fill(res.state.potential.begin(), res.state.potential.end(), 0.0);
  const double dt = t_end > t0 ? std::abs(o.dt) : -std::abs(o.dt);
  try {
    res.record = evolve_and_record(res.state, t_end, dt, o.record_every);
  } catch (const HaltedAtCore& e) {
    res.record = e.record;
    res.halted = true;
    res.halt_message = e.what();
  }
  return res;
}

inline void report_fit(const EvolutionRecord& rec, std::ostream& os) {
  std::vector<double> t, r;
  for (std::size_t k = 0; k < rec.size(); ++k)
    if (rec.times[k] != 0.0) {
      t.push_back(rec.times[k]);
      r.push_back(rec.r_means[k]);
    }
  const PowerFit f = fit_power_law(t, r);
  os << "fitted exponent nu = " << format_double(f.exponent) << "\n"
     << "prefactor = " << format_double(f.prefactor) << "\n"
     << "r_squared = " << format_double(f.r_squared) << "\n";
}

inline int cmd_evolve(const Options& o, const Handles& h, std::ostream& out, std::ostream& err) {
  if (o.sweep.empty()) {
    const EvolveResult res = run_evolution(problem_params(o, h), o, h);
    Output dst(o.out, out);
    write_record_csv(*dst, res.record);
    if (!o.snapshot.empty()) {
      Output snap(o.snapshot, out);
      write_snapshot_csv(*snap, res.state);
    }
    std::ostream& info = o.out == "-" ? err : out;
    if (o.fit) report_fit(res.record, info);
    if (res.halted) {
      err << "error: " << res.halt_message << "\n";
      return exit_numerical;
    }
    return exit_ok;
  }
  if (o.out == "-") throw InvalidInput("evolve --sweep needs --out to name the files");
  const auto gammas = parse_sweep(o.sweep);
  std::vector<CollapseParams> ps;
  for (double g : gammas) ps.push_back(params_from_gamma(g, o.hbar, o.mass));
  std::vector<EvolveResult> results(ps.size());
  run_parallel(ps.size(), [&](std::size_t k) { results[k] = run_evolution(ps[k], o, h); });
  int code = exit_ok;
  for (std::size_t k = 0; k < ps.size(); ++k) {
    const std::string path = sweep_path(o.out, gammas[k]);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidInput("cannot write '" + path + "'");
    write_record_csv(f, results[k].record);
    out << path << "\n";
    if (o.fit) report_fit(results[k].record, out);
    if (results[k].halted) {
      err << "error (gamma " << gamma_tag(gammas[k]) << "): " << results[k].halt_message << "\n";
      code = exit_numerical;
    }
  }
  return code;
}

inline CsvTable load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read '" + path + "'");
  return read_csv(in);
}

inline int cmd_fit(const Options& o, std::ostream& out) {
  const CsvTable t = load_csv(o.in);
  const auto& x = t.column(o.x_column);
  const auto& y = t.column(o.y_column);
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < t.rows(); ++k) {
    const double a = std::abs(x[k]);
    if (a > 0.0 && a >= o.abs_t_min && a <= o.abs_t_max) {
      xs.push_back(x[k]);
      ys.push_back(y[k]);
    }
  }
  const PowerFit f = fit_power_law(xs, ys);
  out << "exponent = " << format_double(f.exponent) << "\n"
      << "prefactor = " << format_double(f.prefactor) << "\n"
      << "r_squared = " << format_double(f.r_squared) << "\n"
      << "samples = " << xs.size() << "\n";
  return exit_ok;
}

inline int cmd_plot(const Options& o, std::ostream& out) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  PlotSpec spec;
  spec.title = o.title;
  std::string kind;
  for (std::size_t k = 0; k < o.inputs.size(); ++k) {
    const CsvTable t = load_csv(o.inputs[k]);
    const std::string this_kind = t.has("abs2_R") ? "profile" : t.has("r_mean") ? "record" : "";
    if (this_kind.empty()) throw InvalidInput("plot: '" + o.inputs[k] + "' is neither a profile nor a record CSV");
    if (!kind.empty() && kind != this_kind) throw InvalidInput("plot: inputs mix profile and record CSVs");
    kind = this_kind;
    PlotSeries s;
    s.color = palette[k % 6];
    s.label = k < o.labels.size() ? o.labels[k] : (o.inputs.size() > 1 ? o.inputs[k] : "");
    if (kind == "profile") {
      s.x = t.column("xi");
      s.y = t.column("abs2_R");
      spec.series.push_back(s);
    } else {
      for (double v : t.column("t")) s.x.push_back(std::abs(v));
      s.y = t.column("r_mean");
      s.markers = true;
      spec.series.push_back(s);
      std::vector<double> ft, fr;
      for (std::size_t j = 0; j < t.rows(); ++j)
        if (s.x[j] > 0.0) {
          ft.push_back(s.x[j]);
          fr.push_back(s.y[j]);
        }
      if (ft.size() >= 8) {
        const PowerFit f = fit_power_law(ft, fr);
        PlotSeries line;
        line.color = "#555555";
        line.dashed = true;
        char buf[64];
        std::snprintf(buf, sizeof buf, "fit: nu = %.4f", f.exponent);
        line.label = buf;
        const auto [lo, hi] = std::minmax_element(ft.begin(), ft.end());
        for (double x : {*lo, *hi}) {
          line.x.push_back(x);
          line.y.push_back(f.prefactor * std::pow(x, f.exponent));
        }
        spec.series.push_back(line);
      }
    }
  }
  const std::string style = o.style == "auto" ? kind : o.style;
  if ((style == "fig1" || style == "profile") && kind != "profile")
    throw InvalidInput("plot: style '" + style + "' needs profile CSVs");
  if (style == "record" && kind != "record") throw InvalidInput("plot: style 'record' needs record CSVs");
  if (style == "record") {
    spec.log_x = spec.log_y = true;
    spec.x_label = "-t (collapse) or t (escape)";
    spec.y_label = "<r>";
  } else {
    spec.log_x = true;
    spec.log_y = style == "fig1";
    spec.x_label = "xi";
    spec.y_label = "|R(xi)|^2";
    if (style == "fig1" && spec.title.empty()) spec.title = "|R(xi)|^2";
  }
  Output dst(o.out, out);
  write_svg(*dst, spec);
  return exit_ok;
}

inline int dispatch(const Options& o, std::map<std::string, Handles>& h, std::ostream& out, std::ostream& err) {
  if (h["params"].sub->parsed()) return cmd_params(o, h["params"], out);
  if (h["profile"].sub->parsed()) return cmd_profile(o, h["profile"], out);
  if (h["check"].sub->parsed()) return cmd_check(o, h["check"], out);
  if (h["observables"].sub->parsed()) return cmd_observables(o, h["observables"], out);
  if (h["evolve"].sub->parsed()) return cmd_evolve(o, h["evolve"], out, err);
  if (h["fit"].sub->parsed()) return cmd_fit(o, out);
  if (h["plot"].sub->parsed()) return cmd_plot(o, out);
  throw InvalidInput("no command given");
}

// Appends config entries whose flags were not given on the command line.
inline std::vector<std::string> merged_args(const std::vector<std::string>& args, const Handles& h,
                                            const std::string& config_path) {
  std::vector<std::string> merged = args;
  for (const auto& [key, value] : read_config(config_path)) {
    const std::string flag = "--" + key;
    if (key == "config") continue;
    CLI::Option* opt = nullptr;
    try {
      opt = h.sub->get_option(flag);
    } catch (const CLI::OptionNotFound&) {
      throw InvalidInput("config: '" + key + "' is not an option of '" + h.sub->get_name() + "'");
    }
    if (opt->count() > 0) continue;
    if (opt->get_type_size() == 0) {
      if (value == "true" || value == "1" || value == "yes") merged.push_back(flag);
      continue;
    }
    merged.push_back(flag);
    merged.push_back(value);
  }
  return merged;
}

inline int parse_args(const std::vector<std::string>& args, CLI::App& app, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_invalid;
  }
  return -1;
}

}  // namespace detail

/// Runs one invocation.  args[0] is the program name.
inline int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    Options o;
    std::map<std::string, detail::Handles> h;
    CLI::App app{"qcollapse"};
    detail::build_app(app, o, h);
    if (const int code = detail::parse_args(args, app, out, err); code >= 0) return code;

    if (!o.config.empty()) {
      const detail::Handles* active = nullptr;
      for (auto& [name, hh] : h)
        if (hh.sub->parsed()) active = &hh;
      const std::vector<std::string> merged = detail::merged_args(args, *active, o.config);
      // Re-parse from scratch so that defaults, config and flags are applied in one pass.
      Options o2;
      std::map<std::string, detail::Handles> h2;
      CLI::App app2{"qcollapse"};
      detail::build_app(app2, o2, h2);
      if (const int code = detail::parse_args(merged, app2, out, err); code >= 0) return code;
      return detail::dispatch(o2, h2, out, err);
    }
    return detail::dispatch(o, h, out, err);
  } catch (const HaltedAtCore& e) {
    err << "error: " << e.what() << "\n";
    return exit_numerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::validation ? exit_invalid : exit_numerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_numerical;
  }
}

inline int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return parse_and_dispatch(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace qcollapse::cli
