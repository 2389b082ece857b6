#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "skewflow/diagnostics.hpp"
#include "skewflow/dynamics.hpp"
#include "skewflow/errors.hpp"
#include "skewflow/game.hpp"
#include "skewflow/harness/config.hpp"
#include "skewflow/harness/csv.hpp"
#include "skewflow/harness/svg.hpp"

#ifndef SKEWFLOW_PRESET_DIR
#define SKEWFLOW_PRESET_DIR "presets"
#endif

namespace skewflow::harness {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

inline fs::path preset_dir() {
  if (const char* env = std::getenv("SKEWFLOW_PRESET_DIR")) return env;
  return SKEWFLOW_PRESET_DIR;
}

inline fs::path output_dir() {
  if (const char* env = std::getenv("SKEWFLOW_OUT_DIR")) return env;
  return fs::current_path();
}

/// A config path as given, or the name of a bundled preset.
inline fs::path resolve_config(const std::string& arg) {
  const fs::path direct(arg);
  if (fs::is_regular_file(direct)) return direct;
  const fs::path preset = preset_dir() / (arg + ".json");
  if (fs::is_regular_file(preset)) return preset;
  throw ConfigError("no config file or preset named '" + arg + "'");
}

inline fs::path resolve_output(const std::string& path) {
  const fs::path p(path);
  const fs::path out = p.is_absolute() ? p : output_dir() / p;
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  return out;
}

inline std::string format_short(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

struct RunResult {
  Trajectory trajectory;
  std::vector<DiagnosticsRow> rows;
  EtaChoice eta;
};

inline RunResult execute(const ExperimentConfig& c, const Setup& s, std::size_t steps) {
  RunResult r;
  r.eta = choose_eta(c, s, steps);
  r.trajectory = run(s.game, scheme_spec(c, r.eta.eta), s.initial, steps);
  r.rows = tabulate(s.game, r.trajectory);
  return r;
}

inline void write_outputs(const ExperimentConfig& c, const Setup& s, const RunResult& r) {
  std::optional<fs::path> trajectory_csv;
  for (const OutputSpec& o : c.outputs) {
    if (o.kind == "svg_plot") continue;
    const fs::path path = resolve_output(o.path);
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    if (o.kind == "trajectory_csv") {
      write_trajectory_csv(out, s.game, r.trajectory, r.rows);
      trajectory_csv = path;
    } else {
      write_diagnostics_csv(out, r.rows);
    }
  }
  for (const OutputSpec& o : c.outputs) {
    if (o.kind != "svg_plot") continue;
    std::ostringstream csv;
    write_trajectory_csv(csv, s.game, r.trajectory, r.rows);
    std::istringstream in(csv.str());
    const fs::path path = resolve_output(o.path);
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    write_svg(out, CsvTable::parse(in), c.name);
  }
}

inline std::string summary_line(const ExperimentConfig& c, const RunResult& r) {
  const DiagnosticsRow& last = r.rows.back();
  std::ostringstream out;
  out << c.name << ": scheme=" << scheme_name(c.scheme) << " eta=" << format_short(r.eta.eta)
      << " K=" << r.trajectory.steps() << " energy=" << format_short(last.energy)
      << " modified_energy=" << format_short(last.modified_energy)
      << " total_regret=" << format_short(last.total_regret) << " duality_gap_avg="
      << (last.duality_gap_avg ? format_short(*last.duality_gap_avg) : std::string("n/a"));
  return out.str();
}

/// `skewflow run <config>`: 0 on success, 2 on config errors, 3 on
/// numerical failure.
inline int cmd_run(const std::string& config, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  try {
    const ExperimentConfig c = load_config(resolve_config(config));
    if (c.is_sweep()) throw ConfigError("'" + config + "' is a sweep config; use 'sweep'");
    const Setup s = build_setup(c);
    const RunResult r = execute(c, s, c.steps);
    write_outputs(c, s, r);
    out << summary_line(c, r) << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepPoint {
  std::size_t steps = 0;
  double eta = 0.0;
  double duality_gap = 0.0;
  double total_regret = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double slope = 0.0;
  EtaChoice eta;
};

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw InvalidArgument("slope fit needs two or more points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("slope fit needs positive data");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

inline SweepResult run_sweep(const ExperimentConfig& c) {
  if (!c.is_sweep()) throw ConfigError("config '" + c.name + "' has no sweep section");
  const Setup s = build_setup(c);
  if (!s.game.bounded()) throw ConfigError("sweeps need bounded strategy sets");
  SweepResult out;
  std::vector<double> ks, gaps;
  for (std::size_t k : c.sweep_steps) {
    const EtaChoice eta = choose_eta(c, s, k);
    const Trajectory traj = run(s.game, scheme_spec(c, eta.eta), s.initial, k);
    SweepPoint p{k, eta.eta, duality_gap_of_averages(s.game, traj), total_regret(s.game, traj)};
    out.points.push_back(p);
    out.eta = eta;
    ks.push_back(static_cast<double>(k));
    gaps.push_back(p.duality_gap);
  }
  out.slope = loglog_slope(ks, gaps);
  return out;
}

/// `skewflow sweep <config>`: runs every horizon, writes K,eta,dg,total_regret
/// and prints the fitted log-log slope of dg against K.
inline int cmd_sweep(const std::string& config, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
  try {
    const ExperimentConfig c = load_config(resolve_config(config));
    const SweepResult r = run_sweep(c);
    const fs::path path = resolve_output(c.summary_csv);
    std::ofstream csv(path);
    if (!csv) throw ConfigError("cannot write '" + path.string() + "'");
    csv << "K,eta,dg,total_regret\n";
    for (const SweepPoint& p : r.points) {
      csv << p.steps << ',' << format_real(p.eta) << ',' << format_real(p.duality_gap) << ','
          << format_real(p.total_regret) << '\n';
    }
    out << c.name << ": scheme=" << scheme_name(c.scheme) << " points=" << r.points.size()
        << " eta: " << r.eta.note << " (c=" << format_short(r.eta.constant) << ")\n";
    out << c.name << ": slope=" << format_short(r.slope) << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyCase {
  std::string name;
  Matrix payoff;
  std::string map_p;
  std::string map_q;
  bool dual_start = true;
  Vec a;  ///< x₀ or p₀
  Vec b;  ///< y₀ or q₀
  Scheme scheme = Scheme::Alternating;
  double eta = 0.1;
  std::size_t steps = 100;
};

/// Every mirror-map kind under every scheme at small K.
inline std::vector<VerifyCase> verification_matrix() {
  struct Family {
    std::string name;
    Matrix payoff;
    std::string map_p, map_q;
    bool dual_start;
    Vec a, b;
  };
  const std::vector<Family> families{
      {"quadratic", Matrix::from_rows({{1.0}}), "euclidean", "euclidean", true, {3.0}, {3.0}},
      {"entropy_pennies", preset_payoff("matching_pennies"), "entropy", "entropy", false,
       {0.7, 0.3}, {0.4, 0.6}},
      {"entropy_skewed", preset_payoff("skewed2"), "entropy", "entropy", false, {0.2, 0.8},
       {0.6, 0.4}},
      {"logcosh", Matrix::from_rows({{1.0}}), "logcosh", "logcosh", true, {3.0}, {3.0}},
      {"quad_logcosh", Matrix::from_rows({{1.0}}), "euclidean", "logcosh", true, {3.0}, {3.0}},
      {"cubic", Matrix::from_rows({{1.0}}), "cubic", "cubic", true, {0.5}, {0.5}},
  };
  struct SchemeRun {
    Scheme scheme;
    double eta;
    std::size_t steps;
  };
  const std::vector<SchemeRun> schemes{{Scheme::Alternating, 0.1, 300},
                                       {Scheme::Forward, 0.05, 100},
                                       {Scheme::Backward, 0.05, 100},
                                       {Scheme::ContinuousRef, 1e-3, 1000}};
  std::vector<VerifyCase> out;
  for (const Family& f : families)
    for (const SchemeRun& s : schemes) {
      out.push_back({f.name + "/" + std::string(scheme_name(s.scheme)), f.payoff, f.map_p,
                     f.map_q, f.dual_start, f.a, f.b, s.scheme, s.eta, s.steps});
    }
  return out;
}

struct VerifyOptions {
  /// Test hook: perturb x at this step of every alternating run before the
  /// identities are checked.
  std::optional<std::size_t> corrupt_step;
};

struct VerifyLine {
  std::string case_name;
  BoundReport report;
};

inline std::vector<VerifyLine> run_verification(const VerifyOptions& opts = {}) {
  std::vector<VerifyLine> lines;
  for (const VerifyCase& vc : verification_matrix()) {
    const BilinearGame game =
        make_game(vc.payoff, MirrorMap::from_key(vc.map_p, vc.payoff.rows()),
                  MirrorMap::from_key(vc.map_q, vc.payoff.cols()));
    const JointState z0 =
        vc.dual_start ? state_from_dual(game, vc.a, vc.b) : lift_state(game, vc.a, vc.b);
    SchemeSpec spec;
    spec.scheme = vc.scheme;
    spec.eta = vc.eta;
    Trajectory traj = run(game, spec, z0, vc.steps);
    if (opts.corrupt_step && vc.scheme == Scheme::Alternating &&
        *opts.corrupt_step < traj.states.size()) {
      JointState& s = traj.states[*opts.corrupt_step];
      s.x[0] += 1e-2;
      s.p = game.map_p().dual_gradient(s.x);
    }
    for (BoundReport& r : verify_identities(game, traj)) lines.push_back({vc.name, std::move(r)});
  }
  return lines;
}

/// `skewflow verify`: prints one table row per check, exit 0 iff all pass,
/// otherwise 1 with the failing check names on the error stream.
inline int cmd_verify(const VerifyOptions& opts = {}, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  std::vector<VerifyLine> lines;
  try {
    lines = run_verification(opts);
  } catch (const Error& e) {
    err << "verification run failed: " << e.what() << '\n';
    return kExitFailed;
  }
  std::vector<std::string> failed;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-6s %-28s %-30s %14s %14s\n", "status", "case", "check",
                "empirical", "bound");
  out << buf;
  for (const VerifyLine& l : lines) {
    std::snprintf(buf, sizeof buf, "%-6s %-28s %-30s %14.6e %14.6e\n",
                  l.report.satisfied ? "PASS" : "FAIL", l.case_name.c_str(),
                  l.report.bound_name.c_str(), l.report.empirical_value, l.report.bound_value);
    out << buf;
    if (!l.report.satisfied) failed.push_back(l.case_name + ":" + l.report.bound_name);
  }
  out << lines.size() - failed.size() << "/" << lines.size() << " checks passed\n";
  if (failed.empty()) return kExitOk;
  err << "failed:";
  for (const std::string& f : failed) err << ' ' << f;
  err << '\n';
  return kExitFailed;
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

/// `skewflow plot <csv> [--out file.svg]`; the default output replaces the
/// extension with .svg.
inline int cmd_plot(const std::string& csv_path, const std::optional<std::string>& out_path,
                    std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    const CsvTable table = CsvTable::read(csv_path);
    fs::path target = out_path ? fs::path(*out_path) : fs::path(csv_path).replace_extension(".svg");
    std::ostringstream svg;
    write_svg(svg, table, fs::path(csv_path).stem().string());
    std::ofstream file(target);
    if (!file) throw ConfigError("cannot write '" + target.string() + "'");
    file << svg.str();
    out << "wrote " << target.string() << '\n';
    return kExitOk;
  } catch (const Error& e) {
    err << "plot error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "plot error: malformed number in '" << csv_path << "'\n";
    return kExitConfig;
  }
}

}  // namespace skewflow::harness
