#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "skewflow/diagnostics.hpp"
#include "skewflow/dynamics.hpp"
#include "skewflow/errors.hpp"
#include "skewflow/game.hpp"
#include "skewflow/mirror_map.hpp"

namespace skewflow::harness {

enum class EtaRule { Fixed, CubeRoot, SquareRoot };

struct OutputSpec {
  std::string kind;  ///< trajectory_csv | diagnostics_csv | svg_plot
  std::string path;
};

struct InitialSpec {
  bool dual = true;
  Vec first;   ///< x₀ or p₀
  Vec second;  ///< y₀ or q₀
};

/// One experiment as read from a JSON config file.
///
///   {
///     "name": "fig_quad1",
///     "game": "scalar1",                    // preset, or {"payoff": [[...]]}
///     "maps": ["euclidean", "euclidean"],
///     "initial": {"x": [3], "y": [3]},      // or {"p": [...], "q": [...]}
///     "scheme": "alternating",
///     "eta": 0.1,                           // or "eta_rule": "K^{-1/3}"
///     "steps": 300,
///     "outputs": [{"kind": "trajectory_csv", "path": "fig_quad1.csv"}]
///   }
///
/// Sweeps replace "steps" with {"sweep": {"steps": [...], "summary_csv": "..."}}.
struct ExperimentConfig {
  std::string name;
  Matrix payoff;
  std::string map_p = "euclidean";
  std::string map_q = "euclidean";
  std::optional<double> domain_bound;
  InitialSpec initial;
  Scheme scheme = Scheme::Alternating;
  EtaRule eta_rule = EtaRule::Fixed;
  double eta = 0.0;
  double eta_scale = 1.0;
  std::size_t steps = 0;
  double backward_tol = 1e-12;
  std::size_t backward_max_iters = 500;
  std::vector<OutputSpec> outputs;
  std::vector<std::size_t> sweep_steps;
  std::string summary_csv;

  bool is_sweep() const noexcept { return !sweep_steps.empty(); }
};

inline EtaRule parse_eta_rule(const std::string& s) {
  if (s == "K^{-1/3}") return EtaRule::CubeRoot;
  if (s == "K^{-1/2}") return EtaRule::SquareRoot;
  if (s == "fixed") return EtaRule::Fixed;
  throw ConfigError("unknown eta_rule '" + s + "'");
}

namespace detail {

inline Vec read_vec(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
  Vec v;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(std::string(what) + " must contain numbers only");
    v.push_back(e.get<double>());
  }
  return v;
}

inline std::size_t read_count(const nlohmann::json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 1) {
    throw ConfigError(std::string(what) + " must be a positive integer");
  }
  return static_cast<std::size_t>(j.get<long long>());
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using nlohmann::json;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  c.name = j.value("name", std::string("experiment"));

  if (!j.contains("game")) throw ConfigError("missing 'game'");
  const json& g = j.at("game");
  try {
    if (g.is_string()) {
      c.payoff = preset_payoff(g.get<std::string>());
    } else if (g.is_object() && g.contains("payoff")) {
      std::vector<std::vector<double>> rows;
      for (const auto& r : g.at("payoff")) rows.push_back(detail::read_vec(r, "payoff row"));
      c.payoff = Matrix::from_rows(rows);
    } else {
      throw ConfigError("'game' must be a preset name or {\"payoff\": [[...]]}");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("game: ") + e.what());
  }

  if (j.contains("maps")) {
    const json& m = j.at("maps");
    if (!m.is_array() || m.size() != 2 || !m[0].is_string() || !m[1].is_string()) {
      throw ConfigError("'maps' must be two mirror-map names");
    }
    c.map_p = m[0].get<std::string>();
    c.map_q = m[1].get<std::string>();
  }
  if (j.contains("domain_bound")) {
    if (!j.at("domain_bound").is_number()) throw ConfigError("domain_bound must be a number");
    c.domain_bound = j.at("domain_bound").get<double>();
  }

  if (!j.contains("initial")) throw ConfigError("missing 'initial'");
  const json& init = j.at("initial");
  if (init.contains("x") && init.contains("y")) {
    c.initial = {true, detail::read_vec(init.at("x"), "initial x"),
                 detail::read_vec(init.at("y"), "initial y")};
  } else if (init.contains("p") && init.contains("q")) {
    c.initial = {false, detail::read_vec(init.at("p"), "initial p"),
                 detail::read_vec(init.at("q"), "initial q")};
  } else {
    throw ConfigError("'initial' needs either x and y or p and q");
  }

  try {
    c.scheme = parse_scheme(j.value("scheme", std::string("alternating")));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  const bool has_eta = j.contains("eta");
  const bool has_rule = j.contains("eta_rule");
  if (has_eta == has_rule) throw ConfigError("exactly one of 'eta' and 'eta_rule' is required");
  if (has_eta) {
    if (!j.at("eta").is_number()) throw ConfigError("eta must be a number");
    c.eta = j.at("eta").get<double>();
    if (!(c.eta > 0.0) || !std::isfinite(c.eta)) throw ConfigError("eta must be positive");
  } else {
    if (!j.at("eta_rule").is_string()) throw ConfigError("eta_rule must be a string");
    c.eta_rule = parse_eta_rule(j.at("eta_rule").get<std::string>());
    if (c.eta_rule == EtaRule::Fixed) throw ConfigError("eta_rule 'fixed' needs 'eta' instead");
  }
  if (j.contains("eta_scale")) {
    c.eta_scale = j.at("eta_scale").get<double>();
    if (!(c.eta_scale > 0.0)) throw ConfigError("eta_scale must be positive");
  }
  if (j.contains("backward_tol")) c.backward_tol = j.at("backward_tol").get<double>();
  if (j.contains("backward_max_iters")) {
    c.backward_max_iters = detail::read_count(j.at("backward_max_iters"), "backward_max_iters");
  }

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    if (!s.contains("steps") || !s.at("steps").is_array() || s.at("steps").size() < 2) {
      throw ConfigError("sweep needs at least two 'steps' values");
    }
    for (const auto& k : s.at("steps")) c.sweep_steps.push_back(detail::read_count(k, "sweep step"));
    c.summary_csv = s.value("summary_csv", c.name + "_summary.csv");
  } else {
    if (!j.contains("steps")) throw ConfigError("missing 'steps'");
    c.steps = detail::read_count(j.at("steps"), "steps");
  }

  if (j.contains("outputs")) {
    for (const auto& o : j.at("outputs")) {
      OutputSpec out{o.value("kind", std::string()), o.value("path", std::string())};
      if (out.kind != "trajectory_csv" && out.kind != "diagnostics_csv" && out.kind != "svg_plot") {
        throw ConfigError("unknown output kind '" + out.kind + "'");
      }
      if (out.path.empty()) throw ConfigError("output '" + out.kind + "' has no path");
      c.outputs.push_back(std::move(out));
    }
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse '" + path.string() + "': " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid config '" + path.string() + "': " + e.what());
  }
}

/// The game and initial state a config describes.
struct Setup {
  BilinearGame game;
  JointState initial;
};

inline Setup build_setup(const ExperimentConfig& c) {
  try {
    MirrorMap mp = MirrorMap::from_key(c.map_p, c.payoff.rows());
    MirrorMap mq = MirrorMap::from_key(c.map_q, c.payoff.cols());
    if (c.domain_bound) {
      if (mp.bounded()) mp = mp.with_domain_bound(*c.domain_bound);
      if (mq.bounded()) mq = mq.with_domain_bound(*c.domain_bound);
    }
    BilinearGame game = make_game(c.payoff, std::move(mp), std::move(mq));
    JointState s = c.initial.dual ? state_from_dual(game, c.initial.first, c.initial.second)
                                  : lift_state(game, c.initial.first, c.initial.second);
    return {std::move(game), std::move(s)};
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

/// Step size for horizon K and the constant c behind it.
struct EtaChoice {
  double eta = 0.0;
  double constant = 0.0;
  std::string note;
};

/// η = c·K^{−1/3} or c·K^{−1/2}. With entropy on both sides c is the
/// minimizer of the matching regret bound; otherwise c = 1. eta_scale
/// multiplies c either way.
inline EtaChoice choose_eta(const ExperimentConfig& c, const Setup& s, std::size_t steps) {
  const double k = static_cast<double>(steps);
  if (c.eta_rule == EtaRule::Fixed) return {c.eta, c.eta, "fixed"};
  const auto cert = certified_constants(s.game);
  const double alpha = s.game.alpha_max();
  double constant = 1.0;
  std::string note = "c = 1 (no certified constants)";
  if (c.eta_rule == EtaRule::CubeRoot) {
    if (cert && alpha > 0.0) {
      const double m = regret_smooth_constant(s.game, s.initial);
      constant = std::cbrt(3.0 / (4.0 * alpha * alpha * alpha * m * m * m));
      note = "c = (3/(4 a^3 M^3))^(1/3), M = " + std::to_string(m);
    }
    constant *= c.eta_scale;
    return {constant * std::pow(k, -1.0 / 3.0), constant, note};
  }
  if (cert && alpha > 0.0) {
    const double m = std::max(player_radius(s.game.map_p(), s.initial.p),
                              player_radius(s.game.map_q(), s.initial.q));
    constant = 2.0 * std::sqrt(m) / (alpha * cert->lipschitz_l2 * std::sqrt(cert->smooth_l2));
    note = "c = 2 sqrt(M)/(a L1 sqrt(L2)), M = " + std::to_string(m);
  }
  constant *= c.eta_scale;
  return {constant / std::sqrt(k), constant, note};
}

inline SchemeSpec scheme_spec(const ExperimentConfig& c, double eta) {
  SchemeSpec spec;
  spec.scheme = c.scheme;
  spec.eta = eta;
  spec.backward_tol = c.backward_tol;
  spec.backward_max_iters = c.backward_max_iters;
  return spec;
}

}  // namespace skewflow::harness
