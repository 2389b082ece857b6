#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "skewflow/dynamics.hpp"
#include "skewflow/errors.hpp"
#include "skewflow/game.hpp"
#include "skewflow/linalg.hpp"
#include "skewflow/mirror_map.hpp"

namespace skewflow {

// ---------------------------------------------------------------------------
// Energies and Bregman quantities in dual space
// ---------------------------------------------------------------------------

/// H(x, y) = f(x) + g(y).
inline double energy(const BilinearGame& game, ConstSpan x, ConstSpan y) {
  return game.map_p().dual_value(x) + game.map_q().dual_value(y);
}

inline double energy(const BilinearGame& game, const JointState& s) {
  return energy(game, s.x, s.y);
}

/// H_η(x, y) = H(x, y) − (η/2)⟨∇f(x), A∇g(y)⟩.
inline double modified_energy(const BilinearGame& game, ConstSpan x, ConstSpan y, double eta) {
  const Vec p = game.map_p().dual_gradient(x);
  const Vec q = game.map_q().dual_gradient(y);
  return energy(game, x, y) - 0.5 * eta * bilinear(p, game.payoff(), q);
}

inline double modified_energy(const BilinearGame& game, const JointState& s, double eta) {
  return game.map_p().dual_value(s.x) + game.map_q().dual_value(s.y) -
         0.5 * eta * bilinear(s.p, game.payoff(), s.q);
}

/// C_f(x', x) = ½(D_f(x', x) − D_f(x, x')), in the equivalent one-pass form
/// f(x') − f(x) − ½⟨∇f(x') + ∇f(x), x' − x⟩.
inline double bregman_commutator(const MirrorMap& map, ConstSpan x_new, ConstSpan x_old) {
  require_size(x_new, map.dim(), "bregman_commutator");
  require_size(x_old, map.dim(), "bregman_commutator");
  const Vec g_new = map.dual_gradient(x_new);
  const Vec g_old = map.dual_gradient(x_old);
  double lin = 0.0;
  for (std::size_t i = 0; i < map.dim(); ++i) lin += (g_new[i] + g_old[i]) * (x_new[i] - x_old[i]);
  return map.dual_value(x_new) - map.dual_value(x_old) - 0.5 * lin;
}

/// C_H(z', z) = C_f(x', x) + C_g(y', y) for the separable energy.
inline double bregman_commutator(const BilinearGame& game, const JointState& z_new,
                                 const JointState& z_old) {
  return bregman_commutator(game.map_p(), z_new.x, z_old.x) +
         bregman_commutator(game.map_q(), z_new.y, z_old.y);
}

/// D_H(z, z_ref).
inline double energy_divergence(const BilinearGame& game, ConstSpan x, ConstSpan y,
                                ConstSpan x_ref, ConstSpan y_ref) {
  return game.map_p().bregman_dual(x, x_ref) + game.map_q().bregman_dual(y, y_ref);
}

// ---------------------------------------------------------------------------
// Regret
// ---------------------------------------------------------------------------

struct RegretPair {
  double player1 = 0.0;
  double player2 = 0.0;
  double total() const noexcept { return player1 + player2; }
};

/// Running sums behind every regret and average-iterate quantity.
///
/// Each scheme pairs a player's own payoff terms with the opponent strategies
/// it is compared against:
///
///   R₁(p̂) = own₁ − p̂ᵀA·q_sum        R₂(q̂) = p_sumᵀA·q̂ − own₂
///
/// and the average iterates are p_sum / weight and q_sum / weight. The index
/// shifts differ per scheme (alternating: midpoint own terms, p over 1..K,
/// q over 0..K−1; forward: 0..K−1; backward: 1..K; continuous: trapezoid on
/// the recorded grid).
class RegretLedger {
 public:
  RegretLedger(const BilinearGame& game, const SchemeSpec& spec)
      : game_(&game),
        spec_(spec),
        p_sum_(game.rows(), 0.0),
        q_sum_(game.cols(), 0.0) {}

  void push(const JointState& s) {
    if (!prev_) {
      prev_ = s;
      return;
    }
    const JointState& a = *prev_;
    const Matrix& m = game_->payoff();
    switch (spec_.scheme) {
      case Scheme::Alternating: {
        const Vec aq0 = multiply(m, a.q);
        own1_ += 0.5 * (dot(a.p, aq0) + dot(s.p, aq0));
        own2_ += 0.5 * (dot(s.p, aq0) + bilinear(s.p, m, s.q));
        accumulate(p_sum_, s.p, 1.0);
        accumulate(q_sum_, a.q, 1.0);
        weight_ += 1.0;
        break;
      }
      case Scheme::Forward: {
        const double v = bilinear(a.p, m, a.q);
        own1_ += v;
        own2_ += v;
        accumulate(p_sum_, a.p, 1.0);
        accumulate(q_sum_, a.q, 1.0);
        weight_ += 1.0;
        break;
      }
      case Scheme::Backward: {
        const double v = bilinear(s.p, m, s.q);
        own1_ += v;
        own2_ += v;
        accumulate(p_sum_, s.p, 1.0);
        accumulate(q_sum_, s.q, 1.0);
        weight_ += 1.0;
        break;
      }
      case Scheme::ContinuousRef: {
        const double h = 0.5 * spec_.eta;
        const double v = h * (bilinear(a.p, m, a.q) + bilinear(s.p, m, s.q));
        own1_ += v;
        own2_ += v;
        accumulate(p_sum_, a.p, h);
        accumulate(p_sum_, s.p, h);
        accumulate(q_sum_, a.q, h);
        accumulate(q_sum_, s.q, h);
        weight_ += spec_.eta;
        break;
      }
    }
    prev_ = s;
    ++steps_;
  }

  std::size_t steps() const noexcept { return steps_; }

  /// Cumulative regret against fixed reference strategies.
  RegretPair at(ConstSpan p_ref, ConstSpan q_ref) const {
    require_size(p_ref, game_->rows(), "regret reference p");
    require_size(q_ref, game_->cols(), "regret reference q");
    const Matrix& m = game_->payoff();
    return {own1_ - bilinear(p_ref, m, q_sum_), bilinear(p_sum_, m, q_ref) - own2_};
  }

  /// Regret against the best fixed response of each player. Bounded players
  /// are maximized over their vertices (the objective is affine, so this is
  /// the exact maximum); an unbounded player is measured at the origin, the
  /// equilibrium of the unconstrained games.
  RegretPair best_response() const {
    const Matrix& m = game_->payoff();
    RegretPair r;
    const Vec aq = multiply(m, q_sum_);
    double min_p = 0.0;
    if (game_->map_p().bounded()) {
      min_p = std::numeric_limits<double>::infinity();
      for (const Vec& v : game_->map_p().vertices()) min_p = std::min(min_p, dot(v, aq));
    }
    r.player1 = own1_ - min_p;
    const Vec atp = multiply_transposed(m, p_sum_);
    double max_q = 0.0;
    if (game_->map_q().bounded()) {
      max_q = -std::numeric_limits<double>::infinity();
      for (const Vec& v : game_->map_q().vertices()) max_q = std::max(max_q, dot(atp, v));
    }
    r.player2 = max_q - own2_;
    return r;
  }

  /// Scheme-correct average iterates (p̄, q̄); requires at least one step.
  std::pair<Vec, Vec> averages() const {
    if (steps_ == 0) throw InvalidArgument("average iterates need at least one step");
    Vec p = p_sum_;
    Vec q = q_sum_;
    for (double& v : p) v /= weight_;
    for (double& v : q) v /= weight_;
    return {std::move(p), std::move(q)};
  }

  /// Total weight of the averages: K for discrete schemes, T for continuous.
  double horizon() const noexcept { return weight_; }

 private:
  static void accumulate(Vec& acc, const Vec& v, double w) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * v[i];
  }

  const BilinearGame* game_;
  SchemeSpec spec_;
  std::optional<JointState> prev_;
  std::size_t steps_ = 0;
  double own1_ = 0.0;
  double own2_ = 0.0;
  Vec p_sum_;
  Vec q_sum_;
  double weight_ = 0.0;
};

inline RegretLedger make_ledger(const BilinearGame& game, const Trajectory& traj) {
  RegretLedger ledger(game, traj.spec);
  for (const JointState& s : traj.states) ledger.push(s);
  return ledger;
}

namespace detail {
inline void require_scheme(const Trajectory& traj, Scheme expected) {
  if (traj.spec.scheme != expected) {
    throw SchemeMismatchError("expected a " + std::string(scheme_name(expected)) +
                              " trajectory, got " + std::string(scheme_name(traj.spec.scheme)));
  }
}
}  // namespace detail

/// Midpoint-weighted regrets of alternating play against (p̂, q̂).
inline RegretPair regret_alternating(const BilinearGame& game, const Trajectory& traj,
                                     ConstSpan p_ref, ConstSpan q_ref) {
  detail::require_scheme(traj, Scheme::Alternating);
  return make_ledger(game, traj).at(p_ref, q_ref);
}

inline RegretPair regret_forward(const BilinearGame& game, const Trajectory& traj,
                                 ConstSpan p_ref, ConstSpan q_ref) {
  detail::require_scheme(traj, Scheme::Forward);
  return make_ledger(game, traj).at(p_ref, q_ref);
}

inline RegretPair regret_backward(const BilinearGame& game, const Trajectory& traj,
                                  ConstSpan p_ref, ConstSpan q_ref) {
  detail::require_scheme(traj, Scheme::Backward);
  return make_ledger(game, traj).at(p_ref, q_ref);
}

/// Trapezoidal regret integral of a continuous-reference trajectory.
inline RegretPair regret_continuous(const BilinearGame& game, const Trajectory& traj,
                                    ConstSpan p_ref, ConstSpan q_ref) {
  detail::require_scheme(traj, Scheme::ContinuousRef);
  return make_ledger(game, traj).at(p_ref, q_ref);
}

/// max over (p̂, q̂) of the scheme's cumulative regret; bounded games only.
inline double total_regret(const BilinearGame& game, const Trajectory& traj) {
  if (!game.bounded()) throw UnsupportedError("total regret needs bounded strategy sets");
  return make_ledger(game, traj).best_response().total();
}

inline double duality_gap_of_averages(const BilinearGame& game, const Trajectory& traj) {
  if (traj.steps() == 0) throw InvalidArgument("duality gap of averages needs K >= 1");
  const auto [p, q] = make_ledger(game, traj).averages();
  return duality_gap(game, p, q);
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

/// (1/12)·α³·L₃·L₁³·η³·k
inline double bound_alt_smooth(double alpha_max, double eta, double k, double l1, double l3) {
  return alpha_max * alpha_max * alpha_max * l3 * l1 * l1 * l1 * eta * eta * eta * k / 12.0;
}

inline double bound_alt_smooth(const BilinearGame& game, double eta, double k, double l1,
                               double l3) {
  return bound_alt_smooth(game.alpha_max(), eta, k, l1, l3);
}

/// 2M/η + (4α³M⁴/3)·η²·K
inline double bound_regret_smooth(double m, double alpha_max, double eta, double k) {
  return 2.0 * m / eta + 4.0 * std::pow(alpha_max, 3) * std::pow(m, 4) / 3.0 * eta * eta * k;
}

/// ½·η·α²·L₁²·L₂·K + D/η, where D bounds D_H(z₀, ẑ) (2M in the bounded case).
inline double bound_forward_regret(double divergence, double alpha_max, double eta, double k,
                                   double l1, double l2) {
  return 0.5 * eta * alpha_max * alpha_max * l1 * l1 * l2 * k + divergence / eta;
}

/// D/η
inline double bound_backward_regret(double divergence, double eta) { return divergence / eta; }

/// D (the continuous-time flow has constant regret).
inline double bound_continuous_regret(double divergence) { return divergence; }

/// Third-order smoothness constant of log Σ e^{x_i} in ℓ∞: 8 per block.
inline double third_order_constant_logsumexp(std::size_t dim) {
  if (dim < 2) throw InvalidArgument("log-sum-exp third-order constant needs dim >= 2");
  return 8.0;
}

/// Constants known in closed form for entropy × entropy games.
struct CertifiedConstants {
  double lipschitz_inf = 2.0;    ///< ‖∇H‖₁ = ‖p‖₁ + ‖q‖₁
  double third_order_inf = 16.0; ///< 8 per log-sum-exp block
  double lipschitz_l2 = std::sqrt(2.0);
  double smooth_l2 = 0.5;        ///< ‖diag(p) − ppᵀ‖₂ ≤ ½
};

inline std::optional<CertifiedConstants> certified_constants(const BilinearGame& game) {
  if (game.map_p().kind() == MapKind::NegativeEntropySimplex &&
      game.map_q().kind() == MapKind::NegativeEntropySimplex) {
    return CertifiedConstants{};
  }
  return std::nullopt;
}

/// Divergence radius of one bounded player: the configured domain bound, or
/// sup over the domain of D_φ(·, p₀).
inline double player_radius(const MirrorMap& map, ConstSpan p0) {
  if (map.domain_bound()) return *map.domain_bound();
  return map.divergence_radius(p0);
}

/// Upper bound on D_H(z₀, ẑ) over every reference used by best_response():
/// a bounded player contributes its divergence radius, an unbounded one its
/// divergence from the origin.
inline double reference_divergence(const BilinearGame& game, const JointState& initial) {
  auto side = [](const MirrorMap& map, const Vec& p0, const Vec& x0) {
    if (map.bounded()) return player_radius(map, p0);
    const Vec zero(map.dim(), 0.0);
    return map.bregman_dual(x0, zero);
  };
  return side(game.map_p(), initial.p, initial.x) + side(game.map_q(), initial.q, initial.y);
}

/// The single constant M of the alternating regret bound for entropy games:
/// it has to dominate the divergence radius, the strategy norm (1), and the
/// third-order constant of log-sum-exp (8) at once.
inline double regret_smooth_constant(const BilinearGame& game, const JointState& initial) {
  if (!certified_constants(game)) {
    throw UnsupportedError("regret-smooth constant is certified for entropy games only");
  }
  const double radius = std::max(player_radius(game.map_p(), initial.p),
                                 player_radius(game.map_q(), initial.q));
  return std::max({radius, 1.0, third_order_constant_logsumexp(game.rows())});
}

// ---------------------------------------------------------------------------
// Per-step table
// ---------------------------------------------------------------------------

struct DiagnosticsRow {
  std::size_t step = 0;
  double energy = 0.0;
  double modified_energy = 0.0;
  double commutator_step = 0.0;
  double regret1 = 0.0;
  double regret2 = 0.0;
  double total_regret = 0.0;
  std::optional<double> duality_gap_avg;
};

/// One row per recorded state. Regret columns use best_response(); the
/// duality gap column is empty for unbounded games and at k = 0.
inline std::vector<DiagnosticsRow> tabulate(const BilinearGame& game, const Trajectory& traj) {
  std::vector<DiagnosticsRow> rows;
  rows.reserve(traj.states.size());
  RegretLedger ledger(game, traj.spec);
  const double eta = traj.spec.eta;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const JointState& s = traj.states[k];
    ledger.push(s);
    DiagnosticsRow row;
    row.step = k;
    row.energy = energy(game, s);
    row.modified_energy = modified_energy(game, s, eta);
    if (k > 0) row.commutator_step = bregman_commutator(game, s, traj.states[k - 1]);
    const RegretPair r = ledger.best_response();
    row.regret1 = r.player1;
    row.regret2 = r.player2;
    row.total_regret = r.total();
    if (k > 0 && game.bounded()) {
      const auto [p, q] = ledger.averages();
      row.duality_gap_avg = duality_gap(game, p, q);
    }
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Identity and bound verification
// ---------------------------------------------------------------------------

struct BoundReport {
  std::string bound_name;
  double bound_value = 0.0;
  double empirical_value = 0.0;
  bool satisfied = false;

  static BoundReport make(std::string name, double bound, double empirical) {
    const bool ok = empirical <= bound * (1.0 + 1e-9) + 1e-9;
    return {std::move(name), bound, empirical, ok};
  }
};

/// Deterministic interior reference strategy, off the symmetric points.
inline Vec interior_reference(const MirrorMap& map) {
  switch (map.kind()) {
    case MapKind::NegativeEntropySimplex: {
      Vec p(map.dim());
      double s = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] = static_cast<double>(i + 1));
      for (double& v : p) v /= s;
      return p;
    }
    case MapKind::LogCosh1D: return {0.5};
    default: return Vec(map.dim(), 0.0);
  }
}

namespace detail {

// ℓ2 smoothness of one conjugate block over the states visited.
inline double block_smoothness_l2(const MirrorMap& map, double max_abs_dual) {
  switch (map.kind()) {
    case MapKind::EuclideanQuadratic: return 1.0;
    case MapKind::NegativeEntropySimplex: return 0.5;
    case MapKind::LogCosh1D: return 1.0;
    case MapKind::Cubic1D: return 2.0 * max_abs_dual;
  }
  return 0.0;
}

}  // namespace detail

/// Checks every identity and bound that applies to the trajectory's scheme.
///
/// Identities are checked at every step; absolute tolerances are scaled by
/// max(1, |H(z₀)|). Failures are reported, never thrown.
///
///   alternating  lemma_alt, quadratic_energy (quadratic maps), regret_energy,
///                regret_duality_gap (bounded), alt_smooth_bound (entropy)
///   forward      forward_monotone, forward_regret_bound,
///                forward_regret_duality_gap (bounded)
///   backward     backward_monotone, backward_residual, backward_regret_bound,
///                backward_regret_duality_gap (bounded)
///   continuous   energy_conservation, continuous_regret_bound,
///                continuous_regret_duality_gap (bounded)
inline std::vector<BoundReport> verify_identities(const BilinearGame& game,
                                                  const Trajectory& traj) {
  if (traj.states.empty()) throw InvalidArgument("cannot verify an empty trajectory");
  std::vector<BoundReport> out;
  const JointState& z0 = traj.states.front();
  const double eta = traj.spec.eta;
  const double h0 = energy(game, z0);
  const double scale = std::max(1.0, std::abs(h0));
  const std::size_t steps = traj.steps();
  const bool bounded = game.bounded();

  // Worst violation of "average regret equals the gap of the averages", with
  // the boundary correction that alternating play carries.
  auto duality_gap_identity = [&](const std::string& name) {
    RegretLedger ledger(game, traj.spec);
    const double v0 = payoff_value(game, z0.p, z0.q);
    double worst = 0.0;
    for (std::size_t k = 0; k <= steps; ++k) {
      const JointState& s = traj.states[k];
      ledger.push(s);
      if (k == 0) continue;
      const auto [p, q] = ledger.averages();
      const double gap = duality_gap(game, p, q);
      const double w = ledger.horizon();
      double lhs = gap;
      if (traj.spec.scheme == Scheme::Alternating) {
        lhs += (v0 - payoff_value(game, s.p, s.q)) / (2.0 * w);
      }
      worst = std::max(worst, std::abs(lhs - ledger.best_response().total() / w));
    }
    out.push_back(BoundReport::make(name, 1e-9 * scale, worst));
  };

  auto max_energy_drop = [&](bool increasing) {
    double worst = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      const double d = energy(game, traj.states[k + 1]) - energy(game, traj.states[k]);
      worst = std::max(worst, increasing ? -d : d);
    }
    return worst;
  };

  const double divergence = reference_divergence(game, z0);
  const double total = make_ledger(game, traj).best_response().total();

  switch (traj.spec.scheme) {
    case Scheme::Alternating: {
      double step_residual = 0.0;
      double drift = 0.0;
      double drift_rate = 0.0;
      for (std::size_t k = 0; k < steps; ++k) {
        const JointState& a = traj.states[k];
        const JointState& b = traj.states[k + 1];
        const double dh = modified_energy(game, b, eta) - modified_energy(game, a, eta);
        step_residual = std::max(step_residual, std::abs(dh - bregman_commutator(game, b, a)));
        const double d = std::abs(modified_energy(game, b, eta) - modified_energy(game, z0, eta));
        drift = std::max(drift, d);
        drift_rate = std::max(drift_rate, d / static_cast<double>(k + 1));
      }
      out.push_back(BoundReport::make("lemma_alt", 1e-9 * scale, step_residual));
      if (game.map_p().kind() == MapKind::EuclideanQuadratic &&
          game.map_q().kind() == MapKind::EuclideanQuadratic) {
        out.push_back(BoundReport::make("quadratic_energy", 1e-9 * scale, drift));
      }

      // Direct regret sums against the energy-difference formula.
      const Vec p_ref = interior_reference(game.map_p());
      const Vec q_ref = interior_reference(game.map_q());
      const Vec x_ref = game.map_p().primal_gradient(p_ref);
      const Vec y_ref = game.map_q().primal_gradient(q_ref);
      const double d0 = energy_divergence(game, z0.x, z0.y, x_ref, y_ref);
      const double m0 = modified_energy(game, z0, eta);
      RegretLedger ledger(game, traj.spec);
      double worst = 0.0;
      for (const JointState& s : traj.states) {
        ledger.push(s);
        const double direct = ledger.at(p_ref, q_ref).total();
        const double formula =
            (d0 - energy_divergence(game, s.x, s.y, x_ref, y_ref) + modified_energy(game, s, eta) -
             m0) / eta;
        const double rel =
            std::abs(direct - formula) / std::max({1.0, std::abs(direct), std::abs(formula)});
        worst = std::max(worst, rel);
      }
      out.push_back(BoundReport::make("regret_energy", 1e-8, worst));

      if (bounded) duality_gap_identity("regret_duality_gap");
      if (const auto c = certified_constants(game)) {
        out.push_back(BoundReport::make(
            "alt_smooth_bound",
            bound_alt_smooth(game, eta, 1.0, c->lipschitz_inf, c->third_order_inf), drift_rate));
      }
      break;
    }
    case Scheme::Forward: {
      out.push_back(BoundReport::make("forward_monotone", 0.0, max_energy_drop(true)));
      double l1 = 0.0;
      double zmax = 0.0;
      for (const JointState& s : traj.states) {
        l1 = std::max(l1, std::hypot(norm2(s.p), norm2(s.q)));
        zmax = std::max(zmax, detail::joint_norm_inf(s.x, s.y));
      }
      const double l2 = std::max(detail::block_smoothness_l2(game.map_p(), zmax),
                                 detail::block_smoothness_l2(game.map_q(), zmax));
      out.push_back(BoundReport::make(
          "forward_regret_bound",
          bound_forward_regret(divergence, game.alpha_max(), eta, static_cast<double>(steps), l1,
                               l2),
          total));
      if (bounded) duality_gap_identity("forward_regret_duality_gap");
      break;
    }
    case Scheme::Backward: {
      out.push_back(BoundReport::make("backward_monotone", 0.0, max_energy_drop(false)));
      double residual = 0.0;
      for (std::size_t k = 0; k < steps; ++k) {
        const JointState& b = traj.states[k + 1];
        residual = std::max(residual, backward_residual(game, traj.states[k], b, eta) /
                                          std::max(1.0, detail::joint_norm_inf(b.x, b.y)));
      }
      out.push_back(BoundReport::make("backward_residual", 10.0 * traj.spec.backward_tol, residual));
      out.push_back(BoundReport::make("backward_regret_bound",
                                      bound_backward_regret(divergence, eta), total));
      if (bounded) duality_gap_identity("backward_regret_duality_gap");
      break;
    }
    case Scheme::ContinuousRef: {
      double drift = 0.0;
      for (const JointState& s : traj.states) drift = std::max(drift, std::abs(energy(game, s) - h0));
      out.push_back(BoundReport::make("energy_conservation", 1e-9 * scale, drift));
      out.push_back(BoundReport::make("continuous_regret_bound",
                                      bound_continuous_regret(divergence) + 1e-4, total));
      if (bounded) duality_gap_identity("continuous_regret_duality_gap");
      break;
    }
  }
  return out;
}

}  // namespace skewflow
