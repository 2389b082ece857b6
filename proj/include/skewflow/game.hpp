#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <utility>

#include "skewflow/errors.hpp"
#include "skewflow/linalg.hpp"
#include "skewflow/mirror_map.hpp"

namespace skewflow {

/// Paired primal point (p, q) and dual point (x, y) with p = ∇f(x), q = ∇g(y).
struct JointState {
  Vec p;
  Vec q;
  Vec x;
  Vec y;
};

/// min_p max_q pᵀAq with a mirror map per player.
class BilinearGame {
 public:
  BilinearGame(Matrix payoff, MirrorMap map_p, MirrorMap map_q, SingularValueBounds sv)
      : payoff_(std::move(payoff)),
        map_p_(std::move(map_p)),
        map_q_(std::move(map_q)),
        sv_(sv) {}

  const Matrix& payoff() const noexcept { return payoff_; }
  const MirrorMap& map_p() const noexcept { return map_p_; }
  const MirrorMap& map_q() const noexcept { return map_q_; }
  double alpha_max() const noexcept { return sv_.alpha_max; }
  double alpha_min() const noexcept { return sv_.alpha_min; }
  std::size_t rows() const noexcept { return payoff_.rows(); }
  std::size_t cols() const noexcept { return payoff_.cols(); }

  /// Both strategy sets have compact closure.
  bool bounded() const noexcept { return map_p_.bounded() && map_q_.bounded(); }

 private:
  Matrix payoff_;
  MirrorMap map_p_;
  MirrorMap map_q_;
  SingularValueBounds sv_;
};

inline BilinearGame make_game(Matrix payoff, MirrorMap map_p, MirrorMap map_q) {
  if (payoff.rows() != map_p.dim() || payoff.cols() != map_q.dim()) {
    throw DimensionError("payoff is " + std::to_string(payoff.rows()) + "x" +
                         std::to_string(payoff.cols()) + " but mirror maps have dimensions " +
                         std::to_string(map_p.dim()) + " and " + std::to_string(map_q.dim()));
  }
  const SingularValueBounds sv = singular_value_bounds(payoff);
  return BilinearGame(std::move(payoff), std::move(map_p), std::move(map_q), sv);
}

/// Named payoff matrices: "matching_pennies", "identity2", "scalar1", and
/// "skewed2" (diag(2, 1), a matching-pennies variant with nonzero value).
inline Matrix preset_payoff(std::string_view name) {
  if (name == "matching_pennies") return Matrix::from_rows({{1.0, -1.0}, {-1.0, 1.0}});
  if (name == "identity2") return Matrix::identity(2);
  if (name == "scalar1") return Matrix::from_rows({{1.0}});
  if (name == "skewed2") return Matrix::from_rows({{2.0, 0.0}, {0.0, 1.0}});
  throw InvalidArgument("unknown payoff preset '" + std::string(name) + "'");
}

inline double payoff_value(const BilinearGame& game, ConstSpan p, ConstSpan q) {
  return bilinear(p, game.payoff(), q);
}

/// max over q̃ of pᵀAq̃ − min over p̃ of p̃ᵀAq, evaluated exactly on the vertices
/// of both (compact) strategy sets.
inline double duality_gap(const BilinearGame& game, ConstSpan p, ConstSpan q) {
  if (!game.bounded()) {
    throw UnsupportedError("duality gap needs bounded strategy sets; got " +
                           std::string(game.map_p().key()) + " x " +
                           std::string(game.map_q().key()));
  }
  require_size(p, game.rows(), "duality_gap p");
  require_size(q, game.cols(), "duality_gap q");
  const Vec atp = multiply_transposed(game.payoff(), p);
  const Vec aq = multiply(game.payoff(), q);
  double best_q = -std::numeric_limits<double>::infinity();
  for (const Vec& v : game.map_q().vertices()) best_q = std::max(best_q, dot(atp, v));
  double best_p = std::numeric_limits<double>::infinity();
  for (const Vec& v : game.map_p().vertices()) best_p = std::min(best_p, dot(v, aq));
  return best_q - best_p;
}

inline JointState lift_state(const BilinearGame& game, ConstSpan p, ConstSpan q) {
  require_size(p, game.rows(), "lift_state p");
  require_size(q, game.cols(), "lift_state q");
  JointState s;
  s.x = game.map_p().primal_gradient(p);
  s.y = game.map_q().primal_gradient(q);
  s.p = game.map_p().dual_gradient(s.x);
  s.q = game.map_q().dual_gradient(s.y);
  return s;
}

inline JointState state_from_dual(const BilinearGame& game, Vec x, Vec y) {
  require_size(x, game.rows(), "state_from_dual x");
  require_size(y, game.cols(), "state_from_dual y");
  JointState s;
  s.p = game.map_p().dual_gradient(x);
  s.q = game.map_q().dual_gradient(y);
  s.x = std::move(x);
  s.y = std::move(y);
  return s;
}

}  // namespace skewflow
