#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "skewflow/errors.hpp"
#include "skewflow/game.hpp"
#include "skewflow/linalg.hpp"

namespace skewflow {

enum class Scheme { Forward, Backward, Alternating, ContinuousRef };

inline std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Forward: return "forward";
    case Scheme::Backward: return "backward";
    case Scheme::Alternating: return "alternating";
    case Scheme::ContinuousRef: return "continuous";
  }
  return "unknown";
}

inline Scheme parse_scheme(std::string_view name) {
  if (name == "forward") return Scheme::Forward;
  if (name == "backward") return Scheme::Backward;
  if (name == "alternating") return Scheme::Alternating;
  if (name == "continuous" || name == "continuous_ref") return Scheme::ContinuousRef;
  throw InvalidArgument("unknown scheme '" + std::string(name) + "'");
}

struct SchemeSpec {
  Scheme scheme = Scheme::Alternating;
  /// Step size; the internal RK4 step for ContinuousRef.
  double eta = 0.1;
  /// Fixed-point tolerance for Backward, relative to max(1, ‖z‖∞).
  double backward_tol = 1e-12;
  std::size_t backward_max_iters = 500;

  void validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("step size must be positive");
    if (!(backward_tol > 0.0)) throw InvalidArgument("backward tolerance must be positive");
    if (backward_max_iters == 0) throw InvalidArgument("backward_max_iters must be positive");
  }
};

/// Recorded iterates z_0..z_K of one scheme.
struct Trajectory {
  SchemeSpec spec;
  std::vector<JointState> states;

  std::size_t steps() const noexcept { return states.empty() ? 0 : states.size() - 1; }
};

/// `run` stops with OverflowError once a dual coordinate grows past this.
inline constexpr double kOverflowLimit = 1e150;

namespace detail {

inline double joint_norm_inf(const Vec& x, const Vec& y) {
  return std::max(norm_inf(x), norm_inf(y));
}

}  // namespace detail

/// Alternating mirror descent in dual space (symplectic Euler):
///   x' = x − ηA∇g(y),   y' = y + ηAᵀ∇f(x').
inline JointState step_alternating(const BilinearGame& game, const JointState& s, double eta) {
  JointState n;
  n.x = axpy(s.x, -eta, multiply(game.payoff(), s.q));
  n.p = game.map_p().dual_gradient(n.x);
  n.y = axpy(s.y, eta, multiply_transposed(game.payoff(), n.p));
  n.q = game.map_q().dual_gradient(n.y);
  return n;
}

/// Simultaneous mirror descent: z' = z − ηJ∇H(z).
inline JointState step_forward(const BilinearGame& game, const JointState& s, double eta) {
  Vec x = axpy(s.x, -eta, multiply(game.payoff(), s.q));
  Vec y = axpy(s.y, eta, multiply_transposed(game.payoff(), s.p));
  return state_from_dual(game, std::move(x), std::move(y));
}

/// ‖z' − z + ηJ∇H(z')‖∞, the defect of z' as a backward step from z.
inline double backward_residual(const BilinearGame& game, const JointState& from,
                                const JointState& to, double eta) {
  const Vec rx = axpy(axpy(to.x, -1.0, from.x), eta, multiply(game.payoff(), to.q));
  const Vec ry = axpy(axpy(to.y, -1.0, from.y), -eta, multiply_transposed(game.payoff(), to.p));
  return detail::joint_norm_inf(rx, ry);
}

/// Proximal (implicit) simultaneous step z' = z − ηJ∇H(z'), solved by Picard
/// iteration seeded with the forward step. Contracts when η·α_max·L₂ < 1.
inline JointState step_backward(const BilinearGame& game, const JointState& s,
                                const SchemeSpec& spec) {
  const double eta = spec.eta;
  JointState cur = step_forward(game, s, eta);
  double diff = 0.0;
  for (std::size_t it = 0; it < spec.backward_max_iters; ++it) {
    JointState next = state_from_dual(game, axpy(s.x, -eta, multiply(game.payoff(), cur.q)),
                                      axpy(s.y, eta, multiply_transposed(game.payoff(), cur.p)));
    diff = std::max(norm_inf(axpy(next.x, -1.0, cur.x)), norm_inf(axpy(next.y, -1.0, cur.y)));
    cur = std::move(next);
    const double scale = std::max(1.0, detail::joint_norm_inf(cur.x, cur.y));
    if (!std::isfinite(diff)) break;
    if (diff <= spec.backward_tol * scale) {
      const double res = backward_residual(game, s, cur, eta);
      if (res > 10.0 * spec.backward_tol * scale) {
        throw ConvergenceError("backward step fixed point failed the residual check", res);
      }
      return cur;
    }
  }
  throw ConvergenceError("backward step did not converge in " +
                             std::to_string(spec.backward_max_iters) + " iterations",
                         diff);
}

/// One classical RK4 step of the skew-gradient flow ż = −J∇H(z).
inline JointState step_continuous_ref(const BilinearGame& game, const JointState& s, double h) {
  const auto& a = game.payoff();
  // Velocity (ẋ, ẏ) = (−A∇g(y), Aᵀ∇f(x)).
  auto velocity = [&](const Vec& x, const Vec& y, Vec& vx, Vec& vy) {
    vx = multiply(a, game.map_q().dual_gradient(y));
    for (double& c : vx) c = -c;
    vy = multiply_transposed(a, game.map_p().dual_gradient(x));
  };
  Vec k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y;
  velocity(s.x, s.y, k1x, k1y);
  velocity(axpy(s.x, 0.5 * h, k1x), axpy(s.y, 0.5 * h, k1y), k2x, k2y);
  velocity(axpy(s.x, 0.5 * h, k2x), axpy(s.y, 0.5 * h, k2y), k3x, k3y);
  velocity(axpy(s.x, h, k3x), axpy(s.y, h, k3y), k4x, k4y);

  Vec x = s.x;
  Vec y = s.y;
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] += h * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]) / 6.0;
  for (std::size_t j = 0; j < y.size(); ++j)
    y[j] += h * (k1y[j] + 2.0 * k2y[j] + 2.0 * k3y[j] + k4y[j]) / 6.0;
  return state_from_dual(game, std::move(x), std::move(y));
}

inline JointState step(const BilinearGame& game, const JointState& s, const SchemeSpec& spec) {
  switch (spec.scheme) {
    case Scheme::Forward: return step_forward(game, s, spec.eta);
    case Scheme::Backward: return step_backward(game, s, spec);
    case Scheme::Alternating: return step_alternating(game, s, spec.eta);
    case Scheme::ContinuousRef: return step_continuous_ref(game, s, spec.eta);
  }
  return s;
}

using StepObserver = std::function<void(std::size_t, const JointState&)>;

/// Iterates the selected scheme for `steps` steps, recording z_0..z_K. The
/// observer, if any, sees every recorded state including the initial one.
/// Errors leave with the index of the failing step attached.
inline Trajectory run(const BilinearGame& game, const SchemeSpec& spec, const JointState& initial,
                      std::size_t steps, const StepObserver& observer = {}) {
  spec.validate();
  require_size(initial.x, game.rows(), "initial x");
  require_size(initial.y, game.cols(), "initial y");
  Trajectory traj;
  traj.spec = spec;
  traj.states.reserve(steps + 1);
  traj.states.push_back(initial);
  if (observer) observer(0, initial);
  for (std::size_t k = 1; k <= steps; ++k) {
    try {
      JointState next = step(game, traj.states.back(), spec);
      const double size = detail::joint_norm_inf(next.x, next.y);
      if (!(size <= kOverflowLimit)) {
        throw OverflowError("dual iterate magnitude exceeded 1e150");
      }
      traj.states.push_back(std::move(next));
    } catch (Error& e) {
      e.attach_step(k);
      throw;
    }
    if (observer) observer(k, traj.states.back());
  }
  return traj;
}

}  // namespace skewflow
