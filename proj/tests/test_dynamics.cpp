#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "skewflow/diagnostics.hpp"
#include "skewflow/dynamics.hpp"

using namespace skewflow;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

BilinearGame scalar_game(MirrorMap a, MirrorMap b, double payoff = 1.0) {
  return make_game(Matrix::from_rows({{payoff}}), std::move(a), std::move(b));
}

BilinearGame quad_game() { return scalar_game(MirrorMap::euclidean(1), MirrorMap::euclidean(1)); }

BilinearGame entropy_game(Matrix a) {
  const std::size_t r = a.rows(), c = a.cols();
  return make_game(std::move(a), MirrorMap::entropy(r), MirrorMap::entropy(c));
}

JointState start(const BilinearGame& g, double x, double y) {
  return state_from_dual(g, Vec{x}, Vec{y});
}

SchemeSpec spec_of(Scheme s, double eta) {
  SchemeSpec spec;
  spec.scheme = s;
  spec.eta = eta;
  return spec;
}

}  // namespace

TEST_CASE("scheme names round-trip") {
  for (Scheme s : {Scheme::Forward, Scheme::Backward, Scheme::Alternating, Scheme::ContinuousRef})
    CHECK(parse_scheme(scheme_name(s)) == s);
  CHECK(parse_scheme("continuous_ref") == Scheme::ContinuousRef);
  CHECK_THROWS_AS(parse_scheme("leapfrog"), InvalidArgument);
}

TEST_CASE("alternating step by hand") {
  const BilinearGame g = quad_game();
  const JointState s = step_alternating(g, start(g, 3.0, 3.0), 0.1);
  CHECK_THAT(s.x[0], WithinAbs(2.7, 1e-15));
  CHECK_THAT(s.y[0], WithinAbs(3.27, 1e-15));
  CHECK(s.p == s.x);

  const BilinearGame id = entropy_game(Matrix::identity(2));
  const JointState u = lift_state(id, Vec{0.5, 0.5}, Vec{0.5, 0.5});
  for (double eta : {0.1, 1.0, 7.0}) {
    const JointState n = step_alternating(id, u, eta);
    CHECK_THAT(n.p[0], WithinAbs(0.5, 1e-15));
    CHECK_THAT(n.q[1], WithinAbs(0.5, 1e-15));
  }

  const BilinearGame e = entropy_game(Matrix::from_rows({{1.0, 0.0}, {0.0, 0.0}}));
  const JointState n = step_alternating(e, lift_state(e, Vec{0.5, 0.5}, Vec{0.5, 0.5}), 1.0);
  const double a = std::exp(-0.5);
  CHECK_THAT(n.p[0], WithinAbs(a / (a + 1.0), 1e-15));
  CHECK_THAT(n.p[1], WithinAbs(0.622459, 1e-6));
}

TEST_CASE("alternating is the x half-step then the y half-step") {
  const BilinearGame g = entropy_game(Matrix::from_rows({{2.0, -1.0}, {0.5, 1.0}}));
  JointState s = lift_state(g, Vec{0.3, 0.7}, Vec{0.8, 0.2});
  for (int k = 0; k < 50; ++k) {
    const double eta = 0.3;
    const JointState alt = step_alternating(g, s, eta);
    // x moves with the old q; y moves with the new p.
    const Vec x = axpy(s.x, -eta, multiply(g.payoff(), s.q));
    const Vec p = g.map_p().dual_gradient(x);
    const Vec y = axpy(s.y, eta, multiply_transposed(g.payoff(), p));
    REQUIRE(alt.x == x);
    REQUIRE(alt.y == y);
    s = alt;
  }
}

TEST_CASE("forward step by hand") {
  const BilinearGame g = quad_game();
  const JointState s = step_forward(g, start(g, 3.0, 3.0), 0.1);
  CHECK_THAT(s.x[0], WithinAbs(2.7, 1e-15));
  CHECK_THAT(s.y[0], WithinAbs(3.3, 1e-15));
  CHECK_THAT(energy(g, s), WithinAbs(9.09, 1e-12));
  const JointState z = step_forward(g, start(g, 3.0, 3.0), 0.0);
  CHECK(z.x[0] == 3.0);
  CHECK(z.y[0] == 3.0);
}

TEST_CASE("forward energy after ten steps is 9 * 1.01^10") {
  const BilinearGame g = quad_game();
  const Trajectory t = run(g, spec_of(Scheme::Forward, 0.1), start(g, 3.0, 3.0), 10);
  CHECK_THAT(energy(g, t.states.back()), WithinRel(9.0 * std::pow(1.01, 10), 1e-13));
}

TEST_CASE("backward step") {
  const BilinearGame g = quad_game();
  SchemeSpec spec = spec_of(Scheme::Backward, 0.1);
  const JointState b = step_backward(g, start(g, 3.0, 3.0), spec);
  // 2x2 linear solve: x' + η y' = 3, y' − η x' = 3.
  const double det = 1.0 + 0.01;
  CHECK_THAT(b.x[0], WithinAbs((3.0 - 0.1 * 3.0) / det, 1e-11));
  CHECK_THAT(b.y[0], WithinAbs((3.0 + 0.1 * 3.0) / det, 1e-11));
  CHECK_THAT(energy(g, b), WithinAbs(9.0 / 1.01, 1e-10));

  spec.eta = 0.0;
  const JointState z = step_backward(g, start(g, 3.0, 3.0), spec);
  CHECK(z.x[0] == 3.0);

  const BilinearGame mp = entropy_game(preset_payoff("matching_pennies"));
  const JointState u = lift_state(mp, Vec{0.5, 0.5}, Vec{0.5, 0.5});
  const JointState n = step_backward(mp, u, spec_of(Scheme::Backward, 0.1));
  CHECK(backward_residual(mp, u, n, 0.1) <= 1e-11);
  CHECK(energy(mp, n) <= energy(mp, u) + 1e-12);

  const JointState off = lift_state(mp, Vec{0.9, 0.1}, Vec{0.3, 0.7});
  const JointState m = step_backward(mp, off, spec_of(Scheme::Backward, 0.1));
  CHECK(backward_residual(mp, off, m, 0.1) <= 1e-11);
  CHECK(energy(mp, m) <= energy(mp, off) + 1e-12);
}

TEST_CASE("backward step reports non-convergence") {
  const BilinearGame g = quad_game();
  SchemeSpec spec = spec_of(Scheme::Backward, 2.0);  // Picard diverges for η·α > 1
  try {
    (void)step_backward(g, start(g, 3.0, 3.0), spec);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.residual() > 0.0);
  }
  spec.eta = 0.1;
  spec.backward_max_iters = 1;
  CHECK_THROWS_AS(step_backward(g, start(g, 3.0, 3.0), spec), ConvergenceError);
}

TEST_CASE("backward is the adjoint of forward") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  const BilinearGame g =
      make_game(Matrix::from_rows({{1.0, 0.5}, {-0.3, 2.0}}), MirrorMap::euclidean(2),
                MirrorMap::euclidean(2));
  for (int i = 0; i < 100; ++i) {
    const JointState z = state_from_dual(g, Vec{u(rng), u(rng)}, Vec{u(rng), u(rng)});
    const double eta = 0.2;
    const JointState back = step_backward(g, step_forward(g, z, -eta), spec_of(Scheme::Backward, eta));
    for (std::size_t j = 0; j < 2; ++j) {
      REQUIRE_THAT(back.x[j], WithinAbs(z.x[j], 1e-9));
      REQUIRE_THAT(back.y[j], WithinAbs(z.y[j], 1e-9));
    }
  }
}

TEST_CASE("forward and backward monotonicity over 1000 steps") {
  const BilinearGame q = quad_game();
  const BilinearGame e = entropy_game(preset_payoff("skewed2"));
  const std::vector<std::pair<const BilinearGame*, JointState>> cases{
      {&q, start(q, 3.0, 3.0)}, {&e, lift_state(e, Vec{0.2, 0.8}, Vec{0.7, 0.3})}};
  for (const auto& [g, z0] : cases) {
    const Trajectory f = run(*g, spec_of(Scheme::Forward, 0.01), z0, 1000);
    const Trajectory b = run(*g, spec_of(Scheme::Backward, 0.1), z0, 1000);
    for (std::size_t k = 0; k < 1000; ++k) {
      REQUIRE(energy(*g, f.states[k + 1]) >= energy(*g, f.states[k]) - 1e-12);
      REQUIRE(energy(*g, b.states[k + 1]) <= energy(*g, b.states[k]) + 1e-12);
    }
  }
}

TEST_CASE("quadratic growth and decay factors are exact") {
  for (double a : {1.0, 2.0}) {
    const BilinearGame g = scalar_game(MirrorMap::euclidean(1), MirrorMap::euclidean(1), a);
    const double eta = 0.05;
    const double factor = 1.0 + eta * eta * a * a;
    const Trajectory f = run(g, spec_of(Scheme::Forward, eta), start(g, 3.0, -1.0), 200);
    const Trajectory b = run(g, spec_of(Scheme::Backward, eta), start(g, 3.0, -1.0), 200);
    for (std::size_t k = 0; k < 200; ++k) {
      REQUIRE_THAT(energy(g, f.states[k + 1]) / energy(g, f.states[k]), WithinAbs(factor, 1e-12));
      REQUIRE_THAT(energy(g, b.states[k]) / energy(g, b.states[k + 1]), WithinAbs(factor, 1e-12));
    }
  }
}

TEST_CASE("continuous reference") {
  SECTION("one period of the rotation") {
    const BilinearGame g = quad_game();
    const std::size_t n = 6283;
    const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
    const Trajectory t = run(g, spec_of(Scheme::ContinuousRef, h), start(g, 3.0, 3.0), n);
    const JointState& z = t.states.back();
    CHECK(std::hypot(z.x[0] - 3.0, z.y[0] - 3.0) <= 1e-8);
  }
  SECTION("logcosh energy drift over 1e4 steps") {
    const BilinearGame g = scalar_game(MirrorMap::logcosh(), MirrorMap::logcosh());
    const Trajectory t = run(g, spec_of(Scheme::ContinuousRef, 1e-3), start(g, 3.0, 3.0), 10000);
    const double h0 = energy(g, t.states.front());
    for (const JointState& s : t.states) REQUIRE_THAT(energy(g, s), WithinAbs(h0, 1e-10));
  }
  SECTION("h = 0 leaves the state unchanged") {
    const BilinearGame g = quad_game();
    const JointState s = step_continuous_ref(g, start(g, 3.0, 3.0), 0.0);
    CHECK(s.x[0] == 3.0);
    CHECK(s.y[0] == 3.0);
  }
  SECTION("energy conserved to 1e-9 over t = 100 for every kind") {
    const std::vector<BilinearGame> games{
        quad_game(), entropy_game(preset_payoff("skewed2")),
        scalar_game(MirrorMap::logcosh(), MirrorMap::logcosh()),
        scalar_game(MirrorMap::cubic(), MirrorMap::cubic()),
        scalar_game(MirrorMap::euclidean(1), MirrorMap::logcosh())};
    for (const BilinearGame& g : games) {
      const JointState z0 = g.map_p().kind() == MapKind::NegativeEntropySimplex
                                ? lift_state(g, Vec{0.2, 0.8}, Vec{0.7, 0.3})
                                : start(g, 1.0, 1.0);
      double drift = 0.0;
      const double h0 = energy(g, z0);
      (void)run(g, spec_of(Scheme::ContinuousRef, 1e-3), z0, 100000,
                [&](std::size_t, const JointState& s) {
                  drift = std::max(drift, std::abs(energy(g, s) - h0));
                });
      INFO(g.map_p().key() << " x " << g.map_q().key());
      CHECK(drift <= 1e-9);
    }
  }
}

TEST_CASE("run bookkeeping") {
  const BilinearGame g = quad_game();
  const Trajectory t0 = run(g, spec_of(Scheme::Alternating, 0.1), start(g, 3.0, 3.0), 0);
  CHECK(t0.states.size() == 1);
  CHECK(t0.steps() == 0);

  std::size_t seen = 0;
  const Trajectory t = run(g, spec_of(Scheme::Alternating, 0.1), start(g, 3.0, 3.0), 300,
                           [&](std::size_t k, const JointState&) { CHECK(k == seen++); });
  CHECK(seen == 301);
  CHECK(t.states.size() == 301);

  const Trajectory again = run(g, spec_of(Scheme::Alternating, 0.1), start(g, 3.0, 3.0), 300);
  for (std::size_t k = 0; k <= 300; ++k) REQUIRE(again.states[k].x == t.states[k].x);

  CHECK_THROWS_AS(run(g, spec_of(Scheme::Alternating, 0.0), start(g, 3.0, 3.0), 1), InvalidArgument);
  CHECK_THROWS_AS(run(g, spec_of(Scheme::Alternating, -1.0), start(g, 3.0, 3.0), 1), InvalidArgument);
}

TEST_CASE("overflow aborts with the step index") {
  const BilinearGame g = quad_game();
  try {
    (void)run(g, spec_of(Scheme::Forward, 10.0), start(g, 3.0, 3.0), 100000);
    FAIL("expected OverflowError");
  } catch (const OverflowError& e) {
    REQUIRE(e.step().has_value());
    CHECK(*e.step() > 1);
    CHECK(std::string(e.what()).find("step ") == 0);
  }
}

TEST_CASE("primal and dual coordinates stay in sync") {
  const BilinearGame g = entropy_game(preset_payoff("skewed2"));
  for (Scheme s : {Scheme::Forward, Scheme::Backward, Scheme::Alternating, Scheme::ContinuousRef}) {
    const Trajectory t = run(g, spec_of(s, 0.1), lift_state(g, Vec{0.3, 0.7}, Vec{0.6, 0.4}), 200);
    for (const JointState& z : t.states) {
      const Vec p = g.map_p().dual_gradient(z.x);
      const Vec q = g.map_q().dual_gradient(z.y);
      for (std::size_t i = 0; i < 2; ++i) {
        REQUIRE_THAT(z.p[i], WithinAbs(p[i], 1e-10));
        REQUIRE_THAT(z.q[i], WithinAbs(q[i], 1e-10));
      }
    }
  }
}
