#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "skewflow/game.hpp"

using namespace skewflow;
using Catch::Matchers::WithinAbs;

namespace {

BilinearGame entropy_game(Matrix a) {
  const std::size_t r = a.rows(), c = a.cols();
  return make_game(std::move(a), MirrorMap::entropy(r), MirrorMap::entropy(c));
}

// max over q̃ and min over p̃ on a grid of the 2-simplex.
double grid_gap(const Matrix& a, const Vec& p, const Vec& q, int n) {
  double best_q = -1e300, best_p = 1e300;
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const Vec v{t, 1.0 - t};
    best_q = std::max(best_q, bilinear(p, a, v));
    best_p = std::min(best_p, bilinear(v, a, q));
  }
  return best_q - best_p;
}

}  // namespace

TEST_CASE("presets and dimension checks") {
  CHECK(preset_payoff("matching_pennies")(0, 1) == -1.0);
  CHECK(preset_payoff("identity2") == Matrix::identity(2));
  CHECK(preset_payoff("scalar1").rows() == 1);
  CHECK(preset_payoff("skewed2")(0, 0) == 2.0);
  CHECK_THROWS_AS(preset_payoff("nope"), InvalidArgument);
  CHECK_THROWS_AS(make_game(Matrix::identity(2), MirrorMap::entropy(3), MirrorMap::entropy(2)),
                  DimensionError);
  const BilinearGame g = entropy_game(preset_payoff("matching_pennies"));
  CHECK_THAT(g.alpha_max(), WithinAbs(2.0, 1e-10));
  CHECK(g.bounded());
}

TEST_CASE("duality gap") {
  const BilinearGame g = entropy_game(preset_payoff("matching_pennies"));
  CHECK_THAT(duality_gap(g, Vec{0.5, 0.5}, Vec{0.5, 0.5}), WithinAbs(0.0, 1e-15));
  // Pure strategies (1,0) vs (1,0): max_q row (1,-1) = 1, min_p column (1,-1) = -1.
  CHECK_THAT(duality_gap(g, Vec{1.0, 0.0}, Vec{1.0, 0.0}), WithinAbs(2.0, 1e-15));
  CHECK_THROWS_AS(duality_gap(g, Vec{1.0}, Vec{0.5, 0.5}), DimensionError);

  const BilinearGame quad =
      make_game(Matrix::identity(1), MirrorMap::euclidean(1), MirrorMap::euclidean(1));
  CHECK_THROWS_AS(duality_gap(quad, Vec{0.0}, Vec{0.0}), UnsupportedError);
}

TEST_CASE("duality gap matches a simplex grid oracle") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> s(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix a = Matrix::from_rows({{u(rng), u(rng)}, {u(rng), u(rng)}});
    const BilinearGame g = entropy_game(a);
    const double t = s(rng), r = s(rng);
    const Vec p{t, 1.0 - t}, q{r, 1.0 - r};
    REQUIRE_THAT(duality_gap(g, p, q), WithinAbs(grid_gap(a, p, q, 200), 1e-9));
    REQUIRE(duality_gap(g, p, q) >= -1e-15);
  }
}

TEST_CASE("logcosh duality gap uses the interval endpoints") {
  const BilinearGame g =
      make_game(Matrix::identity(1), MirrorMap::logcosh(), MirrorMap::logcosh());
  // max_q p q − min_p p q = |p| + |q|
  CHECK_THAT(duality_gap(g, Vec{0.3}, Vec{-0.2}), WithinAbs(0.5, 1e-15));
}

TEST_CASE("lifting keeps primal and dual coordinates in sync") {
  const BilinearGame g = entropy_game(preset_payoff("skewed2"));
  const JointState s = lift_state(g, Vec{0.3, 0.7}, Vec{0.6, 0.4});
  CHECK_THAT(s.x[0], WithinAbs(std::log(0.3), 1e-15));
  CHECK_THAT(s.p[0], WithinAbs(0.3, 1e-15));
  CHECK_THAT(s.q[1], WithinAbs(0.4, 1e-15));
  const JointState d = state_from_dual(g, Vec{0.0, 0.0}, Vec{1.0, 0.0});
  CHECK(d.p == Vec{0.5, 0.5});
  CHECK_THAT(d.q[0], WithinAbs(std::exp(1.0) / (std::exp(1.0) + 1.0), 1e-15));
  CHECK_THROWS_AS(lift_state(g, Vec{0.0, 1.0}, Vec{0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(state_from_dual(g, Vec{0.0}, Vec{0.0, 0.0}), DimensionError);
  CHECK_THAT(payoff_value(g, Vec{1.0, 0.0}, Vec{1.0, 0.0}), WithinAbs(2.0, 1e-15));
}
