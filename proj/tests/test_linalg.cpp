#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "skewflow/linalg.hpp"

using namespace skewflow;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Cyclic Jacobi rotations on a symmetric matrix; returns all eigenvalues.
std::vector<double> jacobi_eigenvalues(Matrix s) {
  const std::size_t n = s.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += s(i, j) * s(i, j);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(s(p, q)) < 1e-300) continue;
        const double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1.0 / std::sqrt(t * t + 1);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double a = s(k, p), b = s(k, q);
          s(k, p) = c * a - sn * b;
          s(k, q) = sn * a + c * b;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double a = s(p, k), b = s(q, k);
          s(p, k) = c * a - sn * b;
          s(q, k) = sn * a + c * b;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = s(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace

TEST_CASE("matrix construction validates shape") {
  CHECK_THROWS_AS(Matrix::from_rows(std::vector<std::vector<double>>{}), DimensionError);
  CHECK_THROWS_AS(Matrix::from_rows({{1.0, 2.0}, {3.0}}), DimensionError);
  const Matrix m = Matrix::from_rows({{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}});
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(1, 2) == 6.0);
  CHECK(m.transposed()(2, 1) == 6.0);
  CHECK(m.max_abs() == 6.0);
}

TEST_CASE("products and norms") {
  const Matrix a = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
  const Vec v{1.0, -1.0};
  CHECK(multiply(a, v) == Vec{-1.0, -1.0});
  CHECK(multiply_transposed(a, v) == Vec{-2.0, -2.0});
  CHECK(bilinear(Vec{1.0, 0.0}, a, Vec{0.0, 1.0}) == 2.0);
  CHECK(norm_inf(Vec{-3.0, 2.0}) == 3.0);
  CHECK(norm1(Vec{-3.0, 2.0}) == 5.0);
  CHECK_THAT(norm2(Vec{3.0, 4.0}), WithinAbs(5.0, 1e-15));
  CHECK(axpy(Vec{1.0, 1.0}, 2.0, Vec{1.0, -1.0}) == Vec{3.0, -1.0});
  CHECK_THROWS_AS(dot(Vec{1.0}, Vec{1.0, 2.0}), DimensionError);
  CHECK_THROWS_AS(multiply(a, Vec{1.0}), DimensionError);
}

TEST_CASE("singular values of named payoffs") {
  SECTION("matching pennies: all-ones start is in the null space") {
    const auto sv = singular_value_bounds(Matrix::from_rows({{1.0, -1.0}, {-1.0, 1.0}}));
    CHECK_THAT(sv.alpha_max, WithinAbs(2.0, 1e-10));
    CHECK(sv.alpha_min == 0.0);
  }
  SECTION("identity") {
    const auto sv = singular_value_bounds(Matrix::identity(3));
    CHECK_THAT(sv.alpha_max, WithinAbs(1.0, 1e-10));
    CHECK_THAT(sv.alpha_min, WithinAbs(1.0, 1e-6));
  }
  SECTION("diag(2, 1)") {
    const auto sv = singular_value_bounds(Matrix::from_rows({{2.0, 0.0}, {0.0, 1.0}}));
    CHECK_THAT(sv.alpha_max, WithinAbs(2.0, 1e-10));
    CHECK_THAT(sv.alpha_min, WithinAbs(1.0, 1e-6));
  }
  SECTION("non-square reports alpha_min = 0") {
    const auto sv = singular_value_bounds(Matrix::from_rows({{1.0, 0.0, 0.0}, {0.0, 2.0, 0.0}}));
    CHECK_THAT(sv.alpha_max, WithinAbs(2.0, 1e-10));
    CHECK(sv.alpha_min == 0.0);
  }
  SECTION("zero matrix") {
    const auto sv = singular_value_bounds(Matrix(2, 2));
    CHECK(sv.alpha_max == 0.0);
    CHECK(sv.alpha_min == 0.0);
  }
}

TEST_CASE("singular values agree with a Jacobi eigen oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 4;
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) = u(rng);
    const auto ev = jacobi_eigenvalues(a.gram());
    const auto sv = singular_value_bounds(a);
    CHECK_THAT(sv.alpha_max, WithinRel(std::sqrt(ev.back()), 1e-6));
    if (ev.front() > 1e-6 * ev.back()) {
      CHECK_THAT(sv.alpha_min, WithinRel(std::sqrt(ev.front()), 1e-4));
    }
  }
}
