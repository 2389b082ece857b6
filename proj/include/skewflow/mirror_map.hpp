#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skewflow/errors.hpp"
#include "skewflow/linalg.hpp"

namespace skewflow {

enum class MapKind { EuclideanQuadratic, NegativeEntropySimplex, LogCosh1D, Cubic1D };

inline std::string_view map_key(MapKind kind) {
  switch (kind) {
    case MapKind::EuclideanQuadratic: return "euclidean";
    case MapKind::NegativeEntropySimplex: return "entropy";
    case MapKind::LogCosh1D: return "logcosh";
    case MapKind::Cubic1D: return "cubic";
  }
  return "unknown";
}

/// Smallest simplex coordinate fed to a logarithm.
inline constexpr double kSimplexFloor = 1e-300;

namespace detail {
inline std::atomic<std::size_t>& clamp_counter() {
  static std::atomic<std::size_t> counter{0};
  return counter;
}
}  // namespace detail

/// Number of times a simplex coordinate was raised to kSimplexFloor before a
/// logarithm, process-wide.
inline std::size_t clamp_events() { return detail::clamp_counter().load(); }

/// A Legendre regularizer φ on the primal domain together with its convex
/// conjugate f = φ* on the dual space ℝ^m.
///
/// Geometry enters the dynamics only through this type: ∇f maps dual
/// coordinates to strategies and ∇φ maps back. The four kinds are
///
///   euclidean  φ(p) = ½‖p‖²            on ℝ^m          f(x) = ½‖x‖²
///   entropy    φ(p) = Σ p_i log p_i    on the simplex   f(x) = log Σ e^{x_i}
///   logcosh    φ(p) = ½(1+p)log(1+p) + ½(1−p)log(1−p)  on (−1,1),  f(x) = log cosh x
///   cubic      f(x) = ⅓|x|³ given directly on the dual side; φ is not provided.
///
/// For entropy, ∇φ(p) = log p is the fixed representative of a gradient that
/// is only defined up to multiples of the all-ones vector. Dual iterates are
/// never re-gauged.
///
/// Immutable once constructed.
class MirrorMap {
 public:
  static MirrorMap euclidean(std::size_t dim) { return MirrorMap(MapKind::EuclideanQuadratic, dim); }
  static MirrorMap entropy(std::size_t dim) {
    if (dim < 2) throw InvalidArgument("entropy mirror map needs dimension >= 2");
    return MirrorMap(MapKind::NegativeEntropySimplex, dim);
  }
  static MirrorMap logcosh() { return MirrorMap(MapKind::LogCosh1D, 1); }
  static MirrorMap cubic() { return MirrorMap(MapKind::Cubic1D, 1); }

  /// Builds a map from its config key ("euclidean", "entropy", "logcosh", "cubic").
  static MirrorMap from_key(std::string_view key, std::size_t dim) {
    if (key == "euclidean") return euclidean(dim);
    if (key == "entropy") return entropy(dim);
    if (key == "logcosh" || key == "cubic") {
      if (dim != 1) {
        throw DimensionError(std::string(key) + " mirror map is one-dimensional, got dimension " +
                             std::to_string(dim));
      }
      return key == "logcosh" ? logcosh() : cubic();
    }
    throw InvalidArgument("unknown mirror map '" + std::string(key) + "'");
  }

  MapKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  std::string_view key() const noexcept { return map_key(kind_); }

  /// Whether the closure of the primal domain is compact.
  bool bounded() const noexcept {
    return kind_ == MapKind::NegativeEntropySimplex || kind_ == MapKind::LogCosh1D;
  }

  std::optional<double> domain_bound() const noexcept { return domain_bound_; }

  MirrorMap with_domain_bound(double bound) const {
    if (!bounded()) throw UnsupportedError(std::string(key()) + " has an unbounded domain");
    if (!(bound >= 0.0)) throw InvalidArgument("domain bound must be nonnegative");
    MirrorMap m = *this;
    m.domain_bound_ = bound;
    return m;
  }

  double primal_value(ConstSpan p) const {
    require_size(p, dim_, "primal_value");
    switch (kind_) {
      case MapKind::EuclideanQuadratic: return 0.5 * dot(p, p);
      case MapKind::NegativeEntropySimplex: {
        check_simplex(p);
        double s = 0.0;
        for (double v : p) s += v * safe_log(v);
        return s;
      }
      case MapKind::LogCosh1D: {
        check_open_interval(p[0]);
        return 0.5 * (1.0 + p[0]) * std::log1p(p[0]) + 0.5 * (1.0 - p[0]) * std::log1p(-p[0]);
      }
      case MapKind::Cubic1D:
        throw UnsupportedError("cubic mirror map is defined on the dual side only");
    }
    return 0.0;
  }

  double dual_value(ConstSpan x) const {
    require_size(x, dim_, "dual_value");
    switch (kind_) {
      case MapKind::EuclideanQuadratic: return 0.5 * dot(x, x);
      case MapKind::NegativeEntropySimplex: {
        const double m = *std::max_element(x.begin(), x.end());
        double s = 0.0;
        for (double v : x) s += std::exp(v - m);
        return m + std::log(s);
      }
      case MapKind::LogCosh1D: {
        // log cosh x = |x| + log1p(e^{-2|x|}) − log 2, stable for large |x|.
        const double a = std::abs(x[0]);
        return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
      }
      case MapKind::Cubic1D: {
        const double a = std::abs(x[0]);
        return a * a * a / 3.0;
      }
    }
    return 0.0;
  }

  /// ∇f(x): dual coordinates to a primal point.
  Vec dual_gradient(ConstSpan x) const {
    require_size(x, dim_, "dual_gradient");
    switch (kind_) {
      case MapKind::EuclideanQuadratic: return Vec(x.begin(), x.end());
      case MapKind::NegativeEntropySimplex: {
        const double m = *std::max_element(x.begin(), x.end());
        Vec p(x.size());
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (p[i] = std::exp(x[i] - m));
        for (double& v : p) v /= s;
        return p;
      }
      case MapKind::LogCosh1D: return {std::tanh(x[0])};
      case MapKind::Cubic1D: return {std::copysign(x[0] * x[0], x[0])};
    }
    return {};
  }

  /// ∇φ(p): primal point to dual coordinates.
  Vec primal_gradient(ConstSpan p) const {
    require_size(p, dim_, "primal_gradient");
    switch (kind_) {
      case MapKind::EuclideanQuadratic: return Vec(p.begin(), p.end());
      case MapKind::NegativeEntropySimplex: {
        check_simplex(p);
        Vec x(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) x[i] = safe_log(p[i]);
        return x;
      }
      case MapKind::LogCosh1D:
        check_open_interval(p[0]);
        return {std::atanh(p[0])};
      case MapKind::Cubic1D: return {std::copysign(std::sqrt(std::abs(p[0])), p[0])};
    }
    return {};
  }

  /// D_φ(p, p_ref) = φ(p) − φ(p_ref) − ⟨∇φ(p_ref), p − p_ref⟩.
  double bregman_primal(ConstSpan p, ConstSpan p_ref) const {
    require_size(p, dim_, "bregman_primal");
    require_size(p_ref, dim_, "bregman_primal");
    switch (kind_) {
      case MapKind::EuclideanQuadratic: {
        double s = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) s += (p[i] - p_ref[i]) * (p[i] - p_ref[i]);
        return 0.5 * s;
      }
      case MapKind::NegativeEntropySimplex: {
        check_simplex(p);
        check_simplex(p_ref);
        double s = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) s += p[i] * (safe_log(p[i]) - safe_log(p_ref[i]));
        return s;
      }
      case MapKind::LogCosh1D: {
        const double grad = primal_gradient(p_ref)[0];
        return primal_value(p) - primal_value(p_ref) - grad * (p[0] - p_ref[0]);
      }
      case MapKind::Cubic1D:
        throw UnsupportedError("cubic mirror map is defined on the dual side only");
    }
    return 0.0;
  }

  /// D_f(x, x_ref) for the conjugate f = φ*.
  double bregman_dual(ConstSpan x, ConstSpan x_ref) const {
    require_size(x, dim_, "bregman_dual");
    require_size(x_ref, dim_, "bregman_dual");
    if (kind_ == MapKind::EuclideanQuadratic) {
      double s = 0.0;
      for (std::size_t i = 0; i < dim_; ++i) s += (x[i] - x_ref[i]) * (x[i] - x_ref[i]);
      return 0.5 * s;
    }
    const Vec g = dual_gradient(x_ref);
    double lin = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) lin += g[i] * (x[i] - x_ref[i]);
    return dual_value(x) - dual_value(x_ref) - lin;
  }

  /// Extreme points of the closed primal domain (bounded kinds only).
  std::vector<Vec> vertices() const {
    if (!bounded()) throw UnsupportedError(std::string(key()) + " has an unbounded domain");
    std::vector<Vec> out;
    if (kind_ == MapKind::LogCosh1D) return {Vec{-1.0}, Vec{1.0}};
    for (std::size_t i = 0; i < dim_; ++i) {
      Vec e(dim_, 0.0);
      e[i] = 1.0;
      out.push_back(std::move(e));
    }
    return out;
  }

  /// D_φ(v, p_ref) for the i-th vertex v, taken as the limit from the interior.
  double vertex_divergence(std::size_t vertex, ConstSpan p_ref) const {
    require_size(p_ref, dim_, "vertex_divergence");
    if (kind_ == MapKind::NegativeEntropySimplex) {
      check_simplex(p_ref);
      if (vertex >= dim_) throw InvalidArgument("vertex index out of range");
      return -safe_log(p_ref[vertex]);
    }
    if (kind_ == MapKind::LogCosh1D) {
      if (vertex > 1) throw InvalidArgument("vertex index out of range");
      const double v = vertex == 0 ? -1.0 : 1.0;
      return std::log(2.0) - primal_value(p_ref) - primal_gradient(p_ref)[0] * (v - p_ref[0]);
    }
    throw UnsupportedError(std::string(key()) + " has an unbounded domain");
  }

  /// sup over the domain of D_φ(·, p_ref); the supremum of a convex function
  /// over a polytope sits at a vertex.
  double divergence_radius(ConstSpan p_ref) const {
    double m = 0.0;
    for (std::size_t i = 0; i < vertices().size(); ++i) m = std::max(m, vertex_divergence(i, p_ref));
    return m;
  }

 private:
  MirrorMap(MapKind kind, std::size_t dim) : kind_(kind), dim_(dim) {
    if (dim == 0) throw InvalidArgument("mirror map dimension must be positive");
  }

  static double safe_log(double v) {
    if (v < kSimplexFloor) {
      detail::clamp_counter().fetch_add(1);
      v = kSimplexFloor;
    }
    return std::log(v);
  }

  static void check_simplex(ConstSpan p) {
    double s = 0.0;
    for (double v : p) {
      if (!(v > 0.0)) throw DomainError("simplex point has a nonpositive component");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) {
      throw DomainError("simplex point sums to " + std::to_string(s) + ", not 1");
    }
  }

  static void check_open_interval(double p) {
    if (!(std::abs(p) < 1.0)) throw DomainError("logcosh primal point must lie in (-1, 1)");
  }

  MapKind kind_;
  std::size_t dim_;
  std::optional<double> domain_bound_;
};

}  // namespace skewflow
