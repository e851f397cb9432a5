#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace cwkit {

/// Unit vector on S^{d-1}, d >= 2. Norm is 1 within 1e-12.
class Direction {
 public:
  /// Validates unit norm; use `normalized` to build from an arbitrary vector.
  explicit Direction(std::vector<double> coords);

  /// Scales `v` to unit length. Throws InvalidArgument for a zero or non-finite vector.
  [[nodiscard]] static Direction normalized(std::span<const double> v);
  [[nodiscard]] static Direction normalized(const Eigen::VectorXd& v);
  /// Standard basis vector e_i in R^d.
  [[nodiscard]] static Direction axis(std::size_t dim, std::size_t i);

  [[nodiscard]] std::size_t dim() const noexcept { return coords_.size(); }
  [[nodiscard]] std::span<const double> coords() const noexcept { return coords_; }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return coords_[i]; }
  [[nodiscard]] Eigen::Map<const Eigen::VectorXd> vector() const noexcept {
    return {coords_.data(), static_cast<Eigen::Index>(coords_.size())};
  }

  /// <u, x>; x must have dim() entries.
  [[nodiscard]] double dot(std::span<const double> x) const noexcept;
  template <typename Derived>
  [[nodiscard]] double dot(const Eigen::MatrixBase<Derived>& x) const {
    return vector().dot(x);
  }

  friend bool operator==(const Direction&, const Direction&) = default;

 private:
  std::vector<double> coords_;
};

inline constexpr double kUnitNormTolerance = 1e-12;

struct FullSphere {
  std::size_t dim;
};

/// {u : angle(u, axis) <= half_angle}, half_angle in (0, pi].
struct Cap {
  Direction axis;
  double half_angle;
};

struct UnionOfCaps {
  std::vector<Cap> caps;
};

/// Finitely many directions: surface measure zero. Only meaningful for counterexamples.
struct FiniteSet {
  std::vector<Direction> points;
};

/// A Borel subset A of the sphere, restricted to the shapes the toolkit can sample.
class Region {
 public:
  using Variant = std::variant<FullSphere, Cap, UnionOfCaps, FiniteSet>;

  [[nodiscard]] static Region full_sphere(std::size_t dim);
  [[nodiscard]] static Region cap(Direction axis, double half_angle);
  [[nodiscard]] static Region union_of_caps(std::vector<Cap> caps);
  [[nodiscard]] static Region finite_set(std::vector<Direction> points);

  [[nodiscard]] std::size_t dim() const noexcept;
  [[nodiscard]] bool contains(const Direction& u) const;
  [[nodiscard]] bool has_positive_measure() const noexcept;
  [[nodiscard]] const Variant& shape() const noexcept { return shape_; }
  /// Compact textual form, e.g. "cap:1,0,0:1.0471975511965976".
  [[nodiscard]] std::string describe() const;

 private:
  explicit Region(Variant shape) : shape_(std::move(shape)) {}
  Variant shape_;
};

/**
 * d linearly independent directions u_1..u_d and the map T(x) = (<u_1,x>, ..., <u_d,x>).
 * Row j of `matrix()` is u_j exactly.
 */
class Frame {
 public:
  /// Throws InsufficientRank when the rows are numerically singular.
  explicit Frame(std::vector<Direction> directions);

  [[nodiscard]] std::size_t dim() const noexcept { return directions_.size(); }
  [[nodiscard]] const std::vector<Direction>& directions() const noexcept { return directions_; }
  [[nodiscard]] const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  [[nodiscard]] double min_singular_value() const noexcept { return min_singular_value_; }

 private:
  std::vector<Direction> directions_;
  Eigen::MatrixXd matrix_;
  double min_singular_value_ = 0.0;
};

/// Uniform directions on S^{d-1} (normalized standard-normal vectors). Direction i uses stream i.
[[nodiscard]] std::vector<Direction> sample_uniform(std::size_t dim, std::size_t count, std::uint64_t seed);

/**
 * Rejection sampling against the region predicate. Draw j is the j-th uniform direction of
 * `sample_uniform` for the same seed, so a full-sphere cap reproduces `sample_uniform`.
 * Throws BudgetExhausted when fewer than `count` draws out of `max_draw_budget` are accepted,
 * and InvalidArgument for a FiniteSet region.
 */
[[nodiscard]] std::vector<Direction> sample_in_region(const Region& region, std::size_t count,
                                                      std::uint64_t seed,
                                                      std::size_t max_draw_budget = 1'000'000);

/// Monte-Carlo fraction of n uniform draws inside `region`. FullSphere returns exactly 1.
[[nodiscard]] double region_measure_estimate(const Region& region, std::size_t n, std::uint64_t seed);

inline constexpr double kDefaultFrameTau = 1e-6;

/// Greedy first-fit frame: accept a candidate while the accepted rows keep min singular value >= tau.
[[nodiscard]] Frame extract_frame(std::span<const Direction> candidates, double tau = kDefaultFrameTau);

/// C = ||T^{-1}||_2 = 1 / sigma_min(T); guarantees ||x||_2 <= C * sum_j |<u_j, x>|.
[[nodiscard]] double frame_constant(const Frame& frame) noexcept;

/// Smallest singular value of a k x d matrix (k <= d uses the k nonzero ones).
[[nodiscard]] double smallest_singular_value(const Eigen::MatrixXd& m);

}  // namespace cwkit
