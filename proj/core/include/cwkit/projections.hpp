#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cwkit/directions.hpp"

namespace cwkit {

/// Empirical point cloud: n x d matrix of finite reals, each row weighted 1/n.
class SampleSet {
 public:
  explicit SampleSet(Eigen::MatrixXd points, std::string label = {});

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }
  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(points_.cols()); }
  [[nodiscard]] const Eigen::MatrixXd& points() const noexcept { return points_; }
  [[nodiscard]] const std::string& label() const noexcept { return label_; }

 private:
  Eigen::MatrixXd points_;
  std::string label_;
};

/// Finitely supported probability measure with pairwise distinct atoms.
class AtomicMeasure {
 public:
  AtomicMeasure(std::vector<Eigen::VectorXd> points, std::vector<double> weights);

  [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(points_.front().size()); }
  [[nodiscard]] const std::vector<Eigen::VectorXd>& points() const noexcept { return points_; }
  [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }

  /// Exact atomic copy of the empirical measure of a sample (duplicate rows merged).
  [[nodiscard]] static AtomicMeasure from_samples(const SampleSet& samples);

 private:
  std::vector<Eigen::VectorXd> points_;
  std::vector<double> weights_;
};

/// Values closer than this are one atom of a projected law, within and across laws.
inline constexpr double kMergeTolerance = 1e-12;
inline constexpr double kMassTolerance = 1e-12;

struct Atom1D {
  double value;
  double weight;
};

/// One-dimensional atomic law: strictly increasing values, positive weights summing to 1.
class Projected1D {
 public:
  /// Validates the invariants; does not sort or merge.
  explicit Projected1D(std::vector<Atom1D> atoms);

  /// Sorts weighted values and coalesces runs within kMergeTolerance of the run's first value.
  [[nodiscard]] static Projected1D from_weighted(std::vector<Atom1D> values);

  [[nodiscard]] const std::vector<Atom1D>& atoms() const noexcept { return atoms_; }
  [[nodiscard]] std::size_t size() const noexcept { return atoms_.size(); }
  [[nodiscard]] double total_mass() const noexcept;
  /// Right-continuous CDF.
  [[nodiscard]] double cdf(double x) const noexcept;

 private:
  std::vector<Atom1D> atoms_;
};

/// Push-forward of a measure under x -> <u, x>.
[[nodiscard]] Projected1D project(const SampleSet& source, const Direction& u);
[[nodiscard]] Projected1D project(const AtomicMeasure& source, const Direction& u);

/// sup_x |F_a(x) - F_b(x)| evaluated exactly over the merged atom grid.
[[nodiscard]] double ks_distance(const Projected1D& a, const Projected1D& b);

/// Integral of |F_a - F_b| over the merged grid (W1 between atomic laws).
[[nodiscard]] double wasserstein1(const Projected1D& a, const Projected1D& b);

enum class Metric { KS, W1 };

[[nodiscard]] std::string_view to_string(Metric metric) noexcept;
[[nodiscard]] double distance(const Projected1D& a, const Projected1D& b, Metric metric);

struct TraceEntry {
  std::size_t index;
  std::size_t sample_size;
  double distance;
};

/// Distances of a projected sequence to a projected target along one direction.
struct DistanceTrace {
  Direction direction;
  Metric metric;
  std::vector<TraceEntry> entries;
};

[[nodiscard]] DistanceTrace distance_trace(std::span<const SampleSet> sequence,
                                           const Projected1D& projected_target, const Direction& u,
                                           Metric metric);
[[nodiscard]] DistanceTrace distance_trace(std::span<const SampleSet> sequence, const SampleSet& target,
                                           const Direction& u, Metric metric);
[[nodiscard]] DistanceTrace distance_trace(std::span<const SampleSet> sequence,
                                           const AtomicMeasure& target, const Direction& u, Metric metric);

/// Neumaier-compensated sum.
[[nodiscard]] double compensated_sum(std::span<const double> values) noexcept;

}  // namespace cwkit
