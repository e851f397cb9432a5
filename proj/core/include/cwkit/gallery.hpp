#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "cwkit/directions.hpp"
#include "cwkit/multi_index.hpp"
#include "cwkit/projections.hpp"

namespace cwkit {

struct Gaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Independent coordinates X_i = exp(mu_i + sigma_i Z_i).
struct ProductLognormal {
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;
};

/// Distribution with exact moment oracles.
class AnalyticDistribution {
 public:
  using Variant = std::variant<Gaussian, ProductLognormal, AtomicMeasure>;

  /// Covariance must be symmetric with smallest eigenvalue > 1e-10.
  [[nodiscard]] static AnalyticDistribution gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance);
  [[nodiscard]] static AnalyticDistribution standard_gaussian(std::size_t dim);
  [[nodiscard]] static AnalyticDistribution product_lognormal(Eigen::VectorXd mu, Eigen::VectorXd sigma);
  [[nodiscard]] static AnalyticDistribution atomic(AtomicMeasure measure);

  [[nodiscard]] std::size_t dim() const noexcept;
  [[nodiscard]] const Variant& law() const noexcept { return law_; }
  /// "gaussian", "lognormal" or "atomic".
  [[nodiscard]] std::string family() const;

 private:
  explicit AnalyticDistribution(Variant law) : law_(std::move(law)) {}
  Variant law_;
};

/// i.i.d. draws; row i uses random stream i of `seed`.
[[nodiscard]] SampleSet sample(const AnalyticDistribution& dist, std::size_t n, std::uint64_t seed,
                               std::string label = {});

inline constexpr int kGaussianOracleMaxOrder = 8;

/**
 * Exact E[X^alpha].
 *
 * Gaussian: sum over partial pairings of the coordinate multiset (Isserlis with a mean),
 * capped at |alpha| <= 8 (OrderExceeded above). Lognormal: prod_i exp(a_i mu_i + a_i^2 sigma_i^2 / 2).
 * Atomic: direct sum over atoms.
 */
[[nodiscard]] double mixed_moment_oracle(const AnalyticDistribution& dist, const MultiIndex& alpha);

/// Oracle values for every |alpha| <= max_order.
[[nodiscard]] MixedMoments mixed_moment_table(const AnalyticDistribution& dist, int max_order);

struct SwitchingPair {
  AtomicMeasure p;
  AtomicMeasure q;
  /// Directions along which project(p, u) == project(q, u) is certified.
  std::vector<Direction> certified_directions;
};

/**
 * Expands the signed measure prod_j (delta_0 - delta_{v_j}) over integer lattice vectors v_j.
 * The positive part (normalized) is P, the negative part is Q. Since each factor projects to zero
 * along any u orthogonal to v_j, P and Q have equal projections along every such u. For d = 2 the
 * certified directions are the rotations (-v_y, v_x)/|v|; for d >= 3 an orthonormal basis of each
 * orthogonal complement is returned.
 */
[[nodiscard]] SwitchingPair switching_pair(std::span<const std::vector<long long>> lattice_directions);

struct MgfPoint {
  double t;
  double value;
  /// False when the top 1% of terms carry more than half of the sum.
  bool stable;
};

/// Empirical E[exp(t <u, X>)] with a heavy-tail instability flag.
[[nodiscard]] std::vector<MgfPoint> empirical_mgf(const SampleSet& sample, const Direction& u,
                                                  std::span<const double> t_grid);

}  // namespace cwkit
