#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cwkit/directions.hpp"
#include "cwkit/gallery.hpp"
#include "cwkit/multi_index.hpp"
#include "cwkit/projections.hpp"

namespace cwkit {

enum class MomentKind { Raw, Absolute };

/**
 * One-dimensional moments m_0..m_K, m_0 = 1.
 *
 * Entries are kept both as values and as log-magnitudes: analytic sources such as the
 * lognormal have even moments (e^{2m^2}) far outside double range, and the Carleman
 * diagnostic only needs log m_{2m}. `value(k)` may therefore be +inf while `log_abs(k)`
 * stays finite.
 */
class MomentSequence {
 public:
  [[nodiscard]] static MomentSequence from_values(std::vector<double> values, MomentKind kind);
  /// signs[k] in {-1, 0, +1}; a zero sign means m_k = 0 (log_abs ignored).
  [[nodiscard]] static MomentSequence from_log_magnitudes(std::vector<double> log_abs, std::vector<int> signs,
                                                          MomentKind kind);

  [[nodiscard]] int max_order() const noexcept { return static_cast<int>(values_.size()) - 1; }
  [[nodiscard]] MomentKind kind() const noexcept { return kind_; }
  [[nodiscard]] double value(int k) const { return values_.at(static_cast<std::size_t>(k)); }
  /// log |m_k|; -inf for a zero moment.
  [[nodiscard]] double log_abs(int k) const { return log_abs_.at(static_cast<std::size_t>(k)); }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

  /// Highest order considered trustworthy for empirical input; empty means exact.
  [[nodiscard]] std::optional<int> reliable_order() const noexcept { return reliable_order_; }
  void set_reliable_order(int order) { reliable_order_ = order; }

 private:
  MomentSequence(std::vector<double> values, std::vector<double> log_abs, MomentKind kind);
  void validate() const;

  std::vector<double> values_;
  std::vector<double> log_abs_;
  MomentKind kind_;
  std::optional<int> reliable_order_;
};

/// floor(2 n^{1/4}): empirical moments above this order are noise-dominated.
[[nodiscard]] int reliable_empirical_order(std::size_t sample_size) noexcept;

/// m_k = sum_i w_i v_i^k (or |v_i|^k). Throws NonFinite naming the first overflowing order.
[[nodiscard]] MomentSequence empirical_moments(const Projected1D& proj, int max_order, MomentKind kind);
/// As above for the projection of a sample, with the reliability order set from its size.
[[nodiscard]] MomentSequence empirical_moments(const SampleSet& sample, const Direction& u, int max_order,
                                               MomentKind kind);

/// Raw moments of <u, X> up to max_order from the exact oracle of an analytic law.
[[nodiscard]] MomentSequence analytic_directional_moments(const AnalyticDistribution& dist, const Direction& u,
                                                          int max_order);

enum class CarlemanVerdict { Diverging, Converging, Inconclusive };
[[nodiscard]] std::string_view to_string(CarlemanVerdict verdict) noexcept;

struct CarlemanReport {
  int order = 0;
  /// t_m = m_{2m}^{-1/(2m)}, m = 1..order.
  std::vector<double> terms;
  std::vector<double> partial_sums;
  CarlemanVerdict verdict = CarlemanVerdict::Inconclusive;
  /// Least-squares slope of log t_m on log m over the tail half; NaN when not computed.
  double slope_statistic = 0.0;
  std::string reason;
  /// False when orders above the input's reliable order were used.
  bool reliable = true;
};

inline constexpr double kCarlemanSlopeTolerance = 0.05;
inline constexpr double kCarlemanCauchyIncrement = 1e-9;

/**
 * Truncated Carleman series sum_{m<=M} m_{2m}^{-1/(2m)} with a finite-M verdict:
 * tail slope >= -1 - 0.05 means diverging (sum m^-p diverges iff p <= 1); a steeper slope
 * whose last increment is below 1e-9 means converging; anything else is inconclusive.
 * A zero even moment is the point mass at 0 and counts as diverging. Non-finite moments
 * give an inconclusive report rather than an error.
 */
[[nodiscard]] CarlemanReport carleman_partial_sums(const MomentSequence& even_moments, int max_terms);

/// E <u, X>^m: exact for atomic and analytic sources, the sample average for a SampleSet.
[[nodiscard]] double directional_moment(const SampleSet& source, const Direction& u, int m);
[[nodiscard]] double directional_moment(const AtomicMeasure& source, const Direction& u, int m);
/// Throws NoAnalyticOracle when the moment is not representable.
[[nodiscard]] double directional_moment(const AnalyticDistribution& source, const Direction& u, int m);

[[nodiscard]] MixedMoments empirical_mixed_moments(const SampleSet& sample, int max_order);
[[nodiscard]] MixedMoments mixed_moments(const AtomicMeasure& measure, int max_order);

/// sum_{|alpha|=m} (m choose alpha) u^alpha mu_alpha.
[[nodiscard]] double mixed_to_directional(const MixedMoments& mm, const Direction& u, int m);

struct DirectionalObservation {
  Direction direction;
  double value;
};

struct Reconstruction {
  int order = 0;
  std::vector<MultiIndex> indices;
  std::vector<double> coefficients;
  /// Condition number of the column-equilibrated design.
  double condition_number = 0.0;
  double residual_norm = 0.0;
  std::size_t rank = 0;
};

/// Relative singular-value cutoff for the numerical rank of the reconstruction design.
inline constexpr double kRankTolerance = 1e-10;

/**
 * Least-squares recovery of mu_alpha, |alpha| = m, from directional moments. Design rows are
 * (m choose alpha) u^alpha over grlex indices. Throws RankDeficient when the numerical rank is
 * below homogeneous_dim(d, m): the directions lie on the zero set of some nonzero degree-m form.
 */
[[nodiscard]] Reconstruction reconstruct_mixed(std::span<const DirectionalObservation> observations,
                                               std::size_t d, int m);

/// r_m(u) = E_Q <u,X>^m - E_P <u,X>^m through both mixed-moment tables.
[[nodiscard]] double rm_residual(const MixedMoments& p, const MixedMoments& q, const Direction& u, int m);

struct MomentBoundCheck {
  /// mean of ||x||^m.
  double lhs = 0.0;
  /// C^m d^{m-1} sum_j mean |<u_j, x>|^m.
  double rhs = 0.0;
  /// Points where ||x||^m > C^m d^{m-1} sum_j |<u_j,x>|^m (beyond a 1e-12 relative rounding allowance).
  std::size_t pointwise_violations = 0;
};

[[nodiscard]] MomentBoundCheck absolute_moment_bound_check(const SampleSet& sample, const Frame& frame, int m);

}  // namespace cwkit
