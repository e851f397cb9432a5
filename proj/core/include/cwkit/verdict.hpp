#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cwkit/directions.hpp"
#include "cwkit/gallery.hpp"
#include "cwkit/moments.hpp"
#include "cwkit/projections.hpp"

namespace cwkit {

/// The limit law a sequence is tested against: data or an analytic law.
using Target = std::variant<SampleSet, AnalyticDistribution>;

[[nodiscard]] std::size_t target_dim(const Target& target) noexcept;

enum class H1Rule { FinalBelow, MonotoneTrend };
[[nodiscard]] std::string_view to_string(H1Rule rule) noexcept;

enum class OverallVerdict { ConsistentWithConvergence, Inconsistent, Inconclusive };
[[nodiscard]] std::string_view to_string(OverallVerdict verdict) noexcept;

struct VerdictConfig {
  Region region = Region::full_sphere(2);
  std::size_t n_directions = 32;
  Metric metric = Metric::KS;
  /// Empty: 1.36 / sqrt(n_min) + 0.01, n_min the smallest sample entering the final comparison.
  std::optional<double> h1_tolerance;
  H1Rule h1_rule = H1Rule::FinalBelow;
  int carleman_order = 30;
  int moment_order = 4;
  double epsilon = 0.1;
  std::uint64_t seed = 0;
  double frame_tau = kDefaultFrameTau;
  /// Size of the reference sample drawn from a continuous analytic target for H1.
  std::size_t reference_size = 100'000;
  std::size_t max_draw_budget = 1'000'000;
  /// Absolute tolerance per order 1..moment_order; empty uses moment_z standard errors.
  std::vector<double> moment_tolerances;
  double moment_z = 5.0;

  /// Throws InvalidArgument on n_directions < d, M < 1, M_c < 5, epsilon outside (0,1), ...
  void validate(std::size_t dim) const;
};

/// K = prod_j [-M_j, M_j] in frame coordinates.
struct TightnessBox {
  Frame frame;
  std::vector<double> half_widths;
  double epsilon = 0.0;
  /// Fraction of each building element inside {x : |<u_j, x>| <= M_j for all j}.
  std::vector<double> achieved_coverage;

  [[nodiscard]] bool contains(std::span<const double> x) const;
  [[nodiscard]] double coverage(const SampleSet& sample) const;
};

/**
 * M_j = max over elements of the empirical (1 - epsilon/d)-quantile of |<u_j, x>|, taken as an
 * order statistic so that at most a fraction epsilon/d of each element exceeds it. The union
 * bound then gives coverage >= 1 - epsilon on the building data.
 */
[[nodiscard]] TightnessBox tightness_box(std::span<const SampleSet> sequence, const Frame& frame, double epsilon);

struct H1Outcome {
  std::size_t direction_id = 0;
  bool pass = false;
  /// "ok", "final_distance_exceeds" or "no_decreasing_trend".
  std::string reason;
  double final_distance = 0.0;
  /// Kendall tau-b of (sequence position, distance); NaN when undefined.
  double kendall_tau = 0.0;
};

inline constexpr double kTrendThreshold = -0.5;

/// Kendall tau-b; NaN when either coordinate is constant or fewer than two points.
[[nodiscard]] double kendall_tau(std::span<const double> x, std::span<const double> y);

/**
 * final_below: last distance < tolerance. monotone_trend: additionally Kendall tau <= -0.5;
 * a trace with constant distances has no trend to test and is judged on its last distance.
 */
[[nodiscard]] std::vector<H1Outcome> h1_check(std::span<const DistanceTrace> traces, double tolerance, H1Rule rule);

/// One Carleman report per frame direction: exact oracles for analytic targets, flagged empirical moments otherwise.
[[nodiscard]] std::vector<CarlemanReport> h2_check(const Target& target, const Frame& frame, int carleman_order);

struct OrderDiscrepancy {
  int order = 0;
  double max_abs_discrepancy = 0.0;
  /// Threshold applied to the index with the largest discrepancy-to-threshold ratio.
  double threshold = 0.0;
  MultiIndex worst_index{std::vector<int>{0}};
  bool pass = true;
};

/// Absolute allowance added to automatic thresholds so exact representations compare equal.
inline constexpr double kMomentFloor = 1e-9;

/**
 * Per order m <= M: max_{|alpha| = m} |mu_alpha(P) - mu_alpha(Q)|. With explicit tolerances each
 * order is compared to its tolerance; otherwise each alpha is compared to z times its Monte-Carlo
 * standard error (from the sample moments of order 2 alpha) plus kMomentFloor.
 */
[[nodiscard]] std::vector<OrderDiscrepancy> moment_match(const Target& p, const SampleSet& q, int max_order,
                                                         std::span<const double> per_order_tolerances = {},
                                                         double z = 5.0);

struct InputDigest {
  std::string label;
  std::string kind;
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::string digest;
};

struct VerdictReport {
  std::size_t dim = 0;
  std::vector<Direction> directions;
  std::vector<DistanceTrace> traces;
  double h1_tolerance = 0.0;
  std::vector<H1Outcome> h1;
  std::optional<Frame> frame;
  std::vector<CarlemanReport> carleman;
  std::optional<TightnessBox> tightness;
  std::vector<OrderDiscrepancy> moments;
  OverallVerdict overall = OverallVerdict::Inconclusive;
  std::vector<std::string> flags;
  VerdictConfig config;
  std::vector<InputDigest> sequence_digests;
  InputDigest target_digest;
};

struct Aggregate {
  OverallVerdict verdict;
  std::vector<std::string> flags;
};

/**
 * Combines hypothesis outcomes.
 *  - any H1 failure: inconsistent (a non-converging projection falsifies convergence);
 *  - zero-measure region: inconclusive, flagged, since the directions cannot identify the limit;
 *  - any moment discrepancy over threshold: inconsistent;
 *  - any Carleman verdict other than diverging: inconclusive;
 *  - otherwise consistent_with_convergence.
 */
[[nodiscard]] Aggregate aggregate(std::span<const H1Outcome> h1, std::span<const CarlemanReport> carleman,
                                  std::span<const OrderDiscrepancy> moments, bool region_has_positive_measure);

/// Directions of A used for H1: the FiniteSet itself, or n_directions rejection samples.
[[nodiscard]] std::vector<Direction> directions_in_region(const VerdictConfig& config);

/// 1.36 / sqrt(n_min) + 0.01 for the samples entering the final comparison.
[[nodiscard]] double default_h1_tolerance(std::span<const SampleSet> sequence, const Target& target,
                                          const VerdictConfig& config);

/**
 * Distance traces along each direction. Atomic targets are projected exactly; continuous analytic
 * targets are represented by a reference sample of config.reference_size draws.
 */
[[nodiscard]] std::vector<DistanceTrace> h1_traces(std::span<const SampleSet> sequence, const Target& target,
                                                   std::span<const Direction> directions,
                                                   const VerdictConfig& config);

/**
 * Runs every hypothesis check of the sequential Cramer-Wold argument on finite data.
 * Deterministic given the config seed. InsufficientRank, BudgetExhausted and DimensionMismatch
 * abort with the failed stage recorded in the error context under "hypothesis".
 */
[[nodiscard]] VerdictReport run_verdict(std::span<const SampleSet> sequence, const Target& target,
                                        const VerdictConfig& config);

}  // namespace cwkit
