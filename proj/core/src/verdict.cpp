#include "cwkit/verdict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "cwkit/error.hpp"
#include "cwkit/io.hpp"
#include "cwkit/rng.hpp"

namespace cwkit {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads. Each index writes only
// its own output slot, so results do not depend on the schedule.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Error with_hypothesis(const Error& e, const std::string& hypothesis) {
  Error out(e.kind(), e.what());
  for (const auto& [k, v] : e.context()) out.with(k, v);
  out.with("hypothesis", hypothesis);
  return out;
}

double order_statistic_quantile(std::vector<double> values, double level) {
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  auto k = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n) - 1e-9));
  k = std::clamp<std::size_t>(k, 1, n);
  return values[k - 1];
}

MixedMoments target_moments(const Target& target, int max_order) {
  if (const auto* s = std::get_if<SampleSet>(&target)) return empirical_mixed_moments(*s, max_order);
  return mixed_moment_table(std::get<AnalyticDistribution>(target), max_order);
}

}  // namespace

std::size_t target_dim(const Target& target) noexcept {
  if (const auto* s = std::get_if<SampleSet>(&target)) return s->dim();
  return std::get<AnalyticDistribution>(target).dim();
}

std::string_view to_string(H1Rule rule) noexcept {
  return rule == H1Rule::FinalBelow ? "final_below" : "monotone_trend";
}

std::string_view to_string(OverallVerdict verdict) noexcept {
  switch (verdict) {
    case OverallVerdict::ConsistentWithConvergence: return "consistent_with_convergence";
    case OverallVerdict::Inconsistent: return "inconsistent";
    case OverallVerdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

void VerdictConfig::validate(std::size_t dim) const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
  if (region.dim() != dim) {
    throw Error(ErrorKind::DimensionMismatch, "region dimension differs from data dimension")
        .with("region_dim", std::to_string(region.dim()))
        .with("data_dim", std::to_string(dim));
  }
  if (region.has_positive_measure() && n_directions < dim) fail("n_directions must be >= d");
  if (moment_order < 1) fail("moment order must be >= 1");
  if (carleman_order < 5) fail("Carleman order must be >= 5");
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail("epsilon must lie in (0, 1)");
  if (h1_tolerance && !(*h1_tolerance > 0.0)) fail("H1 tolerance must be positive");
  if (!(frame_tau > 0.0)) fail("frame tau must be positive");
  if (reference_size < 1) fail("reference size must be >= 1");
  if (!moment_tolerances.empty() && moment_tolerances.size() != static_cast<std::size_t>(moment_order)) {
    fail("moment tolerances must list one value per order 1..M");
  }
  if (!(moment_z > 0.0)) fail("moment z must be positive");
}

bool TightnessBox::contains(std::span<const double> x) const {
  for (std::size_t j = 0; j < half_widths.size(); ++j) {
    if (std::abs(frame.directions()[j].dot(x)) > half_widths[j]) return false;
  }
  return true;
}

double TightnessBox::coverage(const SampleSet& sample) const {
  if (sample.dim() != frame.dim()) throw Error(ErrorKind::DimensionMismatch, "sample and frame dimensions differ");
  const Eigen::MatrixXd coords = sample.points() * frame.matrix().transpose();
  std::size_t inside = 0;
  for (Eigen::Index r = 0; r < coords.rows(); ++r) {
    bool in = true;
    for (Eigen::Index j = 0; j < coords.cols() && in; ++j) {
      in = std::abs(coords(r, j)) <= half_widths[static_cast<std::size_t>(j)];
    }
    if (in) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(coords.rows());
}

TightnessBox tightness_box(std::span<const SampleSet> sequence, const Frame& frame, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must lie in (0, 1)");
  if (sequence.empty()) throw Error(ErrorKind::InvalidArgument, "sequence must be nonempty");
  const auto d = frame.dim();
  const double level = 1.0 - epsilon / static_cast<double>(d);
  TightnessBox box{frame, std::vector<double>(d, 0.0), epsilon, {}};
  for (const auto& element : sequence) {
    if (element.dim() != d) throw Error(ErrorKind::DimensionMismatch, "sequence element dimension differs");
    const Eigen::MatrixXd coords = element.points() * frame.matrix().transpose();
    for (std::size_t j = 0; j < d; ++j) {
      const Eigen::VectorXd col = coords.col(static_cast<Eigen::Index>(j)).cwiseAbs();
      const double q = order_statistic_quantile(std::vector<double>(col.begin(), col.end()), level);
      box.half_widths[j] = std::max(box.half_widths[j], q);
    }
  }
  for (const auto& element : sequence) box.achieved_coverage.push_back(box.coverage(element));
  return box;
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  const auto n = std::min(x.size(), y.size());
  if (n < 2) return kNaN;
  double concordant_minus_discordant = 0.0;
  double untied_x = 0.0;
  double untied_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[j] - x[i];
      const double dy = y[j] - y[i];
      const int sx = (dx > 0) - (dx < 0);
      const int sy = (dy > 0) - (dy < 0);
      concordant_minus_discordant += sx * sy;
      untied_x += sx != 0;
      untied_y += sy != 0;
    }
  }
  if (untied_x == 0.0 || untied_y == 0.0) return kNaN;
  return concordant_minus_discordant / std::sqrt(untied_x * untied_y);
}

std::vector<H1Outcome> h1_check(std::span<const DistanceTrace> traces, double tolerance, H1Rule rule) {
  if (traces.empty()) throw Error(ErrorKind::InvalidArgument, "no traces to check");
  std::vector<H1Outcome> out;
  out.reserve(traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& entries = traces[i].entries;
    if (entries.empty()) throw Error(ErrorKind::InvalidArgument, "empty distance trace");
    std::vector<double> position, dist;
    for (const auto& e : entries) {
      position.push_back(static_cast<double>(e.index));
      dist.push_back(e.distance);
    }
    H1Outcome o;
    o.direction_id = i;
    o.final_distance = dist.back();
    o.kendall_tau = kendall_tau(position, dist);
    o.pass = true;
    o.reason = "ok";
    if (!(o.final_distance < tolerance)) {
      o.pass = false;
      o.reason = "final_distance_exceeds";
    } else if (rule == H1Rule::MonotoneTrend) {
      const bool constant = std::all_of(dist.begin(), dist.end(), [&](double v) { return v == dist.front(); });
      if (!constant && !(o.kendall_tau <= kTrendThreshold)) {
        o.pass = false;
        o.reason = "no_decreasing_trend";
      }
    }
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<CarlemanReport> h2_check(const Target& target, const Frame& frame, int carleman_order) {
  if (target_dim(target) != frame.dim()) throw Error(ErrorKind::DimensionMismatch, "target and frame dimensions differ");
  std::vector<CarlemanReport> out;
  for (const auto& u : frame.directions()) {
    if (const auto* s = std::get_if<SampleSet>(&target)) {
      try {
        const auto seq = empirical_moments(*s, u, 2 * carleman_order, MomentKind::Absolute);
        out.push_back(carleman_partial_sums(seq, carleman_order));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NonFinite) throw;
        CarlemanReport r;
        r.order = carleman_order;
        r.verdict = CarlemanVerdict::Inconclusive;
        r.slope_statistic = kNaN;
        r.reason = "non-finite empirical moment at order " + e.context_value("order");
        r.reliable = false;
        out.push_back(std::move(r));
      }
    } else {
      const auto seq = analytic_directional_moments(std::get<AnalyticDistribution>(target), u, 2 * carleman_order);
      out.push_back(carleman_partial_sums(seq, carleman_order));
    }
  }
  return out;
}

std::vector<OrderDiscrepancy> moment_match(const Target& p, const SampleSet& q, int max_order,
                                           std::span<const double> per_order_tolerances, double z) {
  if (max_order < 1) throw Error(ErrorKind::InvalidArgument, "moment order must be >= 1");
  if (target_dim(p) != q.dim()) throw Error(ErrorKind::DimensionMismatch, "target and sample dimensions differ");
  if (!per_order_tolerances.empty() && per_order_tolerances.size() != static_cast<std::size_t>(max_order)) {
    throw Error(ErrorKind::InvalidArgument, "need one tolerance per order");
  }
  const bool automatic = per_order_tolerances.empty();
  const auto d = q.dim();
  const MixedMoments p_mm = target_moments(p, max_order);
  // Orders up to 2M give the variance of each x^alpha for the standard errors.
  const MixedMoments q_mm = empirical_mixed_moments(q, automatic ? 2 * max_order : max_order);
  std::optional<MixedMoments> p_sq;
  if (automatic) {
    if (const auto* ps = std::get_if<SampleSet>(&p)) p_sq = empirical_mixed_moments(*ps, 2 * max_order);
  }

  std::vector<OrderDiscrepancy> out;
  for (int m = 1; m <= max_order; ++m) {
    OrderDiscrepancy row;
    row.order = m;
    double worst_ratio = -1.0;
    for (const auto& alpha : multi_indices(d, m)) {
      const double mp = p_mm.at(alpha);
      const double mq = q_mm.at(alpha);
      const double diff = std::abs(mp - mq);
      double threshold;
      if (automatic) {
        std::vector<int> doubled(alpha.exponents().begin(), alpha.exponents().end());
        for (auto& a : doubled) a *= 2;
        const MultiIndex alpha2(std::move(doubled));
        double var = std::max(0.0, q_mm.at(alpha2) - mq * mq) / static_cast<double>(q.size());
        if (p_sq) {
          const auto& ps = std::get<SampleSet>(p);
          var += std::max(0.0, p_sq->at(alpha2) - mp * mp) / static_cast<double>(ps.size());
        }
        threshold = z * std::sqrt(var) + kMomentFloor * std::max(1.0, std::abs(mp));
      } else {
        threshold = per_order_tolerances[static_cast<std::size_t>(m - 1)];
      }
      row.max_abs_discrepancy = std::max(row.max_abs_discrepancy, diff);
      const double ratio = threshold > 0.0 ? diff / threshold : (diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      if (ratio > worst_ratio) {
        worst_ratio = ratio;
        row.threshold = threshold;
        row.worst_index = alpha;
      }
      if (!(diff <= threshold)) row.pass = false;
    }
    out.push_back(std::move(row));
  }
  return out;
}

Aggregate aggregate(std::span<const H1Outcome> h1, std::span<const CarlemanReport> carleman,
                    std::span<const OrderDiscrepancy> moments, bool region_has_positive_measure) {
  Aggregate a{OverallVerdict::ConsistentWithConvergence, {}};
  const bool h1_fail = std::any_of(h1.begin(), h1.end(), [](const H1Outcome& o) { return !o.pass; });
  const bool moment_fail = std::any_of(moments.begin(), moments.end(), [](const OrderDiscrepancy& o) { return !o.pass; });
  const bool h2_inconclusive = std::any_of(carleman.begin(), carleman.end(), [](const CarlemanReport& r) {
    return r.verdict == CarlemanVerdict::Inconclusive;
  });
  const bool h2_fails = std::any_of(carleman.begin(), carleman.end(), [](const CarlemanReport& r) {
    return r.verdict == CarlemanVerdict::Converging;
  });
  const bool unreliable = std::any_of(carleman.begin(), carleman.end(), [](const CarlemanReport& r) { return !r.reliable; });

  if (!region_has_positive_measure) a.flags.emplace_back("zero_measure_region");
  if (h1_fail) a.flags.emplace_back("h1_failed");
  if (moment_fail) a.flags.emplace_back("moment_discrepancy");
  if (h2_fails) a.flags.emplace_back("h2_carleman_fails");
  if (h2_inconclusive) a.flags.emplace_back("h2_inconclusive");
  if (unreliable) a.flags.emplace_back("unreliable_empirical_moments");

  if (h1_fail) {
    a.verdict = OverallVerdict::Inconsistent;
  } else if (!region_has_positive_measure) {
    a.verdict = OverallVerdict::Inconclusive;
  } else if (moment_fail) {
    a.verdict = OverallVerdict::Inconsistent;
  } else if (h2_fails || h2_inconclusive) {
    a.verdict = OverallVerdict::Inconclusive;
  }
  return a;
}

std::vector<Direction> directions_in_region(const VerdictConfig& config) {
  if (const auto* finite = std::get_if<FiniteSet>(&config.region.shape())) return finite->points;
  return sample_in_region(config.region, config.n_directions, derive_seed(config.seed, "directions"),
                          config.max_draw_budget);
}

namespace {

// Sample-based stand-in for a continuous analytic target; empty for data and atomic targets.
std::optional<SampleSet> reference_sample(const Target& target, const VerdictConfig& config) {
  const auto* dist = std::get_if<AnalyticDistribution>(&target);
  if (!dist || std::holds_alternative<AtomicMeasure>(dist->law())) return std::nullopt;
  return sample(*dist, config.reference_size, derive_seed(config.seed, "reference"), "reference");
}

}  // namespace

double default_h1_tolerance(std::span<const SampleSet> sequence, const Target& target, const VerdictConfig& config) {
  if (sequence.empty()) throw Error(ErrorKind::InvalidArgument, "sequence must be nonempty");
  std::size_t n_min = sequence.back().size();
  if (const auto* s = std::get_if<SampleSet>(&target)) {
    n_min = std::min(n_min, s->size());
  } else if (!std::holds_alternative<AtomicMeasure>(std::get<AnalyticDistribution>(target).law())) {
    n_min = std::min(n_min, config.reference_size);
  }
  return 1.36 / std::sqrt(static_cast<double>(n_min)) + 0.01;
}

std::vector<DistanceTrace> h1_traces(std::span<const SampleSet> sequence, const Target& target,
                                     std::span<const Direction> directions, const VerdictConfig& config) {
  if (directions.empty()) throw Error(ErrorKind::InvalidArgument, "no directions");
  const auto reference = reference_sample(target, config);
  const SampleSet* sample_target = reference ? &*reference : std::get_if<SampleSet>(&target);
  const AtomicMeasure* exact_target = nullptr;
  if (!sample_target) exact_target = &std::get<AtomicMeasure>(std::get<AnalyticDistribution>(target).law());

  std::vector<DistanceTrace> traces(directions.size(), DistanceTrace{directions.front(), config.metric, {}});
  parallel_for(directions.size(), [&](std::size_t i) {
    const auto& u = directions[i];
    const auto projected = exact_target ? project(*exact_target, u) : project(*sample_target, u);
    traces[i] = distance_trace(sequence, projected, u, config.metric);
  });
  return traces;
}

VerdictReport run_verdict(std::span<const SampleSet> sequence, const Target& target, const VerdictConfig& config) {
  if (sequence.empty()) throw Error(ErrorKind::InvalidArgument, "sequence must be nonempty");
  const auto d = target_dim(target);
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (sequence[i].dim() != d) {
      throw with_hypothesis(Error(ErrorKind::DimensionMismatch, "sequence element dimension differs from target")
                                .with("element", std::to_string(i))
                                .with("element_dim", std::to_string(sequence[i].dim()))
                                .with("target_dim", std::to_string(d)),
                            "input");
    }
  }
  try {
    config.validate(d);
  } catch (const Error& e) {
    throw with_hypothesis(e, "config");
  }

  VerdictReport report;
  report.dim = d;
  report.config = config;
  for (const auto& s : sequence) report.sequence_digests.push_back({s.label(), "samples", s.size(), s.dim(), fingerprint(s)});
  if (const auto* s = std::get_if<SampleSet>(&target)) {
    report.target_digest = {s->label(), "samples", s->size(), s->dim(), fingerprint(*s)};
  } else {
    const auto& dist = std::get<AnalyticDistribution>(target);
    report.target_digest = {dist.family(), "analytic", 0, dist.dim(), fingerprint(dist)};
  }

  try {
    report.directions = directions_in_region(config);
  } catch (const Error& e) {
    throw with_hypothesis(e, "H1: sampling directions in A");
  }
  report.h1_tolerance = config.h1_tolerance.value_or(default_h1_tolerance(sequence, target, config));
  report.traces = h1_traces(sequence, target, report.directions, config);
  report.h1 = h1_check(report.traces, report.h1_tolerance, config.h1_rule);

  // H2 on a frame drawn from the same directions.
  try {
    report.frame = extract_frame(report.directions, config.frame_tau);
  } catch (const Error& e) {
    throw with_hypothesis(e, "H2: extracting d linearly independent directions from A");
  }
  report.carleman = h2_check(target, *report.frame, config.carleman_order);

  report.tightness = tightness_box(sequence, *report.frame, config.epsilon);
  report.moments = moment_match(target, sequence.back(), config.moment_order, config.moment_tolerances, config.moment_z);

  auto agg = aggregate(report.h1, report.carleman, report.moments, config.region.has_positive_measure());
  report.overall = agg.verdict;
  report.flags = std::move(agg.flags);
  return report;
}

}  // namespace cwkit
