#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cwkit/error.hpp"
#include "cwkit/gallery.hpp"
#include "cwkit/report.hpp"
#include "cwkit/rng.hpp"
#include "cwkit/verdict.hpp"
#include "oracles.hpp"

namespace cwkit {
namespace {

DistanceTrace trace_of(std::vector<double> distances) {
  DistanceTrace t{Direction::axis(2, 0), Metric::KS, {}};
  for (std::size_t i = 0; i < distances.size(); ++i) t.entries.push_back({i, 10 * (i + 1), distances[i]});
  return t;
}

SampleSet switching_sample(const AtomicMeasure& m) {
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.dim()));
  for (std::size_t i = 0; i < m.size(); ++i) pts.row(static_cast<Eigen::Index>(i)) = m.points()[i].transpose();
  return SampleSet(pts, "switching-p");
}

std::vector<SampleSet> gaussian_sequence(std::size_t d, const Eigen::VectorXd& shift = {}) {
  std::vector<SampleSet> seq;
  for (std::size_t n : {100u, 1000u, 10000u}) {
    auto s = sample(AnalyticDistribution::standard_gaussian(d), n, 1000 + n);
    if (shift.size() > 0) {
      Eigen::MatrixXd p = s.points();
      p.rowwise() += shift.transpose();
      s = SampleSet(p);
    }
    seq.push_back(std::move(s));
  }
  return seq;
}

TEST(H1Check, Examples) {
  const std::vector<DistanceTrace> zero{trace_of({0, 0, 0})};
  for (const auto rule : {H1Rule::FinalBelow, H1Rule::MonotoneTrend}) EXPECT_TRUE(h1_check(zero, 0.05, rule)[0].pass);
  const std::vector<DistanceTrace> decay{trace_of({1.0, 0.5, 1.0 / 3, 0.25, 0.02})};
  EXPECT_TRUE(h1_check(decay, 0.05, H1Rule::FinalBelow)[0].pass);
  EXPECT_TRUE(h1_check(decay, 0.05, H1Rule::MonotoneTrend)[0].pass);
  const std::vector<DistanceTrace> flat{trace_of({0.3, 0.3, 0.3})};
  const auto out = h1_check(flat, 0.05, H1Rule::FinalBelow);
  EXPECT_FALSE(out[0].pass);
  EXPECT_EQ(out[0].reason, "final_distance_exceeds");
}

TEST(H1Check, MonotoneTrendRejectsRisingTrace) {
  const std::vector<DistanceTrace> rising{trace_of({0.001, 0.01, 0.02, 0.03})};
  EXPECT_TRUE(h1_check(rising, 0.05, H1Rule::FinalBelow)[0].pass);
  const auto out = h1_check(rising, 0.05, H1Rule::MonotoneTrend);
  EXPECT_FALSE(out[0].pass);
  EXPECT_EQ(out[0].reason, "no_decreasing_trend");
}

TEST(KendallTau, KnownValues) {
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_NEAR(kendall_tau(x, std::vector<double>{4, 3, 2, 1}), -1.0, 1e-15);
  EXPECT_NEAR(kendall_tau(x, std::vector<double>{1, 2, 3, 4}), 1.0, 1e-15);
  // One discordant pair of six: (5 - 1) / 6.
  EXPECT_NEAR(kendall_tau(x, std::vector<double>{1, 2, 4, 3}), 4.0 / 6.0, 1e-15);
}

TEST(Tightness, PointMassHasZeroWidth) {
  const std::vector<SampleSet> seq{SampleSet(Eigen::MatrixXd::Zero(50, 2)), SampleSet(Eigen::MatrixXd::Zero(20, 2))};
  const auto box = tightness_box(seq, Frame({Direction::axis(2, 0), Direction::axis(2, 1)}), 0.1);
  for (const double h : box.half_widths) EXPECT_EQ(h, 0.0);
  for (const double c : box.achieved_coverage) EXPECT_EQ(c, 1.0);
}

TEST(Tightness, GaussianQuantile) {
  const std::vector<SampleSet> seq{sample(AnalyticDistribution::standard_gaussian(2), 10000, 3)};
  const auto box = tightness_box(seq, Frame({Direction::axis(2, 0), Direction::axis(2, 1)}), 0.1);
  // Two-sided tail eps / (2d) per side.
  const double z = oracle::normal_quantile(1.0 - 0.1 / 4.0);
  EXPECT_NEAR(z, 1.96, 1e-2);
  for (const double h : box.half_widths) EXPECT_NEAR(h, z, 0.1);
}

TEST(Tightness, CoverageOnBuildingDataAndHoldOut) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto dist = AnalyticDistribution::standard_gaussian(3);
    const std::vector<SampleSet> seq{sample(dist, 300, s), sample(dist, 2000, s + 100)};
    const auto frame = extract_frame(sample_uniform(3, 6, s));
    const auto box = tightness_box(seq, frame, 0.1);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      EXPECT_GE(box.achieved_coverage[i], 0.9);
      EXPECT_EQ(box.achieved_coverage[i], box.coverage(seq[i]));
    }
    EXPECT_GE(box.coverage(sample(dist, 10000, s + 500)), 0.8);
  }
}

TEST(H2Check, AnalyticTargets) {
  const Frame axes({Direction::axis(2, 0), Direction::axis(2, 1)});
  for (const auto& r : h2_check(AnalyticDistribution::standard_gaussian(2), axes, 30)) {
    EXPECT_EQ(r.verdict, CarlemanVerdict::Diverging);
  }
  const auto ln = AnalyticDistribution::product_lognormal(Eigen::Vector2d::Zero(), Eigen::Vector2d::Ones());
  for (const auto& r : h2_check(ln, axes, 30)) EXPECT_EQ(r.verdict, CarlemanVerdict::Converging);
  const auto atomic = AnalyticDistribution::atomic(AtomicMeasure({Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 2)}, {0.5, 0.5}));
  for (const auto& r : h2_check(atomic, axes, 30)) EXPECT_EQ(r.verdict, CarlemanVerdict::Diverging);
}

TEST(MomentMatch, SampledFromTargetPasses) {
  const auto g = AnalyticDistribution::standard_gaussian(2);
  const auto table = moment_match(g, sample(g, 100000, 8), 4);
  ASSERT_EQ(table.size(), 4u);
  for (const auto& row : table) EXPECT_TRUE(row.pass) << "order " << row.order;
}

TEST(MomentMatch, ThresholdIsFiveMonteCarloErrors) {
  // Independent s.e. for the (2,0) moment of N(0, I): Var X^2 = 2.
  const auto g = AnalyticDistribution::standard_gaussian(2);
  const std::size_t n = 100000;
  const auto table = moment_match(g, sample(g, n, 9), 2);
  EXPECT_GE(table[1].threshold, 5.0 * std::sqrt(2.0 / n) * 0.9);
}

TEST(MomentMatch, ExactAtomicIsZero) {
  const AtomicMeasure m({Eigen::Vector2d(0, 1), Eigen::Vector2d(2, -1), Eigen::Vector2d(0.5, 0.5)}, {0.25, 0.25, 0.5});
  const SampleSet s = [] {
    Eigen::MatrixXd p(4, 2);
    p << 0, 1, 2, -1, 0.5, 0.5, 0.5, 0.5;
    return SampleSet(p);
  }();
  for (const auto& row : moment_match(AnalyticDistribution::atomic(m), s, 4)) {
    EXPECT_NEAR(row.max_abs_discrepancy, 0.0, 1e-14);
    EXPECT_TRUE(row.pass);
  }
}

TEST(MomentMatch, SwitchingPairSecondOrderDiffers) {
  const std::vector<std::vector<long long>> lattice{{1, 0}, {0, 1}};
  const auto pair = switching_pair(lattice);
  const auto table = moment_match(AnalyticDistribution::atomic(pair.q), switching_sample(pair.p), 2);
  EXPECT_GT(table[1].max_abs_discrepancy, 0.1);
}

TEST(Aggregate, Rules) {
  const std::vector<H1Outcome> ok{{0, true, "ok", 0.0, -1.0}};
  const std::vector<H1Outcome> bad{{0, false, "final_distance_exceeds", 0.3, 0.0}};
  CarlemanReport div, conv;
  div.verdict = CarlemanVerdict::Diverging;
  conv.verdict = CarlemanVerdict::Converging;
  const std::vector<CarlemanReport> h2_ok{div}, h2_bad{conv};
  OrderDiscrepancy pass_row, fail_row;
  fail_row.pass = false;
  const std::vector<OrderDiscrepancy> m_ok{pass_row}, m_bad{fail_row};

  EXPECT_EQ(aggregate(ok, h2_ok, m_ok, true).verdict, OverallVerdict::ConsistentWithConvergence);
  EXPECT_EQ(aggregate(bad, h2_ok, m_ok, true).verdict, OverallVerdict::Inconsistent);
  EXPECT_EQ(aggregate(ok, h2_ok, m_bad, true).verdict, OverallVerdict::Inconsistent);
  EXPECT_EQ(aggregate(ok, h2_bad, m_ok, true).verdict, OverallVerdict::Inconclusive);
  const auto zero = aggregate(ok, h2_ok, m_bad, false);
  EXPECT_EQ(zero.verdict, OverallVerdict::Inconclusive);
  EXPECT_NE(std::find(zero.flags.begin(), zero.flags.end(), "zero_measure_region"), zero.flags.end());
}

TEST(Aggregate, FuzzedInvariant) {
  Stream rng(31, 0);
  for (int t = 0; t < 2000; ++t) {
    std::vector<H1Outcome> h1(1 + rng.next_u64() % 4);
    bool h1_fail = false;
    for (auto& o : h1) {
      o.pass = rng.uniform() < 0.8;
      h1_fail |= !o.pass;
    }
    std::vector<CarlemanReport> h2(1 + rng.next_u64() % 3);
    bool h2_unsettled = false;
    for (auto& r : h2) {
      const double x = rng.uniform();
      r.verdict = x < 0.7 ? CarlemanVerdict::Diverging : x < 0.85 ? CarlemanVerdict::Converging : CarlemanVerdict::Inconclusive;
      h2_unsettled |= r.verdict != CarlemanVerdict::Diverging;
    }
    std::vector<OrderDiscrepancy> mm(1 + rng.next_u64() % 4);
    bool m_fail = false;
    for (auto& o : mm) {
      o.pass = rng.uniform() < 0.85;
      m_fail |= !o.pass;
    }
    const bool positive = rng.uniform() < 0.8;
    const auto agg = aggregate(h1, h2, mm, positive);
    if (positive) {
      EXPECT_EQ(agg.verdict == OverallVerdict::Inconsistent, h1_fail || m_fail);
      EXPECT_EQ(agg.verdict == OverallVerdict::Inconclusive, !h1_fail && !m_fail && h2_unsettled);
    } else {
      EXPECT_EQ(agg.verdict == OverallVerdict::Inconsistent, h1_fail);
      EXPECT_NE(agg.verdict, OverallVerdict::ConsistentWithConvergence);
    }
  }
}

TEST(RunVerdict, GaussianSequenceIsConsistent) {
  VerdictConfig c;
  c.seed = 5;
  const auto report = run_verdict(gaussian_sequence(2), AnalyticDistribution::standard_gaussian(2), c);
  EXPECT_EQ(report.overall, OverallVerdict::ConsistentWithConvergence);
  EXPECT_TRUE(report.flags.empty());
  EXPECT_EQ(report.h1.size(), c.n_directions);
  EXPECT_EQ(report.carleman.size(), 2u);
}

TEST(RunVerdict, ShiftedTargetIsInconsistent) {
  VerdictConfig c;
  c.seed = 6;
  const auto target = AnalyticDistribution::gaussian(Eigen::Vector2d(1, 0), Eigen::Matrix2d::Identity());
  const auto report = run_verdict(gaussian_sequence(2), target, c);
  EXPECT_EQ(report.overall, OverallVerdict::Inconsistent);
  const auto failed = std::count_if(report.h1.begin(), report.h1.end(), [](const auto& o) { return !o.pass; });
  EXPECT_GT(failed, static_cast<long>(report.h1.size() / 2));
}

TEST(RunVerdict, SwitchingPairOnFiniteRegionIsInconclusive) {
  const std::vector<std::vector<long long>> lattice{{1, 0}, {0, 1}};
  const auto pair = switching_pair(lattice);
  const auto p = switching_sample(pair.p);
  VerdictConfig c;
  c.region = Region::finite_set(pair.certified_directions);
  const std::vector<SampleSet> seq{p, p, p};
  const auto report = run_verdict(seq, AnalyticDistribution::atomic(pair.q), c);
  for (const auto& t : report.traces) {
    for (const auto& e : t.entries) EXPECT_EQ(e.distance, 0.0);
  }
  EXPECT_EQ(report.overall, OverallVerdict::Inconclusive);
  EXPECT_NE(std::find(report.flags.begin(), report.flags.end(), "zero_measure_region"), report.flags.end());
}

TEST(RunVerdict, SwitchingPairOnCapIsDistinguished) {
  const std::vector<std::vector<long long>> lattice{{1, 0}, {0, 1}};
  const auto pair = switching_pair(lattice);
  const auto p = switching_sample(pair.p);
  const std::vector<SampleSet> seq{p, p};
  std::size_t distinguished = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    VerdictConfig c;
    c.seed = s;
    c.n_directions = 50;
    c.region = Region::cap(Direction::axis(2, 0), 0.5);
    const auto traces = h1_traces(seq, AnalyticDistribution::atomic(pair.q), directions_in_region(c), c);
    distinguished += std::any_of(traces.begin(), traces.end(), [](const auto& t) { return t.entries.back().distance > 0.2; });
  }
  EXPECT_EQ(distinguished, 100u);
}

TEST(RunVerdict, DeterministicReportBytes) {
  VerdictConfig c;
  c.seed = 77;
  c.region = Region::full_sphere(3);
  c.reference_size = 20000;
  const auto seq = gaussian_sequence(3);
  const auto a = to_json(run_verdict(seq, AnalyticDistribution::standard_gaussian(3), c));
  const auto b = to_json(run_verdict(seq, AnalyticDistribution::standard_gaussian(3), c));
  EXPECT_EQ(a, b);
}

TEST(RunVerdict, ErrorsNameTheHypothesis) {
  VerdictConfig c;
  c.region = Region::cap(Direction::axis(2, 0), 1e-7);
  c.max_draw_budget = 1000;
  try {
    (void)run_verdict(gaussian_sequence(2), AnalyticDistribution::standard_gaussian(2), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BudgetExhausted);
    EXPECT_NE(e.context_value("hypothesis").find("H1"), std::string::npos);
  }
  VerdictConfig flat;
  flat.region = Region::finite_set({Direction::axis(3, 0), Direction::axis(3, 1), Direction::axis(3, 0)});
  try {
    (void)run_verdict(gaussian_sequence(3), AnalyticDistribution::standard_gaussian(3), flat);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientRank);
    EXPECT_NE(e.context_value("hypothesis").find("H2"), std::string::npos);
  }
  EXPECT_THROW((void)run_verdict(gaussian_sequence(2), AnalyticDistribution::standard_gaussian(3), VerdictConfig{}), Error);
}

TEST(VerdictConfig, Validation) {
  VerdictConfig c;
  c.n_directions = 1;
  EXPECT_THROW(c.validate(2), Error);
  c = VerdictConfig{};
  c.carleman_order = 4;
  EXPECT_THROW(c.validate(2), Error);
  c = VerdictConfig{};
  c.epsilon = 1.0;
  EXPECT_THROW(c.validate(2), Error);
}

}  // namespace
}  // namespace cwkit
