#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "cwkit/error.hpp"
#include "cwkit/gallery.hpp"
#include "cwkit/moments.hpp"
#include "oracles.hpp"

namespace cwkit {
namespace {

// E prod (mean_i + z_i) expanded over which factors take the centered part.
double isserlis_with_mean(const std::vector<std::size_t>& factors, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  const std::size_t k = factors.size();
  double total = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    std::vector<std::size_t> centered;
    double prefix = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (mask & (1u << i)) {
        centered.push_back(factors[i]);
      } else {
        prefix *= mean[static_cast<Eigen::Index>(factors[i])];
      }
    }
    total += prefix * oracle::isserlis(centered, [&](std::size_t a, std::size_t b) {
      return cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    });
  }
  return total;
}

std::vector<std::size_t> factors_of(const MultiIndex& alpha) {
  std::vector<std::size_t> f;
  for (std::size_t i = 0; i < alpha.dim(); ++i) f.insert(f.end(), static_cast<std::size_t>(alpha[i]), i);
  return f;
}

TEST(Sample, AtomicPointMass) {
  const auto dist = AnalyticDistribution::atomic(AtomicMeasure({Eigen::Vector2d(3, -1)}, {1.0}));
  const auto s = sample(dist, 50, 1);
  for (Eigen::Index r = 0; r < s.points().rows(); ++r) {
    EXPECT_EQ(s.points()(r, 0), 3.0);
    EXPECT_EQ(s.points()(r, 1), -1.0);
  }
}

TEST(Sample, GaussianCovariance) {
  const auto s = sample(AnalyticDistribution::standard_gaussian(3), 100000, 5);
  const Eigen::MatrixXd centered = s.points().rowwise() - s.points().colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(s.size() - 1);
  EXPECT_LT((cov - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 0.05);
}

TEST(Sample, LognormalMedian) {
  const auto dist = AnalyticDistribution::product_lognormal(Eigen::Vector2d::Zero(), Eigen::Vector2d::Ones());
  const auto s = sample(dist, 100000, 6);
  for (Eigen::Index c = 0; c < 2; ++c) {
    std::vector<double> col(s.points().col(c).begin(), s.points().col(c).end());
    std::nth_element(col.begin(), col.begin() + col.size() / 2, col.end());
    EXPECT_NEAR(col[col.size() / 2], 1.0, 0.05);
  }
}

TEST(Sample, DeterministicPerSeed) {
  const auto dist = AnalyticDistribution::standard_gaussian(2);
  EXPECT_EQ(sample(dist, 100, 3).points(), sample(dist, 100, 3).points());
  EXPECT_NE(sample(dist, 100, 3).points(), sample(dist, 100, 4).points());
}

TEST(Distribution, ValidatesParameters) {
  Eigen::Matrix2d bad;
  bad << 1, 2, 2, 1;
  EXPECT_THROW((void)AnalyticDistribution::gaussian(Eigen::Vector2d::Zero(), bad), Error);
  EXPECT_THROW((void)AnalyticDistribution::product_lognormal(Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 0)), Error);
}

TEST(MixedMomentOracle, IsserlisBaseCases) {
  const auto g = AnalyticDistribution::standard_gaussian(2);
  EXPECT_EQ(mixed_moment_oracle(g, MultiIndex({2, 0})), 1.0);
  EXPECT_EQ(mixed_moment_oracle(g, MultiIndex({1, 1})), 0.0);
  EXPECT_EQ(mixed_moment_oracle(g, MultiIndex({4, 0})), 3.0);
}

TEST(MixedMomentOracle, LognormalClosedForm) {
  const auto l = AnalyticDistribution::product_lognormal(Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones());
  EXPECT_NEAR(mixed_moment_oracle(l, MultiIndex({2, 0, 0})), std::exp(2.0), 1e-12);
}

TEST(MixedMomentOracle, AgreesWithPairingEnumeration) {
  Eigen::Matrix3d cov;
  cov << 2.0, 0.3, -0.4, 0.3, 1.0, 0.2, -0.4, 0.2, 1.5;
  const Eigen::Vector3d mean(0.5, -1.0, 0.25);
  const auto g = AnalyticDistribution::gaussian(mean, cov);
  for (int m = 0; m <= kGaussianOracleMaxOrder; ++m) {
    for (const auto& alpha : multi_indices(3, m)) {
      const double expect = isserlis_with_mean(factors_of(alpha), mean, cov);
      EXPECT_NEAR(mixed_moment_oracle(g, alpha), expect, 1e-10 * std::max(1.0, std::abs(expect)));
    }
  }
  EXPECT_THROW((void)mixed_moment_oracle(g, MultiIndex({9, 0, 0})), Error);
}

TEST(MixedMomentOracle, AgreesWithLargeSample) {
  Eigen::Matrix2d cov;
  cov << 1.0, 0.5, 0.5, 2.0;
  const auto g = AnalyticDistribution::gaussian(Eigen::Vector2d(0.2, -0.3), cov);
  const auto s = sample(g, 1000000, 21);
  const auto emp = empirical_mixed_moments(s, 8);
  for (int m = 1; m <= 4; ++m) {
    for (const auto& alpha : multi_indices(2, m)) {
      // Monte-Carlo s.e. from the order-2|a| oracle moment.
      MultiIndex doubled({2 * alpha[0], 2 * alpha[1]});
      const double mu = mixed_moment_oracle(g, alpha);
      const double se = std::sqrt((mixed_moment_oracle(g, doubled) - mu * mu) / static_cast<double>(s.size()));
      EXPECT_NEAR(emp.at(alpha), mu, 5.0 * se + 1e-12);
    }
  }
}

TEST(SwitchingPair, AxisKernel) {
  const std::vector<std::vector<long long>> lattice{{1, 0}, {0, 1}};
  const auto pair = switching_pair(lattice);
  ASSERT_EQ(pair.p.size(), 2u);
  ASSERT_EQ(pair.q.size(), 2u);
  EXPECT_EQ(pair.p.points()[0], Eigen::Vector2d(0, 0));
  EXPECT_EQ(pair.p.points()[1], Eigen::Vector2d(1, 1));
  for (const auto& u : {Direction::axis(2, 0), Direction::axis(2, 1)}) {
    EXPECT_EQ(ks_distance(project(pair.p, u), project(pair.q, u)), 0.0);
  }
}

TEST(SwitchingPair, ExactEqualityAlongCertifiedDirections) {
  const std::vector<std::vector<std::vector<long long>>> kernels{
      {{1, 0}, {0, 1}}, {{1, 0}}, {{1, 2}, {3, -1}, {2, 2}}, {{1, 0, 0}, {0, 1, 0}}, {{1, 1, 0}, {0, 1, 1}, {1, 0, 2}}};
  for (const auto& k : kernels) {
    const auto pair = switching_pair(k);
    EXPECT_FALSE(pair.certified_directions.empty());
    for (const auto& u : pair.certified_directions) {
      const auto a = project(pair.p, u), b = project(pair.q, u);
      ASSERT_EQ(a.size(), b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_NEAR(a.atoms()[i].value, b.atoms()[i].value, 1e-12);
        EXPECT_NEAR(a.atoms()[i].weight, b.atoms()[i].weight, 1e-12);
      }
      EXPECT_EQ(ks_distance(a, b), 0.0);
    }
    // Disjoint supports, equal mass.
    for (const auto& x : pair.p.points()) {
      for (const auto& y : pair.q.points()) EXPECT_GT((x - y).norm(), 0.5);
    }
    double mp = 0.0, mq = 0.0;
    for (const double w : pair.p.weights()) mp += w;
    for (const double w : pair.q.weights()) mq += w;
    EXPECT_NEAR(mp, mq, 1e-12);
  }
}

TEST(SwitchingPair, RejectsDegenerateInput) {
  const std::vector<std::vector<long long>> zero{{0, 0}};
  EXPECT_THROW((void)switching_pair(zero), Error);
  const std::vector<std::vector<long long>> empty;
  EXPECT_THROW((void)switching_pair(empty), Error);
}

TEST(EmpiricalMgf, PointMassIsOne) {
  const SampleSet s(Eigen::MatrixXd::Zero(10, 2));
  const std::vector<double> grid{-1.0, 0.0, 2.0};
  for (const auto& p : empirical_mgf(s, Direction::axis(2, 0), grid)) {
    EXPECT_EQ(p.value, 1.0);
    EXPECT_TRUE(p.stable);
  }
}

TEST(EmpiricalMgf, GaussianStableLognormalUnstable) {
  const std::vector<double> grid{1.0};
  const std::size_t n = 100000;
  const auto g = sample(AnalyticDistribution::standard_gaussian(2), n, 2);
  const auto pg = empirical_mgf(g, Direction::axis(2, 0), grid).front();
  // Var e^Z = e^2 - e.
  EXPECT_NEAR(pg.value, std::exp(0.5), 5.0 * std::sqrt((std::exp(2.0) - std::exp(1.0)) / n));
  EXPECT_TRUE(pg.stable);
  const auto l = sample(AnalyticDistribution::product_lognormal(Eigen::Vector2d::Zero(), Eigen::Vector2d::Ones()), n, 3);
  EXPECT_FALSE(empirical_mgf(l, Direction::axis(2, 0), grid).front().stable);
}

}  // namespace
}  // namespace cwkit
