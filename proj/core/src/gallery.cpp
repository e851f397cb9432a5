#include "cwkit/gallery.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "cwkit/error.hpp"
#include "cwkit/rng.hpp"

namespace cwkit {
namespace {

// Sum over partial pairings of `coords`: paired entries contribute a covariance,
// unpaired entries contribute a mean.
double pairing_sum(const Gaussian& g, std::vector<int>& coords, std::vector<bool>& used, std::size_t start) {
  std::size_t first = start;
  while (first < coords.size() && used[first]) ++first;
  if (first == coords.size()) return 1.0;
  used[first] = true;
  const auto i = coords[first];
  double total = g.mean(i) == 0.0 ? 0.0 : g.mean(i) * pairing_sum(g, coords, used, first + 1);
  for (std::size_t k = first + 1; k < coords.size(); ++k) {
    if (used[k]) continue;
    const double c = g.covariance(i, coords[k]);
    if (c == 0.0) continue;
    used[k] = true;
    total += c * pairing_sum(g, coords, used, first + 1);
    used[k] = false;
  }
  used[first] = false;
  return total;
}

bool parallel(const std::vector<long long>& a, const std::vector<long long>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if (a[i] * b[j] - a[j] * b[i] != 0) return false;
    }
  }
  return true;
}

std::vector<Direction> orthogonal_directions(const std::vector<long long>& v) {
  const auto d = v.size();
  if (d == 2) {
    const std::vector<double> r{-static_cast<double>(v[1]), static_cast<double>(v[0])};
    return {Direction::normalized(r)};
  }
  Eigen::RowVectorXd row(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) row(static_cast<Eigen::Index>(i)) = static_cast<double>(v[i]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(row, Eigen::ComputeFullV);
  std::vector<Direction> out;
  for (Eigen::Index c = 1; c < static_cast<Eigen::Index>(d); ++c) {
    out.push_back(Direction::normalized(Eigen::VectorXd(svd.matrixV().col(c))));
  }
  return out;
}

}  // namespace

AnalyticDistribution AnalyticDistribution::gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance) {
  const auto d = mean.size();
  if (d < 1 || covariance.rows() != d || covariance.cols() != d) {
    throw Error(ErrorKind::DimensionMismatch, "Gaussian mean and covariance shapes differ");
  }
  if (!mean.allFinite() || !covariance.allFinite()) {
    throw Error(ErrorKind::NonFinite, "Gaussian parameters must be finite");
  }
  if (!covariance.isApprox(covariance.transpose(), 1e-12)) {
    throw Error(ErrorKind::InvalidArgument, "covariance must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 1e-10)) {
    throw Error(ErrorKind::InvalidArgument, "covariance must be positive definite (min eigenvalue > 1e-10)");
  }
  return AnalyticDistribution(Gaussian{std::move(mean), std::move(covariance)});
}

AnalyticDistribution AnalyticDistribution::standard_gaussian(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return gaussian(Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d));
}

AnalyticDistribution AnalyticDistribution::product_lognormal(Eigen::VectorXd mu, Eigen::VectorXd sigma) {
  if (mu.size() < 1 || mu.size() != sigma.size()) {
    throw Error(ErrorKind::DimensionMismatch, "lognormal mu and sigma lengths differ");
  }
  if (!mu.allFinite() || !sigma.allFinite()) throw Error(ErrorKind::NonFinite, "lognormal parameters must be finite");
  if (!(sigma.minCoeff() > 0.0)) throw Error(ErrorKind::InvalidArgument, "lognormal sigma must be positive");
  return AnalyticDistribution(ProductLognormal{std::move(mu), std::move(sigma)});
}

AnalyticDistribution AnalyticDistribution::atomic(AtomicMeasure measure) {
  return AnalyticDistribution(std::move(measure));
}

std::size_t AnalyticDistribution::dim() const noexcept {
  if (const auto* g = std::get_if<Gaussian>(&law_)) return static_cast<std::size_t>(g->mean.size());
  if (const auto* l = std::get_if<ProductLognormal>(&law_)) return static_cast<std::size_t>(l->mu.size());
  return std::get<AtomicMeasure>(law_).dim();
}

std::string AnalyticDistribution::family() const {
  if (std::holds_alternative<Gaussian>(law_)) return "gaussian";
  if (std::holds_alternative<ProductLognormal>(law_)) return "lognormal";
  return "atomic";
}

SampleSet sample(const AnalyticDistribution& dist, std::size_t n, std::uint64_t seed, std::string label) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "sample size must be >= 1");
  const auto d = static_cast<Eigen::Index>(dist.dim());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), d);
  if (const auto* g = std::get_if<Gaussian>(&dist.law())) {
    const Eigen::MatrixXd l = g->covariance.llt().matrixL();
    Eigen::VectorXd z(d);
    for (std::size_t r = 0; r < n; ++r) {
      Stream s(seed, r);
      for (Eigen::Index c = 0; c < d; ++c) z(c) = s.normal();
      x.row(static_cast<Eigen::Index>(r)) = (g->mean + l * z).transpose();
    }
  } else if (const auto* ln = std::get_if<ProductLognormal>(&dist.law())) {
    for (std::size_t r = 0; r < n; ++r) {
      Stream s(seed, r);
      for (Eigen::Index c = 0; c < d; ++c) {
        x(static_cast<Eigen::Index>(r), c) = std::exp(ln->mu(c) + ln->sigma(c) * s.normal());
      }
    }
  } else {
    const auto& a = std::get<AtomicMeasure>(dist.law());
    std::vector<double> cumulative(a.size());
    std::partial_sum(a.weights().begin(), a.weights().end(), cumulative.begin());
    for (std::size_t r = 0; r < n; ++r) {
      Stream s(seed, r);
      const double target = s.uniform() * cumulative.back();
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
      const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), a.size() - 1);
      x.row(static_cast<Eigen::Index>(r)) = a.points()[k].transpose();
    }
  }
  return SampleSet(std::move(x), std::move(label));
}

double mixed_moment_oracle(const AnalyticDistribution& dist, const MultiIndex& alpha) {
  if (alpha.dim() != dist.dim()) throw Error(ErrorKind::DimensionMismatch, "multi-index dimension differs");
  if (const auto* g = std::get_if<Gaussian>(&dist.law())) {
    if (alpha.order() > kGaussianOracleMaxOrder) {
      throw Error(ErrorKind::OrderExceeded, "Gaussian moment oracle is capped at order 8")
          .with("order", std::to_string(alpha.order()));
    }
    std::vector<int> coords;
    for (std::size_t i = 0; i < alpha.dim(); ++i) {
      for (int k = 0; k < alpha[i]; ++k) coords.push_back(static_cast<int>(i));
    }
    std::vector<bool> used(coords.size(), false);
    return pairing_sum(*g, coords, used, 0);
  }
  if (const auto* ln = std::get_if<ProductLognormal>(&dist.law())) {
    double log_value = 0.0;
    for (std::size_t i = 0; i < alpha.dim(); ++i) {
      const double a = alpha[i];
      const auto ii = static_cast<Eigen::Index>(i);
      log_value += a * ln->mu(ii) + 0.5 * a * a * ln->sigma(ii) * ln->sigma(ii);
    }
    return std::exp(log_value);
  }
  const auto& a = std::get<AtomicMeasure>(dist.law());
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    total += a.weights()[k] * alpha.monomial({a.points()[k].data(), a.dim()});
  }
  return total;
}

MixedMoments mixed_moment_table(const AnalyticDistribution& dist, int max_order) {
  MixedMoments table(dist.dim(), max_order);
  for (int m = 1; m <= max_order; ++m) {
    const auto indices = multi_indices(dist.dim(), m);
    auto values = table.order_values(m);
    for (std::size_t k = 0; k < indices.size(); ++k) values[k] = mixed_moment_oracle(dist, indices[k]);
  }
  return table;
}

SwitchingPair switching_pair(std::span<const std::vector<long long>> lattice_directions) {
  if (lattice_directions.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one lattice direction");
  const auto d = lattice_directions.front().size();
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "lattice directions need dimension >= 2");
  for (std::size_t j = 0; j < lattice_directions.size(); ++j) {
    const auto& v = lattice_directions[j];
    if (v.size() != d) throw Error(ErrorKind::DimensionMismatch, "lattice directions differ in dimension");
    if (std::all_of(v.begin(), v.end(), [](long long c) { return c == 0; })) {
      throw Error(ErrorKind::InvalidArgument, "lattice directions must be nonzero");
    }
    for (std::size_t k = 0; k < j; ++k) {
      if (parallel(v, lattice_directions[k])) {
        throw Error(ErrorKind::InvalidArgument, "lattice directions must be pairwise non-parallel")
            .with("first", std::to_string(k))
            .with("second", std::to_string(j));
      }
    }
  }

  // Signed measure with integer coefficients; cancelling atoms drop out.
  std::map<std::vector<long long>, long long> signed_measure{{std::vector<long long>(d, 0), 1}};
  for (const auto& v : lattice_directions) {
    std::map<std::vector<long long>, long long> next;
    for (const auto& [point, coeff] : signed_measure) {
      next[point] += coeff;
      auto shifted = point;
      for (std::size_t i = 0; i < d; ++i) shifted[i] += v[i];
      next[shifted] -= coeff;
    }
    std::erase_if(next, [](const auto& kv) { return kv.second == 0; });
    signed_measure = std::move(next);
  }

  long long positive_mass = 0;
  long long negative_mass = 0;
  for (const auto& [point, coeff] : signed_measure) {
    (coeff > 0 ? positive_mass : negative_mass) += std::abs(coeff);
  }
  if (positive_mass == 0 || negative_mass == 0) {
    throw Error(ErrorKind::DegenerateKernel, "switching construction has an empty signed part");
  }

  std::vector<Eigen::VectorXd> p_points, q_points;
  std::vector<double> p_weights, q_weights;
  for (const auto& [point, coeff] : signed_measure) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) x(static_cast<Eigen::Index>(i)) = static_cast<double>(point[i]);
    if (coeff > 0) {
      p_points.push_back(std::move(x));
      p_weights.push_back(static_cast<double>(coeff) / static_cast<double>(positive_mass));
    } else {
      q_points.push_back(std::move(x));
      q_weights.push_back(static_cast<double>(-coeff) / static_cast<double>(negative_mass));
    }
  }

  std::vector<Direction> certified;
  for (const auto& v : lattice_directions) {
    for (auto& u : orthogonal_directions(v)) certified.push_back(std::move(u));
  }
  return {AtomicMeasure(std::move(p_points), std::move(p_weights)),
          AtomicMeasure(std::move(q_points), std::move(q_weights)), std::move(certified)};
}

std::vector<MgfPoint> empirical_mgf(const SampleSet& sample, const Direction& u, std::span<const double> t_grid) {
  if (sample.dim() != u.dim()) throw Error(ErrorKind::DimensionMismatch, "sample and direction dimensions differ");
  const Eigen::VectorXd proj = sample.points() * u.vector();
  const auto n = proj.size();
  const auto top = static_cast<std::size_t>((n + 99) / 100);
  std::vector<MgfPoint> out;
  std::vector<double> terms(static_cast<std::size_t>(n));
  for (const double t : t_grid) {
    if (!std::isfinite(t)) throw Error(ErrorKind::InvalidArgument, "t grid must be finite");
    for (Eigen::Index i = 0; i < n; ++i) terms[static_cast<std::size_t>(i)] = std::exp(t * proj(i));
    const double total = compensated_sum(terms);
    std::nth_element(terms.begin(), terms.begin() + static_cast<std::ptrdiff_t>(top), terms.end(),
                     std::greater<>());
    const double top_sum = compensated_sum(std::span<const double>(terms.data(), top));
    const double value = total / static_cast<double>(n);
    const bool stable = std::isfinite(total) && top_sum <= 0.5 * total;
    out.push_back({t, value, stable});
  }
  return out;
}

}  // namespace cwkit
