#include "cwkit/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "cwkit/error.hpp"

namespace cwkit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LogTerm {
  double log_abs;
  int sign;
};

// Signed log-sum-exp.
LogTerm log_sum(std::span<const LogTerm> terms) {
  double top = -kInf;
  for (const auto& t : terms) {
    if (t.sign != 0) top = std::max(top, t.log_abs);
  }
  if (top == -kInf) return {-kInf, 0};
  double s = 0.0;
  for (const auto& t : terms) {
    if (t.sign != 0) s += t.sign * std::exp(t.log_abs - top);
  }
  if (s == 0.0) return {-kInf, 0};
  return {top + std::log(std::abs(s)), s > 0.0 ? 1 : -1};
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// log((j-1)!!) for even j >= 0: (j-1)!! = j! / (2^{j/2} (j/2)!).
double log_odd_double_factorial(int j) {
  return std::lgamma(j + 1.0) - 0.5 * j * std::log(2.0) - std::lgamma(j / 2 + 1.0);
}

void require_dim(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorKind::DimensionMismatch, "dimensions differ")
        .with("expected", std::to_string(a))
        .with("actual", std::to_string(b));
  }
}

LogTerm gaussian_raw_moment(double mean, double sd, int k) {
  std::vector<LogTerm> terms;
  for (int j = 0; j <= k; j += 2) {
    const int mean_power = k - j;
    if (mean == 0.0 && mean_power > 0) continue;
    const double log_mean = mean_power == 0 ? 0.0 : mean_power * std::log(std::abs(mean));
    const int sign = (mean < 0.0 && mean_power % 2 == 1) ? -1 : 1;
    terms.push_back({log_binomial(k, j) + log_mean + j * std::log(sd) + log_odd_double_factorial(j), sign});
  }
  return log_sum(terms);
}

LogTerm lognormal_directional_moment(const ProductLognormal& ln, const Direction& u, int k) {
  const auto d = u.dim();
  std::vector<LogTerm> terms;
  for (const auto& alpha : multi_indices(d, k)) {
    double log_term = std::lgamma(k + 1.0);
    int sign = 1;
    bool vanishes = false;
    for (std::size_t i = 0; i < d && !vanishes; ++i) {
      const int a = alpha[i];
      if (a == 0) continue;
      if (u[i] == 0.0) {
        vanishes = true;
        break;
      }
      const auto ii = static_cast<Eigen::Index>(i);
      log_term += -std::lgamma(a + 1.0) + a * std::log(std::abs(u[i])) + a * ln.mu(ii) +
                  0.5 * a * a * ln.sigma(ii) * ln.sigma(ii);
      if (u[i] < 0.0 && a % 2 == 1) sign = -sign;
    }
    if (!vanishes) terms.push_back({log_term, sign});
  }
  return log_sum(terms);
}

LogTerm atomic_directional_moment(const AtomicMeasure& a, const Direction& u, int k) {
  std::vector<LogTerm> terms;
  terms.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double v = u.dot(a.points()[i]);
    if (k == 0) {
      terms.push_back({std::log(a.weights()[i]), 1});
    } else if (v != 0.0) {
      terms.push_back({std::log(a.weights()[i]) + k * std::log(std::abs(v)), (v < 0.0 && k % 2 == 1) ? -1 : 1});
    }
  }
  return log_sum(terms);
}

}  // namespace

MomentSequence::MomentSequence(std::vector<double> values, std::vector<double> log_abs, MomentKind kind)
    : values_(std::move(values)), log_abs_(std::move(log_abs)), kind_(kind) {
  validate();
}

void MomentSequence::validate() const {
  if (values_.empty()) throw Error(ErrorKind::InvalidArgument, "moment sequence needs m_0");
  if (std::abs(values_[0] - 1.0) > 1e-12) throw Error(ErrorKind::InvalidArgument, "m_0 must equal 1");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const bool must_be_nonnegative = kind_ == MomentKind::Absolute || k % 2 == 0;
    if (must_be_nonnegative && values_[k] < 0.0) {
      throw Error(ErrorKind::InvalidArgument, "absolute and even raw moments must be nonnegative")
          .with("order", std::to_string(k));
    }
  }
}

MomentSequence MomentSequence::from_values(std::vector<double> values, MomentKind kind) {
  std::vector<double> log_abs(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    log_abs[k] = std::isnan(values[k]) ? values[k] : (values[k] == 0.0 ? -kInf : std::log(std::abs(values[k])));
  }
  return MomentSequence(std::move(values), std::move(log_abs), kind);
}

MomentSequence MomentSequence::from_log_magnitudes(std::vector<double> log_abs, std::vector<int> signs,
                                                   MomentKind kind) {
  if (log_abs.size() != signs.size()) throw Error(ErrorKind::InvalidArgument, "log and sign lengths differ");
  std::vector<double> values(log_abs.size());
  for (std::size_t k = 0; k < log_abs.size(); ++k) {
    if (signs[k] == 0) {
      values[k] = 0.0;
      log_abs[k] = -kInf;
    } else {
      values[k] = signs[k] * std::exp(log_abs[k]);
    }
  }
  return MomentSequence(std::move(values), std::move(log_abs), kind);
}

int reliable_empirical_order(std::size_t sample_size) noexcept {
  return static_cast<int>(std::floor(2.0 * std::pow(static_cast<double>(sample_size), 0.25)));
}

MomentSequence empirical_moments(const Projected1D& proj, int max_order, MomentKind kind) {
  if (max_order < 1) throw Error(ErrorKind::InvalidArgument, "max order must be >= 1");
  std::vector<double> m(static_cast<std::size_t>(max_order) + 1, 0.0);
  m[0] = 1.0;
  for (const auto& atom : proj.atoms()) {
    const double base = kind == MomentKind::Absolute ? std::abs(atom.value) : atom.value;
    double p = atom.weight;
    for (int k = 1; k <= max_order; ++k) {
      p *= base;
      m[static_cast<std::size_t>(k)] += p;
    }
  }
  for (int k = 1; k <= max_order; ++k) {
    if (!std::isfinite(m[static_cast<std::size_t>(k)])) {
      throw Error(ErrorKind::NonFinite, "empirical moment overflowed").with("order", std::to_string(k));
    }
  }
  return MomentSequence::from_values(std::move(m), kind);
}

MomentSequence empirical_moments(const SampleSet& sample, const Direction& u, int max_order, MomentKind kind) {
  auto seq = empirical_moments(project(sample, u), max_order, kind);
  seq.set_reliable_order(reliable_empirical_order(sample.size()));
  return seq;
}

MomentSequence analytic_directional_moments(const AnalyticDistribution& dist, const Direction& u, int max_order) {
  require_dim(dist.dim(), u.dim());
  if (max_order < 0) throw Error(ErrorKind::InvalidArgument, "max order must be >= 0");
  std::vector<double> log_abs(static_cast<std::size_t>(max_order) + 1);
  std::vector<int> signs(log_abs.size());
  for (int k = 0; k <= max_order; ++k) {
    LogTerm t{0.0, 1};
    if (k > 0) {
      if (const auto* g = std::get_if<Gaussian>(&dist.law())) {
        const double mean = u.dot(g->mean);
        const double var = u.vector().dot(g->covariance * u.vector());
        t = gaussian_raw_moment(mean, std::sqrt(var), k);
      } else if (const auto* ln = std::get_if<ProductLognormal>(&dist.law())) {
        t = lognormal_directional_moment(*ln, u, k);
      } else {
        t = atomic_directional_moment(std::get<AtomicMeasure>(dist.law()), u, k);
      }
    }
    log_abs[static_cast<std::size_t>(k)] = t.log_abs;
    signs[static_cast<std::size_t>(k)] = t.sign;
  }
  return MomentSequence::from_log_magnitudes(std::move(log_abs), std::move(signs), MomentKind::Raw);
}

std::string_view to_string(CarlemanVerdict verdict) noexcept {
  switch (verdict) {
    case CarlemanVerdict::Diverging: return "diverging";
    case CarlemanVerdict::Converging: return "converging";
    case CarlemanVerdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

CarlemanReport carleman_partial_sums(const MomentSequence& even_moments, int max_terms) {
  if (max_terms < 1) throw Error(ErrorKind::InvalidArgument, "Carleman order must be >= 1");
  if (even_moments.max_order() < 2 * max_terms) {
    throw Error(ErrorKind::OrderExceeded, "moment sequence too short for requested Carleman order")
        .with("required_order", std::to_string(2 * max_terms))
        .with("available_order", std::to_string(even_moments.max_order()));
  }
  CarlemanReport report;
  report.order = max_terms;
  report.slope_statistic = std::numeric_limits<double>::quiet_NaN();
  if (const auto r = even_moments.reliable_order(); r && 2 * max_terms > *r) report.reliable = false;

  for (int m = 1; m <= max_terms; ++m) {
    if (even_moments.value(2 * m) == 0.0) {
      report.verdict = CarlemanVerdict::Diverging;
      report.terms.clear();
      report.partial_sums.clear();
      report.reason = "zero even moment at order " + std::to_string(2 * m) +
                      ": point mass at 0, compact support";
      return report;
    }
  }

  double sum = 0.0;
  for (int m = 1; m <= max_terms; ++m) {
    const double la = even_moments.log_abs(2 * m);
    if (!std::isfinite(la)) {
      report.verdict = CarlemanVerdict::Inconclusive;
      report.reason = "non-finite moment at order " + std::to_string(2 * m);
      return report;
    }
    const double t = std::exp(-la / (2.0 * m));
    sum += t;
    report.terms.push_back(t);
    report.partial_sums.push_back(sum);
  }

  const int first = (max_terms + 1) / 2;
  const int count = max_terms - first + 1;
  if (count < 2) {
    report.verdict = CarlemanVerdict::Inconclusive;
    report.reason = "too few terms for a tail slope";
    return report;
  }
  double mx = 0.0;
  double my = 0.0;
  for (int m = first; m <= max_terms; ++m) {
    mx += std::log(static_cast<double>(m));
    my += std::log(report.terms[static_cast<std::size_t>(m - 1)]);
  }
  mx /= count;
  my /= count;
  double sxy = 0.0;
  double sxx = 0.0;
  for (int m = first; m <= max_terms; ++m) {
    const double dx = std::log(static_cast<double>(m)) - mx;
    sxy += dx * (std::log(report.terms[static_cast<std::size_t>(m - 1)]) - my);
    sxx += dx * dx;
  }
  const double slope = sxy / sxx;
  report.slope_statistic = slope;
  const double last_increment = report.terms.back();
  if (slope >= -1.0 - kCarlemanSlopeTolerance) {
    report.verdict = CarlemanVerdict::Diverging;
    report.reason = "tail terms decay no faster than 1/m";
  } else if (last_increment < kCarlemanCauchyIncrement) {
    report.verdict = CarlemanVerdict::Converging;
    report.reason = "tail terms decay faster than 1/m and partial sums have settled";
  } else {
    report.verdict = CarlemanVerdict::Inconclusive;
    report.reason = "tail terms decay faster than 1/m but partial sums are still moving";
  }
  return report;
}

double directional_moment(const SampleSet& source, const Direction& u, int m) {
  require_dim(source.dim(), u.dim());
  if (m < 0) throw Error(ErrorKind::InvalidArgument, "moment order must be >= 0");
  if (m == 0) return 1.0;
  const Eigen::VectorXd v = source.points() * u.vector();
  double total = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) total += std::pow(v(i), m);
  return total / static_cast<double>(v.size());
}

double directional_moment(const AtomicMeasure& source, const Direction& u, int m) {
  require_dim(source.dim(), u.dim());
  if (m < 0) throw Error(ErrorKind::InvalidArgument, "moment order must be >= 0");
  if (m == 0) return 1.0;
  double total = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    total += source.weights()[i] * std::pow(u.dot(source.points()[i]), m);
  }
  return total;
}

double directional_moment(const AnalyticDistribution& source, const Direction& u, int m) {
  if (m < 0) throw Error(ErrorKind::InvalidArgument, "moment order must be >= 0");
  if (m == 0) return 1.0;
  if (const auto* a = std::get_if<AtomicMeasure>(&source.law())) return directional_moment(*a, u, m);
  const double value = analytic_directional_moments(source, u, m).value(m);
  if (!std::isfinite(value)) {
    throw Error(ErrorKind::NoAnalyticOracle, "directional moment is not representable in double precision")
        .with("order", std::to_string(m));
  }
  return value;
}

MixedMoments empirical_mixed_moments(const SampleSet& sample, int max_order) {
  const auto d = sample.dim();
  MixedMoments out(d, max_order);
  const auto& x = sample.points();
  const auto n = x.rows();
  // powers(i, k) = x_i^k for the current row.
  Eigen::MatrixXd powers(static_cast<Eigen::Index>(d), max_order + 1);
  std::vector<std::vector<MultiIndex>> indices;
  for (int m = 0; m <= max_order; ++m) indices.push_back(multi_indices(d, m));
  std::vector<std::vector<double>> sums(indices.size());
  for (std::size_t m = 0; m < indices.size(); ++m) sums[m].assign(indices[m].size(), 0.0);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(d); ++i) {
      powers(i, 0) = 1.0;
      for (int k = 1; k <= max_order; ++k) powers(i, k) = powers(i, k - 1) * x(r, i);
    }
    for (int m = 1; m <= max_order; ++m) {
      const auto& idx = indices[static_cast<std::size_t>(m)];
      auto& s = sums[static_cast<std::size_t>(m)];
      for (std::size_t k = 0; k < idx.size(); ++k) {
        double p = 1.0;
        for (std::size_t i = 0; i < d; ++i) p *= powers(static_cast<Eigen::Index>(i), idx[k][i]);
        s[k] += p;
      }
    }
  }
  for (int m = 1; m <= max_order; ++m) {
    auto values = out.order_values(m);
    const auto& s = sums[static_cast<std::size_t>(m)];
    for (std::size_t k = 0; k < s.size(); ++k) values[k] = s[k] / static_cast<double>(n);
  }
  return out;
}

MixedMoments mixed_moments(const AtomicMeasure& measure, int max_order) {
  return mixed_moment_table(AnalyticDistribution::atomic(measure), max_order);
}

double mixed_to_directional(const MixedMoments& mm, const Direction& u, int m) {
  require_dim(mm.dim(), u.dim());
  if (m < 0 || m > mm.max_order()) {
    throw Error(ErrorKind::OrderExceeded, "order exceeds mixed-moment table")
        .with("order", std::to_string(m))
        .with("max_order", std::to_string(mm.max_order()));
  }
  const auto indices = multi_indices(mm.dim(), m);
  const auto values = mm.order_values(m);
  double total = 0.0;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    total += static_cast<double>(multinomial(indices[k])) * indices[k].monomial(u.coords()) * values[k];
  }
  return total;
}

Reconstruction reconstruct_mixed(std::span<const DirectionalObservation> observations, std::size_t d, int m) {
  if (d < 2 || m < 0) throw Error(ErrorKind::InvalidArgument, "reconstruction needs d >= 2 and m >= 0");
  Reconstruction out;
  out.order = m;
  out.indices = multi_indices(d, m);
  const auto cols = static_cast<Eigen::Index>(out.indices.size());
  const auto rows = static_cast<Eigen::Index>(observations.size());
  if (rows == 0) {
    throw Error(ErrorKind::RankDeficient, "no observations")
        .with("rank", "0")
        .with("required", std::to_string(cols));
  }

  Eigen::MatrixXd design(rows, cols);
  Eigen::VectorXd rhs(rows);
  std::vector<double> coefficient(out.indices.size());
  for (std::size_t k = 0; k < out.indices.size(); ++k) coefficient[k] = static_cast<double>(multinomial(out.indices[k]));
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& obs = observations[static_cast<std::size_t>(r)];
    require_dim(d, obs.direction.dim());
    for (Eigen::Index c = 0; c < cols; ++c) {
      design(r, c) = coefficient[static_cast<std::size_t>(c)] *
                     out.indices[static_cast<std::size_t>(c)].monomial(obs.direction.coords());
    }
    rhs(r) = obs.value;
  }

  Eigen::VectorXd scale = design.colwise().norm().transpose();
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (scale(c) == 0.0) scale(c) = 1.0;
  }
  const Eigen::MatrixXd equilibrated = design * scale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(equilibrated, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cutoff = kRankTolerance * s(0);
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) ++rank;
  }
  out.rank = rank;
  if (rank < static_cast<std::size_t>(cols)) {
    throw Error(ErrorKind::RankDeficient,
                "directions lie on the zero set of a nonzero homogeneous form; design is rank deficient")
        .with("rank", std::to_string(rank))
        .with("required", std::to_string(cols));
  }
  out.condition_number = s(0) / s(s.size() - 1);
  const Eigen::VectorXd solution = svd.solve(rhs);
  const Eigen::VectorXd mu = solution.cwiseQuotient(scale);
  out.coefficients.assign(mu.data(), mu.data() + mu.size());
  out.residual_norm = (design * mu - rhs).norm();
  return out;
}

double rm_residual(const MixedMoments& p, const MixedMoments& q, const Direction& u, int m) {
  return mixed_to_directional(q, u, m) - mixed_to_directional(p, u, m);
}

MomentBoundCheck absolute_moment_bound_check(const SampleSet& sample, const Frame& frame, int m) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "moment order must be >= 1");
  require_dim(frame.dim(), sample.dim());
  const double c = frame_constant(frame);
  const double d = static_cast<double>(frame.dim());
  const double factor = std::pow(c, m) * std::pow(d, m - 1);
  const Eigen::MatrixXd coords = sample.points() * frame.matrix().transpose();
  MomentBoundCheck out;
  const auto n = sample.points().rows();
  double lhs_sum = 0.0;
  double proj_sum = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const double lhs = std::pow(sample.points().row(r).norm(), m);
    double proj = 0.0;
    for (Eigen::Index j = 0; j < coords.cols(); ++j) proj += std::pow(std::abs(coords(r, j)), m);
    if (lhs > factor * proj * (1.0 + 1e-12)) ++out.pointwise_violations;
    lhs_sum += lhs;
    proj_sum += proj;
  }
  out.lhs = lhs_sum / static_cast<double>(n);
  out.rhs = factor * proj_sum / static_cast<double>(n);
  return out;
}

}  // namespace cwkit
