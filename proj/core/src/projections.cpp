#include "cwkit/projections.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cwkit/error.hpp"

namespace cwkit {
namespace {

void require_dim(std::size_t source, std::size_t direction) {
  if (source != direction) {
    throw Error(ErrorKind::DimensionMismatch, "source and direction dimensions differ")
        .with("source_dim", std::to_string(source))
        .with("direction_dim", std::to_string(direction));
  }
}

// Walks both laws in value order, consuming every atom within kMergeTolerance of the
// smallest pending value as one grid point. `visit(x, Fa, Fb)` sees the CDFs just after x.
template <typename Visit>
void walk_merged_grid(const Projected1D& a, const Projected1D& b, Visit&& visit) {
  const auto& xa = a.atoms();
  const auto& xb = b.atoms();
  std::size_t i = 0;
  std::size_t j = 0;
  double fa = 0.0;
  double fb = 0.0;
  while (i < xa.size() || j < xb.size()) {
    double x;
    if (i == xa.size()) {
      x = xb[j].value;
    } else if (j == xb.size()) {
      x = xa[i].value;
    } else {
      x = std::min(xa[i].value, xb[j].value);
    }
    while (i < xa.size() && xa[i].value <= x + kMergeTolerance) fa += xa[i++].weight;
    while (j < xb.size() && xb[j].value <= x + kMergeTolerance) fb += xb[j++].weight;
    visit(x, fa, fb);
  }
}

}  // namespace

double compensated_sum(std::span<const double> values) noexcept {
  double sum = 0.0;
  double c = 0.0;
  for (const double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

SampleSet::SampleSet(Eigen::MatrixXd points, std::string label)
    : points_(std::move(points)), label_(std::move(label)) {
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw Error(ErrorKind::InvalidArgument, "sample set needs at least one point and one column");
  }
  if (!points_.allFinite()) throw Error(ErrorKind::NonFinite, "sample set contains non-finite entries");
}

AtomicMeasure::AtomicMeasure(std::vector<Eigen::VectorXd> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.empty()) throw Error(ErrorKind::InvalidArgument, "atomic measure needs at least one atom");
  if (points_.size() != weights_.size()) {
    throw Error(ErrorKind::InvalidArgument, "atom and weight counts differ");
  }
  const auto d = points_.front().size();
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "atoms must have dimension >= 1");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].size() != d) throw Error(ErrorKind::DimensionMismatch, "atoms differ in dimension");
    if (!points_[i].allFinite()) throw Error(ErrorKind::NonFinite, "atom has non-finite coordinates");
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
      throw Error(ErrorKind::InvalidArgument, "atom weights must be positive and finite");
    }
  }
  if (std::abs(compensated_sum(weights_) - 1.0) > kMassTolerance) {
    throw Error(ErrorKind::InvalidArgument, "atom weights must sum to 1");
  }
  std::vector<std::size_t> order(points_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto lex_less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(points_[a].begin(), points_[a].end(), points_[b].begin(),
                                        points_[b].end());
  };
  std::sort(order.begin(), order.end(), lex_less);
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (points_[order[k - 1]] == points_[order[k]]) {
      throw Error(ErrorKind::InvalidArgument, "atoms must be pairwise distinct");
    }
  }
}

AtomicMeasure AtomicMeasure::from_samples(const SampleSet& samples) {
  auto lex_less = [](const std::vector<double>& a, const std::vector<double>& b) { return a < b; };
  std::map<std::vector<double>, std::size_t, decltype(lex_less)> counts(lex_less);
  const auto& x = samples.points();
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index c = 0; c < x.cols(); ++c) row[static_cast<std::size_t>(c)] = x(r, c);
    ++counts[row];
  }
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> w;
  const double n = static_cast<double>(samples.size());
  for (const auto& [row, count] : counts) {
    pts.push_back(Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size())));
    w.push_back(static_cast<double>(count) / n);
  }
  return AtomicMeasure(std::move(pts), std::move(w));
}

Projected1D::Projected1D(std::vector<Atom1D> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw Error(ErrorKind::InvalidArgument, "projected law needs at least one atom");
  std::vector<double> w;
  w.reserve(atoms_.size());
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!std::isfinite(atoms_[i].value)) throw Error(ErrorKind::NonFinite, "non-finite atom value");
    if (!(atoms_[i].weight > 0.0)) throw Error(ErrorKind::InvalidArgument, "atom weights must be positive");
    if (i > 0 && !(atoms_[i].value > atoms_[i - 1].value)) {
      throw Error(ErrorKind::InvalidArgument, "atom values must be strictly increasing");
    }
    w.push_back(atoms_[i].weight);
  }
  if (std::abs(compensated_sum(w) - 1.0) > kMassTolerance) {
    throw Error(ErrorKind::InvalidArgument, "projected weights must sum to 1");
  }
}

Projected1D Projected1D::from_weighted(std::vector<Atom1D> values) {
  std::sort(values.begin(), values.end(),
            [](const Atom1D& a, const Atom1D& b) { return a.value < b.value; });
  std::vector<Atom1D> merged;
  double run_start = 0.0;
  for (const auto& v : values) {
    if (!merged.empty() && v.value - run_start <= kMergeTolerance) {
      merged.back().weight += v.weight;
    } else {
      merged.push_back(v);
      run_start = v.value;
    }
  }
  return Projected1D(std::move(merged));
}

double Projected1D::total_mass() const noexcept {
  std::vector<double> w;
  w.reserve(atoms_.size());
  for (const auto& a : atoms_) w.push_back(a.weight);
  return compensated_sum(w);
}

double Projected1D::cdf(double x) const noexcept {
  double f = 0.0;
  for (const auto& a : atoms_) {
    if (a.value > x) break;
    f += a.weight;
  }
  return f;
}

Projected1D project(const SampleSet& source, const Direction& u) {
  require_dim(source.dim(), u.dim());
  const Eigen::VectorXd values = source.points() * u.vector();
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  // Weights are count/n per merged run so the total stays exact up to rounding of each ratio.
  const double n = static_cast<double>(sorted.size());
  std::vector<Atom1D> atoms;
  std::size_t run_begin = 0;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i == sorted.size() || sorted[i] - sorted[run_begin] > kMergeTolerance) {
      atoms.push_back({sorted[run_begin], static_cast<double>(i - run_begin) / n});
      run_begin = i;
    }
  }
  return Projected1D(std::move(atoms));
}

Projected1D project(const AtomicMeasure& source, const Direction& u) {
  require_dim(source.dim(), u.dim());
  std::vector<Atom1D> values;
  values.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    values.push_back({u.dot(source.points()[i]), source.weights()[i]});
  }
  return Projected1D::from_weighted(std::move(values));
}

double ks_distance(const Projected1D& a, const Projected1D& b) {
  double best = 0.0;
  walk_merged_grid(a, b, [&](double, double fa, double fb) { best = std::max(best, std::abs(fa - fb)); });
  return std::min(best, 1.0);
}

double wasserstein1(const Projected1D& a, const Projected1D& b) {
  double total = 0.0;
  bool first = true;
  double prev_x = 0.0;
  double prev_gap = 0.0;
  walk_merged_grid(a, b, [&](double x, double fa, double fb) {
    if (!first) total += prev_gap * (x - prev_x);
    first = false;
    prev_x = x;
    prev_gap = std::abs(fa - fb);
  });
  return total;
}

std::string_view to_string(Metric metric) noexcept { return metric == Metric::KS ? "ks" : "w1"; }

double distance(const Projected1D& a, const Projected1D& b, Metric metric) {
  return metric == Metric::KS ? ks_distance(a, b) : wasserstein1(a, b);
}

DistanceTrace distance_trace(std::span<const SampleSet> sequence, const Projected1D& projected_target,
                             const Direction& u, Metric metric) {
  DistanceTrace trace{u, metric, {}};
  trace.entries.reserve(sequence.size());
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const auto projected = project(sequence[i], u);
    trace.entries.push_back({i, sequence[i].size(), distance(projected, projected_target, metric)});
  }
  return trace;
}

DistanceTrace distance_trace(std::span<const SampleSet> sequence, const SampleSet& target,
                             const Direction& u, Metric metric) {
  return distance_trace(sequence, project(target, u), u, metric);
}

DistanceTrace distance_trace(std::span<const SampleSet> sequence, const AtomicMeasure& target,
                             const Direction& u, Metric metric) {
  return distance_trace(sequence, project(target, u), u, metric);
}

}  // namespace cwkit
