#include "cwkit/directions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/SVD>

#include "cwkit/error.hpp"
#include "cwkit/rng.hpp"

namespace cwkit {
namespace {

double euclidean_norm(std::span<const double> v) {
  // Scaled to avoid overflow for large finite inputs.
  double scale = 0.0;
  for (const double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double sum = 0.0;
  for (const double x : v) {
    const double r = x / scale;
    sum += r * r;
  }
  return scale * std::sqrt(sum);
}

std::string format_coords(std::span<const double> v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << v[i];
  }
  return os.str();
}

Direction uniform_direction(std::size_t dim, std::uint64_t seed, std::uint64_t index) {
  Stream stream(seed, index);
  std::vector<double> v(dim);
  for (;;) {
    for (auto& x : v) x = stream.normal();
    const double n = euclidean_norm(v);
    if (n > 0.0) {
      for (auto& x : v) x /= n;
      return Direction(std::move(v));
    }
  }
}

bool cap_contains(const Cap& cap, const Direction& u) {
  if (cap.half_angle >= std::numbers::pi) return true;
  return cap.axis.dot(u.coords()) >= std::cos(cap.half_angle);
}

}  // namespace

Direction::Direction(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "direction needs dimension >= 2");
  }
  const double n = euclidean_norm(coords_);
  if (!(std::abs(n - 1.0) <= kUnitNormTolerance)) {
    throw Error(ErrorKind::InvalidArgument, "direction is not unit length")
        .with("norm", std::to_string(n));
  }
}

Direction Direction::normalized(std::span<const double> v) {
  const double n = euclidean_norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorKind::InvalidArgument, "cannot normalize a zero or non-finite vector");
  }
  std::vector<double> out(v.begin(), v.end());
  for (auto& x : out) x /= n;
  return Direction(std::move(out));
}

Direction Direction::normalized(const Eigen::VectorXd& v) {
  return normalized(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

Direction Direction::axis(std::size_t dim, std::size_t i) {
  if (i >= dim) throw Error(ErrorKind::InvalidArgument, "axis index out of range");
  std::vector<double> v(dim, 0.0);
  v[i] = 1.0;
  return Direction(std::move(v));
}

double Direction::dot(std::span<const double> x) const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < coords_.size(); ++i) s += coords_[i] * x[i];
  return s;
}

Region Region::full_sphere(std::size_t dim) {
  if (dim < 2) throw Error(ErrorKind::InvalidArgument, "sphere dimension must be >= 2");
  return Region(FullSphere{dim});
}

Region Region::cap(Direction axis, double half_angle) {
  if (!(half_angle > 0.0 && half_angle <= std::numbers::pi)) {
    throw Error(ErrorKind::InvalidArgument, "cap half-angle must lie in (0, pi]")
        .with("half_angle", std::to_string(half_angle));
  }
  return Region(Cap{std::move(axis), half_angle});
}

Region Region::union_of_caps(std::vector<Cap> caps) {
  if (caps.empty()) throw Error(ErrorKind::InvalidArgument, "union of caps must be nonempty");
  for (const auto& c : caps) {
    if (!(c.half_angle > 0.0 && c.half_angle <= std::numbers::pi)) {
      throw Error(ErrorKind::InvalidArgument, "cap half-angle must lie in (0, pi]");
    }
    if (c.axis.dim() != caps.front().axis.dim()) {
      throw Error(ErrorKind::DimensionMismatch, "caps in a union must share a dimension");
    }
  }
  return Region(UnionOfCaps{std::move(caps)});
}

Region Region::finite_set(std::vector<Direction> points) {
  if (points.empty()) throw Error(ErrorKind::InvalidArgument, "finite direction set must be nonempty");
  for (const auto& p : points) {
    if (p.dim() != points.front().dim()) {
      throw Error(ErrorKind::DimensionMismatch, "finite set directions must share a dimension");
    }
  }
  return Region(FiniteSet{std::move(points)});
}

std::size_t Region::dim() const noexcept {
  struct {
    std::size_t operator()(const FullSphere& s) const { return s.dim; }
    std::size_t operator()(const Cap& c) const { return c.axis.dim(); }
    std::size_t operator()(const UnionOfCaps& u) const { return u.caps.front().axis.dim(); }
    std::size_t operator()(const FiniteSet& f) const { return f.points.front().dim(); }
  } visitor;
  return std::visit(visitor, shape_);
}

bool Region::contains(const Direction& u) const {
  if (u.dim() != dim()) throw Error(ErrorKind::DimensionMismatch, "direction and region dimensions differ");
  struct {
    const Direction& u;
    bool operator()(const FullSphere&) const { return true; }
    bool operator()(const Cap& c) const { return cap_contains(c, u); }
    bool operator()(const UnionOfCaps& s) const {
      return std::any_of(s.caps.begin(), s.caps.end(),
                         [&](const Cap& c) { return cap_contains(c, u); });
    }
    bool operator()(const FiniteSet& f) const {
      return std::any_of(f.points.begin(), f.points.end(), [&](const Direction& p) {
        for (std::size_t i = 0; i < p.dim(); ++i) {
          if (std::abs(p[i] - u[i]) > kUnitNormTolerance) return false;
        }
        return true;
      });
    }
  } visitor{u};
  return std::visit(visitor, shape_);
}

bool Region::has_positive_measure() const noexcept {
  return !std::holds_alternative<FiniteSet>(shape_);
}

std::string Region::describe() const {
  std::ostringstream os;
  os.precision(17);
  auto cap_text = [&](const Cap& c) {
    return "cap:" + format_coords(c.axis.coords()) + ":" + [&] {
      std::ostringstream a;
      a.precision(17);
      a << c.half_angle;
      return a.str();
    }();
  };
  if (const auto* s = std::get_if<FullSphere>(&shape_)) {
    os << "full:" << s->dim;
  } else if (const auto* c = std::get_if<Cap>(&shape_)) {
    os << cap_text(*c);
  } else if (const auto* u = std::get_if<UnionOfCaps>(&shape_)) {
    for (std::size_t i = 0; i < u->caps.size(); ++i) {
      if (i) os << '+';
      os << cap_text(u->caps[i]);
    }
  } else {
    const auto& f = std::get<FiniteSet>(shape_);
    os << "finite:";
    for (std::size_t i = 0; i < f.points.size(); ++i) {
      if (i) os << ';';
      os << format_coords(f.points[i].coords());
    }
  }
  return os.str();
}

double smallest_singular_value(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  return s(s.size() - 1);
}

Frame::Frame(std::vector<Direction> directions) : directions_(std::move(directions)) {
  const auto d = directions_.size();
  if (d < 2) throw Error(ErrorKind::InsufficientRank, "a frame needs at least two directions");
  matrix_.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) {
    if (directions_[j].dim() != d) {
      throw Error(ErrorKind::DimensionMismatch, "frame needs exactly d directions in R^d");
    }
    matrix_.row(static_cast<Eigen::Index>(j)) = directions_[j].vector().transpose();
  }
  min_singular_value_ = smallest_singular_value(matrix_);
  if (!(min_singular_value_ > 0.0)) {
    throw Error(ErrorKind::InsufficientRank, "frame directions are linearly dependent");
  }
}

std::vector<Direction> sample_uniform(std::size_t dim, std::size_t count, std::uint64_t seed) {
  if (dim < 2) throw Error(ErrorKind::InvalidArgument, "sphere dimension must be >= 2");
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "count must be >= 1");
  std::vector<Direction> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(uniform_direction(dim, seed, i));
  return out;
}

std::vector<Direction> sample_in_region(const Region& region, std::size_t count, std::uint64_t seed,
                                        std::size_t max_draw_budget) {
  if (!region.has_positive_measure()) {
    throw Error(ErrorKind::InvalidArgument, "cannot rejection-sample a finite direction set");
  }
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "count must be >= 1");
  std::vector<Direction> out;
  out.reserve(count);
  for (std::size_t draw = 0; draw < max_draw_budget && out.size() < count; ++draw) {
    auto u = uniform_direction(region.dim(), seed, draw);
    if (region.contains(u)) out.push_back(std::move(u));
  }
  if (out.size() < count) {
    throw Error(ErrorKind::BudgetExhausted, "region too small for rejection sampling within budget")
        .with("accepted", std::to_string(out.size()))
        .with("requested", std::to_string(count))
        .with("budget", std::to_string(max_draw_budget));
  }
  return out;
}

double region_measure_estimate(const Region& region, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
  if (std::holds_alternative<FullSphere>(region.shape())) return 1.0;
  if (!region.has_positive_measure()) return 0.0;
  std::size_t inside = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (region.contains(uniform_direction(region.dim(), seed, i))) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(n);
}

Frame extract_frame(std::span<const Direction> candidates, double tau) {
  if (candidates.empty()) throw Error(ErrorKind::InvalidArgument, "no candidate directions");
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be positive");
  const auto d = candidates.front().dim();
  std::vector<Direction> accepted;
  Eigen::MatrixXd rows(0, static_cast<Eigen::Index>(d));
  for (const auto& u : candidates) {
    if (u.dim() != d) throw Error(ErrorKind::DimensionMismatch, "candidate dimensions differ");
    Eigen::MatrixXd trial(rows.rows() + 1, rows.cols());
    trial.topRows(rows.rows()) = rows;
    trial.row(rows.rows()) = u.vector().transpose();
    if (smallest_singular_value(trial) >= tau) {
      rows = std::move(trial);
      accepted.push_back(u);
      if (accepted.size() == d) return Frame(std::move(accepted));
    }
  }
  throw Error(ErrorKind::InsufficientRank,
              "candidates lie numerically near a proper subspace; fewer than d directions accepted")
      .with("accepted", std::to_string(accepted.size()))
      .with("required", std::to_string(d));
}

double frame_constant(const Frame& frame) noexcept { return 1.0 / frame.min_singular_value(); }

}  // namespace cwkit
