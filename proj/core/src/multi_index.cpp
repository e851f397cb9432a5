#include "cwkit/multi_index.hpp"

#include <limits>
#include <string>

#include "cwkit/error.hpp"

namespace cwkit {
namespace {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // r * (n - k + i) / i stays integral at each step.
    const std::uint64_t factor = n - k + i;
    if (r > std::numeric_limits<std::uint64_t>::max() / factor) {
      throw Error(ErrorKind::OrderExceeded, "binomial coefficient overflows 64 bits");
    }
    r = r * factor / i;
  }
  return r;
}

void enumerate(std::size_t pos, int remaining, std::vector<int>& current, std::vector<MultiIndex>& out) {
  if (pos + 1 == current.size()) {
    current[pos] = remaining;
    out.emplace_back(current);
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    current[pos] = v;
    enumerate(pos + 1, remaining - v, current, out);
  }
}

}  // namespace

MultiIndex::MultiIndex(std::vector<int> alpha) : alpha_(std::move(alpha)) {
  if (alpha_.empty()) throw Error(ErrorKind::InvalidArgument, "multi-index needs at least one entry");
  for (const int a : alpha_) {
    if (a < 0) throw Error(ErrorKind::InvalidArgument, "multi-index entries must be nonnegative");
    order_ += a;
  }
}

double MultiIndex::monomial(std::span<const double> x) const noexcept {
  double p = 1.0;
  for (std::size_t i = 0; i < alpha_.size(); ++i) {
    for (int k = 0; k < alpha_[i]; ++k) p *= x[i];
  }
  return p;
}

std::uint64_t homogeneous_dim(std::size_t d, int m) {
  if (d < 1 || m < 0) throw Error(ErrorKind::InvalidArgument, "homogeneous_dim needs d >= 1, m >= 0");
  return binomial(static_cast<std::uint64_t>(m) + d - 1, d - 1);
}

std::vector<MultiIndex> multi_indices(std::size_t d, int m) {
  if (d < 1 || m < 0) throw Error(ErrorKind::InvalidArgument, "multi_indices needs d >= 1, m >= 0");
  std::vector<MultiIndex> out;
  out.reserve(homogeneous_dim(d, m));
  std::vector<int> current(d, 0);
  enumerate(0, m, current, out);
  return out;
}

std::size_t grlex_rank(const MultiIndex& alpha) {
  const auto d = alpha.dim();
  std::size_t rank = 0;
  int remaining = alpha.order();
  for (std::size_t i = 0; i + 1 < d; ++i) {
    // Indices sharing the prefix but with a larger entry at position i come first.
    for (int v = remaining; v > alpha[i]; --v) {
      rank += homogeneous_dim(d - i - 1, remaining - v);
    }
    remaining -= alpha[i];
  }
  return rank;
}

std::uint64_t multinomial(const MultiIndex& alpha) {
  std::uint64_t result = 1;
  std::uint64_t total = 0;
  for (const int a : alpha.exponents()) {
    total += static_cast<std::uint64_t>(a);
    const auto b = binomial(total, static_cast<std::uint64_t>(a));
    if (b != 0 && result > std::numeric_limits<std::uint64_t>::max() / b) {
      throw Error(ErrorKind::OrderExceeded, "multinomial coefficient overflows 64 bits");
    }
    result *= b;
  }
  return result;
}

MixedMoments::MixedMoments(std::size_t dim, int max_order) : dim_(dim), max_order_(max_order) {
  if (dim < 1 || max_order < 0) throw Error(ErrorKind::InvalidArgument, "invalid mixed-moment shape");
  by_order_.resize(static_cast<std::size_t>(max_order) + 1);
  for (int m = 0; m <= max_order; ++m) {
    by_order_[static_cast<std::size_t>(m)].assign(homogeneous_dim(dim, m), 0.0);
  }
  by_order_[0][0] = 1.0;
}

void MixedMoments::check(const MultiIndex& alpha) const {
  if (alpha.dim() != dim_) throw Error(ErrorKind::DimensionMismatch, "multi-index dimension differs");
  if (alpha.order() > max_order_) {
    throw Error(ErrorKind::OrderExceeded, "multi-index order exceeds table order")
        .with("order", std::to_string(alpha.order()))
        .with("max_order", std::to_string(max_order_));
  }
}

double MixedMoments::at(const MultiIndex& alpha) const {
  check(alpha);
  return by_order_[static_cast<std::size_t>(alpha.order())][grlex_rank(alpha)];
}

void MixedMoments::set(const MultiIndex& alpha, double value) {
  check(alpha);
  if (alpha.order() == 0 && value != 1.0) {
    throw Error(ErrorKind::InvalidArgument, "mu_0 of a probability measure is 1");
  }
  by_order_[static_cast<std::size_t>(alpha.order())][grlex_rank(alpha)] = value;
}

std::span<const double> MixedMoments::order_values(int m) const {
  if (m < 0 || m > max_order_) throw Error(ErrorKind::OrderExceeded, "order outside table");
  return by_order_[static_cast<std::size_t>(m)];
}

std::span<double> MixedMoments::order_values(int m) {
  if (m < 0 || m > max_order_) throw Error(ErrorKind::OrderExceeded, "order outside table");
  return by_order_[static_cast<std::size_t>(m)];
}

}  // namespace cwkit
