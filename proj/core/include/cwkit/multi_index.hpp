#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cwkit {

/// Exponent vector alpha in N^d with order |alpha| = sum of entries.
class MultiIndex {
 public:
  explicit MultiIndex(std::vector<int> alpha);

  [[nodiscard]] std::size_t dim() const noexcept { return alpha_.size(); }
  [[nodiscard]] int order() const noexcept { return order_; }
  [[nodiscard]] std::span<const int> exponents() const noexcept { return alpha_; }
  [[nodiscard]] int operator[](std::size_t i) const noexcept { return alpha_[i]; }

  /// x^alpha.
  [[nodiscard]] double monomial(std::span<const double> x) const noexcept;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex& a, const MultiIndex& b) { return a.alpha_ <=> b.alpha_; }

 private:
  std::vector<int> alpha_;
  int order_ = 0;
};

/// binom(m + d - 1, d - 1): number of monomials of degree m in d variables.
[[nodiscard]] std::uint64_t homogeneous_dim(std::size_t d, int m);

/// All alpha with |alpha| = m in graded lexicographic order: (m,0,..,0) first, (0,..,0,m) last.
[[nodiscard]] std::vector<MultiIndex> multi_indices(std::size_t d, int m);

/// Position of alpha within multi_indices(alpha.dim(), alpha.order()).
[[nodiscard]] std::size_t grlex_rank(const MultiIndex& alpha);

/// m! / (alpha_1! ... alpha_d!) as an exact integer. Throws OrderExceeded on 64-bit overflow.
[[nodiscard]] std::uint64_t multinomial(const MultiIndex& alpha);

/// Mixed moments mu_alpha for every |alpha| <= max_order, stored order by order in grlex layout.
class MixedMoments {
 public:
  /// All entries zero except mu_0 = 1.
  MixedMoments(std::size_t dim, int max_order);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] int max_order() const noexcept { return max_order_; }

  [[nodiscard]] double at(const MultiIndex& alpha) const;
  void set(const MultiIndex& alpha, double value);

  /// Values of order m in multi_indices(dim, m) order.
  [[nodiscard]] std::span<const double> order_values(int m) const;
  [[nodiscard]] std::span<double> order_values(int m);

 private:
  void check(const MultiIndex& alpha) const;

  std::size_t dim_;
  int max_order_;
  std::vector<std::vector<double>> by_order_;
};

}  // namespace cwkit
