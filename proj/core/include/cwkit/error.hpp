#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cwkit {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  BudgetExhausted,
  InsufficientRank,
  RankDeficient,
  OrderExceeded,
  NoAnalyticOracle,
  NonFinite,
  ParseError,
  RaggedRows,
  DegenerateKernel,
  IoError,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

/**
 * Library error. Every failure mode named by an operation contract maps to one
 * ErrorKind; `context()` carries structured key/value detail (line numbers,
 * offending orders, the hypothesis a verdict run aborted on) for JSON emission.
 */
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

  [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& context() const noexcept {
    return context_;
  }

  Error& with(std::string key, std::string value) & {
    context_.emplace_back(std::move(key), std::move(value));
    return *this;
  }
  Error&& with(std::string key, std::string value) && {
    context_.emplace_back(std::move(key), std::move(value));
    return std::move(*this);
  }

  /// Value for `key`, or empty when absent.
  [[nodiscard]] std::string context_value(std::string_view key) const;

 private:
  ErrorKind kind_;
  std::vector<std::pair<std::string, std::string>> context_;
};

}  // namespace cwkit
