#include "cwkit/error.hpp"

namespace cwkit {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::BudgetExhausted: return "BudgetExhausted";
    case ErrorKind::InsufficientRank: return "InsufficientRank";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::OrderExceeded: return "OrderExceeded";
    case ErrorKind::NoAnalyticOracle: return "NoAnalyticOracle";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::RaggedRows: return "RaggedRows";
    case ErrorKind::DegenerateKernel: return "DegenerateKernel";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

std::string Error::context_value(std::string_view key) const {
  for (const auto& [k, v] : context_) {
    if (k == key) return v;
  }
  return {};
}

}  // namespace cwkit
