#pragma once

#include <string>

#include "cwkit/error.hpp"
#include "cwkit/moments.hpp"
#include "cwkit/verdict.hpp"

namespace cwkit {

// JSON renderings with a fixed key order. Non-finite numbers are written as null.

[[nodiscard]] std::string to_json(const VerdictReport& report);
[[nodiscard]] std::string to_json(const CarlemanReport& report);
[[nodiscard]] std::string to_json(const TightnessBox& box);
[[nodiscard]] std::string to_json(const Reconstruction& reconstruction);
/// {"error": kind, "message": ..., "context": {...}} on one line.
[[nodiscard]] std::string error_json(const Error& error);

}  // namespace cwkit
