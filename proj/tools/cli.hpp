#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cwkit/directions.hpp"
#include "cwkit/gallery.hpp"
#include "cwkit/io.hpp"
#include "cwkit/verdict.hpp"

namespace cwkit::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInconsistent = 1,
  kUsageError = 2,
};

/// Flat key/value settings; keys are long flag names without the leading dashes.
using Settings = std::map<std::string, std::string>;

/// `key = value` lines, `#` starts a comment. Throws ParseError naming the line.
[[nodiscard]] Settings parse_config_text(std::string_view text);
/// Inverse of parse_config_text, keys sorted, with the subcommand as the `command` key.
[[nodiscard]] std::string render_config(const std::string& command, const Settings& settings);

/// full | full:D | cap:AXIS:ANGLE | cap:...+cap:... | finite:U;U;...  (AXIS/U comma-separated, ANGLE radians).
[[nodiscard]] Region parse_region(std::string_view spec, std::size_t default_dim);

/// gaussian[:D[:MEAN[:COV]]] | lognormal[:D[:MU[:SIGMA]]] | atomic:PATH. MEAN, MU, SIGMA are
/// comma lists (a single value broadcasts); COV is D*D row-major.
[[nodiscard]] AnalyticDistribution parse_distribution(std::string_view spec, std::size_t default_dim);

/// Comma-separated paths; a `*` or `?` in the file name expands to sorted matches.
[[nodiscard]] std::vector<std::filesystem::path> expand_paths(std::string_view list);

/**
 * Resolved settings for one subcommand run. Precedence: command-line flags, then the
 * --config file, then CWKIT_SEED (seed only), then built-in defaults. The seed is always
 * resolved to an explicit value so the echoed config reproduces the run.
 */
class RunConfig {
 public:
  RunConfig(std::string command, Settings settings);

  [[nodiscard]] const std::string& command() const noexcept { return command_; }
  [[nodiscard]] const Settings& settings() const noexcept { return settings_; }

  [[nodiscard]] bool has(const std::string& key) const { return settings_.contains(key); }
  [[nodiscard]] std::string text(const std::string& key, const std::string& fallback) const;
  [[nodiscard]] std::string required(const std::string& key) const;
  [[nodiscard]] double number(const std::string& key, double fallback) const;
  [[nodiscard]] std::uint64_t integer(const std::string& key, std::uint64_t fallback) const;

  [[nodiscard]] std::uint64_t seed() const;
  [[nodiscard]] std::filesystem::path out_dir() const;
  [[nodiscard]] SampleFormat format() const;

  /// VerdictConfig for data of dimension `dim`.
  [[nodiscard]] VerdictConfig verdict_config(std::size_t dim) const;

 private:
  std::string command_;
  Settings settings_;
};

/// Entry point: parses argv, dispatches the subcommand, returns an ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cwkit::cli
