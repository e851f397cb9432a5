#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cwkit/directions.hpp"
#include "cwkit/gallery.hpp"
#include "cwkit/multi_index.hpp"
#include "cwkit/projections.hpp"

namespace cwkit {

enum class SampleFormat { Auto, Csv, Ndjson };

/// Comma-separated rows of decimal floats with an optional single header row.
/// Throws ParseError (with line/column context) or RaggedRows (with line).
[[nodiscard]] SampleSet parse_csv_samples(std::string_view text, std::string label = {});
/// One JSON array of numbers per line; blank lines skipped.
[[nodiscard]] SampleSet parse_ndjson_samples(std::string_view text, std::string label = {});
/// Auto picks NDJSON for .ndjson/.jsonl extensions and CSV otherwise. Label is the file stem.
[[nodiscard]] SampleSet read_samples(const std::filesystem::path& path, SampleFormat format = SampleFormat::Auto);

/// Rows of d coordinates followed by a weight column.
[[nodiscard]] AtomicMeasure parse_atomic_csv(std::string_view text);
[[nodiscard]] AtomicMeasure read_atomic_csv(const std::filesystem::path& path);

[[nodiscard]] std::vector<Direction> parse_directions_csv(std::string_view text);

/// %.17g, the round-trip precision used by every CSV writer.
[[nodiscard]] std::string format_double(double value);

[[nodiscard]] std::string directions_csv(std::span<const Direction> directions);
[[nodiscard]] std::string samples_csv(const SampleSet& samples);
[[nodiscard]] std::string atomic_csv(const AtomicMeasure& measure);
/// Header "value,weight".
[[nodiscard]] std::string projected_csv(const Projected1D& projected);
/// Header "direction_id,n,distance" with n the sample size of each sequence element.
[[nodiscard]] std::string traces_csv(std::span<const DistanceTrace> traces);
/// Header "a1,...,ad,value", orders ascending, grlex within an order.
[[nodiscard]] std::string mixed_moments_csv(const MixedMoments& moments);

[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames over the destination.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// 64-bit FNV-1a over the sample's coordinates, as 16 hex digits.
[[nodiscard]] std::string fingerprint(const SampleSet& samples);
[[nodiscard]] std::string fingerprint(const AnalyticDistribution& dist);

}  // namespace cwkit
