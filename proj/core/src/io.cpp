#include "cwkit/io.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <cstring>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cwkit/error.hpp"

namespace cwkit {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_number(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    cells.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

// Numeric rows of a CSV document; the first non-blank row may be a header of non-numeric cells.
std::vector<std::vector<double>> parse_csv_table(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::size_t line_no = 0;
  bool seen_first = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    std::vector<double> row(cells.size());
    std::size_t bad_column = 0;
    std::size_t numeric = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (parse_number(cells[c], row[c])) {
        ++numeric;
      } else if (bad_column == 0) {
        bad_column = c + 1;
      }
    }
    const bool first = !seen_first;
    seen_first = true;
    if (first && numeric == 0) continue;  // header
    if (bad_column != 0) {
      throw Error(ErrorKind::ParseError, "non-numeric cell at line " + std::to_string(line_no) + ", column " +
                                             std::to_string(bad_column))
          .with("line", std::to_string(line_no))
          .with("column", std::to_string(bad_column));
    }
    if (rows.empty()) {
      width = row.size();
    } else if (row.size() != width) {
      throw Error(ErrorKind::RaggedRows, "row width differs at line " + std::to_string(line_no))
          .with("line", std::to_string(line_no))
          .with("expected", std::to_string(width))
          .with("actual", std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::ParseError, "no data rows");
  return rows;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

std::string join_row(std::span<const double> values) {
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line += ',';
    line += format_double(values[i]);
  }
  return line;
}

class Fnv1a {
 public:
  void add(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  void add(double v) {
    // Canonical little-endian bit pattern.
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
    add(bytes, 8);
  }
  void add(std::string_view s) { add(s.data(), s.size()); }
  [[nodiscard]] std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_));
    return buf;
  }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

SampleSet parse_csv_samples(std::string_view text, std::string label) {
  return SampleSet(to_matrix(parse_csv_table(text)), std::move(label));
}

SampleSet parse_ndjson_samples(std::string_view text, std::string label) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_array() || j.empty()) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + " is not a nonempty JSON array")
          .with("line", std::to_string(line_no));
    }
    std::vector<double> row;
    for (std::size_t c = 0; c < j.size(); ++c) {
      if (!j[c].is_number()) {
        throw Error(ErrorKind::ParseError, "non-numeric entry at line " + std::to_string(line_no) + ", column " +
                                               std::to_string(c + 1))
            .with("line", std::to_string(line_no))
            .with("column", std::to_string(c + 1));
      }
      row.push_back(j[c].get<double>());
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorKind::RaggedRows, "row width differs at line " + std::to_string(line_no))
          .with("line", std::to_string(line_no));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::ParseError, "no data rows");
  return SampleSet(to_matrix(rows), std::move(label));
}

SampleSet read_samples(const std::filesystem::path& path, SampleFormat format) {
  if (format == SampleFormat::Auto) {
    const auto ext = path.extension().string();
    format = (ext == ".ndjson" || ext == ".jsonl") ? SampleFormat::Ndjson : SampleFormat::Csv;
  }
  const auto text = read_text_file(path);
  try {
    return format == SampleFormat::Ndjson ? parse_ndjson_samples(text, path.stem().string())
                                          : parse_csv_samples(text, path.stem().string());
  } catch (Error& e) {
    e.with("path", path.string());
    throw;
  }
}

AtomicMeasure parse_atomic_csv(std::string_view text) {
  const auto rows = parse_csv_table(text);
  if (rows.front().size() < 2) throw Error(ErrorKind::ParseError, "atomic CSV needs coordinates and a weight column");
  std::vector<Eigen::VectorXd> points;
  std::vector<double> weights;
  for (const auto& row : rows) {
    points.emplace_back(Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size() - 1)));
    weights.push_back(row.back());
  }
  return AtomicMeasure(std::move(points), std::move(weights));
}

AtomicMeasure read_atomic_csv(const std::filesystem::path& path) { return parse_atomic_csv(read_text_file(path)); }

std::vector<Direction> parse_directions_csv(std::string_view text) {
  std::vector<Direction> out;
  for (const auto& row : parse_csv_table(text)) {
    // Rows already on the sphere are kept bit-exact so written directions read back unchanged.
    const double norm = std::sqrt(std::inner_product(row.begin(), row.end(), row.begin(), 0.0));
    out.push_back(std::abs(norm - 1.0) <= kUnitNormTolerance ? Direction(row) : Direction::normalized(row));
  }
  return out;
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string directions_csv(std::span<const Direction> directions) {
  std::string out;
  if (!directions.empty()) {
    for (std::size_t i = 0; i < directions.front().dim(); ++i) out += (i ? ",u" : "u") + std::to_string(i + 1);
    out += '\n';
  }
  for (const auto& u : directions) out += join_row(u.coords()) + '\n';
  return out;
}

std::string samples_csv(const SampleSet& samples) {
  std::string out;
  for (std::size_t i = 0; i < samples.dim(); ++i) out += (i ? ",x" : "x") + std::to_string(i + 1);
  out += '\n';
  const auto& x = samples.points();
  std::vector<double> row(samples.dim());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) row[static_cast<std::size_t>(c)] = x(r, c);
    out += join_row(row) + '\n';
  }
  return out;
}

std::string atomic_csv(const AtomicMeasure& measure) {
  std::string out;
  for (std::size_t i = 0; i < measure.dim(); ++i) out += "x" + std::to_string(i + 1) + ",";
  out += "weight\n";
  for (std::size_t k = 0; k < measure.size(); ++k) {
    const auto& p = measure.points()[k];
    out += join_row({p.data(), static_cast<std::size_t>(p.size())}) + ',' + format_double(measure.weights()[k]) + '\n';
  }
  return out;
}

std::string projected_csv(const Projected1D& projected) {
  std::string out = "value,weight\n";
  for (const auto& a : projected.atoms()) out += format_double(a.value) + ',' + format_double(a.weight) + '\n';
  return out;
}

std::string traces_csv(std::span<const DistanceTrace> traces) {
  std::string out = "direction_id,n,distance\n";
  for (std::size_t i = 0; i < traces.size(); ++i) {
    for (const auto& e : traces[i].entries) {
      out += std::to_string(i) + ',' + std::to_string(e.sample_size) + ',' + format_double(e.distance) + '\n';
    }
  }
  return out;
}

std::string mixed_moments_csv(const MixedMoments& moments) {
  std::string out;
  for (std::size_t i = 0; i < moments.dim(); ++i) out += "a" + std::to_string(i + 1) + ",";
  out += "value\n";
  for (int m = 0; m <= moments.max_order(); ++m) {
    const auto indices = multi_indices(moments.dim(), m);
    const auto values = moments.order_values(m);
    for (std::size_t k = 0; k < indices.size(); ++k) {
      for (const int a : indices[k].exponents()) out += std::to_string(a) + ',';
      out += format_double(values[k]) + '\n';
    }
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open file").with("path", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write file").with("path", tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::IoError, "write failed").with("path", tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::IoError, "rename failed: " + ec.message()).with("path", path.string());
}

std::string fingerprint(const SampleSet& samples) {
  Fnv1a h;
  const auto& x = samples.points();
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) h.add(x(r, c));
  }
  return h.hex();
}

std::string fingerprint(const AnalyticDistribution& dist) {
  Fnv1a h;
  h.add(dist.family());
  if (const auto* g = std::get_if<Gaussian>(&dist.law())) {
    for (const double v : g->mean) h.add(v);
    for (Eigen::Index i = 0; i < g->covariance.size(); ++i) h.add(g->covariance.data()[i]);
  } else if (const auto* l = std::get_if<ProductLognormal>(&dist.law())) {
    for (const double v : l->mu) h.add(v);
    for (const double v : l->sigma) h.add(v);
  } else {
    const auto& a = std::get<AtomicMeasure>(dist.law());
    for (std::size_t k = 0; k < a.size(); ++k) {
      for (const double v : a.points()[k]) h.add(v);
      h.add(a.weights()[k]);
    }
  }
  return h.hex();
}

}  // namespace cwkit
