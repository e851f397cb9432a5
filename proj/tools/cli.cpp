#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cwkit/error.hpp"
#include "cwkit/moments.hpp"
#include "cwkit/report.hpp"
#include "cwkit/rng.hpp"

namespace cwkit::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view text, std::string_view what) {
  const std::string s(trim(text));
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::InvalidArgument, "expected a number for " + std::string(what)).with("value", s);
  }
  return v;
}

std::vector<double> to_doubles(std::string_view text, std::string_view what) {
  std::vector<double> out;
  for (const auto& cell : split(text, ',')) out.push_back(to_double(cell, what));
  return out;
}

Eigen::VectorXd broadcast(const std::vector<double>& v, std::size_t dim, std::string_view what) {
  if (v.size() == 1) return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), v.front());
  if (v.size() != dim) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + " needs 1 or D values")
        .with("dim", std::to_string(dim));
  }
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

bool wildcard_match(std::string_view pattern, std::string_view name) {
  if (pattern.empty()) return name.empty();
  if (pattern.front() == '*') {
    for (std::size_t i = 0; i <= name.size(); ++i) {
      if (wildcard_match(pattern.substr(1), name.substr(i))) return true;
    }
    return false;
  }
  if (name.empty()) return false;
  if (pattern.front() == '?' || pattern.front() == name.front()) {
    return wildcard_match(pattern.substr(1), name.substr(1));
  }
  return false;
}

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<std::pair<std::string, std::string>> keys;
};

const std::vector<std::pair<std::string, std::string>> kCommonKeys = {
    {"seed", "Random seed (default: CWKIT_SEED, else fresh entropy; always echoed)"},
    {"out", "Output directory (default: cwkit-out)"},
    {"format", "Input sample format: auto|csv|ndjson"},
};

const std::vector<std::pair<std::string, std::string>> kRegionKeys = {
    {"region", "Direction region A: full | cap:AXIS:ANGLE | cap:..+cap:.. | finite:U;U"},
    {"directions", "Number of directions drawn from A"},
    {"budget", "Maximum rejection-sampling draws"},
};

std::vector<CommandSpec> command_specs() {
  auto with = [](std::vector<std::pair<std::string, std::string>> a,
                 const std::vector<std::pair<std::string, std::string>>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  const std::vector<std::pair<std::string, std::string>> target_keys = {
      {"sequence", "Comma-separated sample files P_1..P_n (wildcards allowed)"},
      {"target", "Target sample file"},
      {"target-dist", "Analytic target, e.g. gaussian:2 or lognormal:2:0:1"},
      {"metric", "ks|w1"},
      {"reference-size", "Reference sample size for continuous analytic targets"},
  };
  return {
      {"sample-directions", "Sample directions uniformly from a region of the sphere",
       with({{"dim", "Dimension d (default: region dimension, else 2)"}, {"count", "Number of directions"}},
            kRegionKeys)},
      {"project", "Project samples (or an atomic measure) onto a direction",
       {{"input", "Sample file"}, {"atomic", "Atomic measure CSV (coordinates + weight)"},
        {"direction", "Direction, comma-separated (normalized)"}}},
      {"trace", "Distance traces of a sequence against a target along sampled directions",
       with(target_keys, kRegionKeys)},
      {"carleman", "Carleman partial sums for a projected law",
       {{"dist", "Analytic law, e.g. gaussian or lognormal"}, {"input", "Sample file"},
        {"dim", "Dimension for --dist without one (default 2)"}, {"direction", "Direction (default e1)"},
        {"order", "Number of Carleman terms M"}, {"carleman-order", "Alias of --order"}}},
      {"reconstruct", "Recover order-m mixed moments from directional moments",
       {{"input", "CSV rows u_1..u_d,value"}, {"order", "Moment order m"}}},
      {"tightness", "Tightness box in frame coordinates",
       with({{"sequence", "Comma-separated sample files"}, {"epsilon", "Mass allowed outside the box"},
             {"tau", "Frame conditioning threshold"}},
            kRegionKeys)},
      {"verdict", "Check every hypothesis and aggregate a verdict",
       with(with(target_keys, kRegionKeys),
            {{"epsilon", "Tightness epsilon"},
             {"moment-order", "Maximum mixed-moment order M"},
             {"carleman-order", "Carleman terms M_c"},
             {"h1-tolerance", "H1 distance tolerance (default 1.36/sqrt(n_min)+0.01)"},
             {"h1-rule", "final_below|monotone_trend"},
             {"tau", "Frame conditioning threshold"},
             {"moment-tolerances", "Per-order absolute tolerances, comma-separated"},
             {"moment-z", "Standard errors allowed per moment when tolerances are automatic"}})},
      {"counterexample", "Switching pair with equal projections along finitely many directions",
       {{"lattice", "Integer kernel vectors, e.g. 1,0;0,1"},
        {"directions", "Random directions for the distinguishing check"}}},
      {"gallery-sample", "Draw samples from an analytic law",
       {{"dist", "Analytic law spec"}, {"count", "Sample size"}}},
  };
}

std::vector<SampleSet> load_sequence(const RunConfig& rc) {
  std::vector<SampleSet> seq;
  for (const auto& p : expand_paths(rc.required("sequence"))) seq.push_back(read_samples(p, rc.format()));
  if (seq.empty()) throw Error(ErrorKind::InvalidArgument, "sequence is empty");
  return seq;
}

Target load_target(const RunConfig& rc, std::size_t dim) {
  if (rc.has("target") && rc.has("target-dist")) {
    throw Error(ErrorKind::InvalidArgument, "give either --target or --target-dist, not both");
  }
  if (rc.has("target")) return read_samples(rc.required("target"), rc.format());
  if (rc.has("target-dist")) return parse_distribution(rc.required("target-dist"), dim);
  throw Error(ErrorKind::InvalidArgument, "a target is required (--target or --target-dist)");
}

void write_output(const RunConfig& rc, const std::string& name, std::string_view content) {
  write_file_atomic(rc.out_dir() / name, content);
}

int cmd_sample_directions(const RunConfig& rc, std::ostream& out) {
  const auto default_dim = rc.integer("dim", 2);
  const Region region = parse_region(rc.text("region", "full"), default_dim);
  const auto count = rc.integer("count", rc.integer("directions", 100));
  const auto dirs = sample_in_region(region, count, rc.seed(), rc.integer("budget", 1'000'000));
  write_output(rc, "directions.csv", directions_csv(dirs));
  out << "wrote " << dirs.size() << " directions\n";
  return kSuccess;
}

int cmd_project(const RunConfig& rc, std::ostream& out) {
  const auto u = Direction::normalized(to_doubles(rc.required("direction"), "direction"));
  Projected1D projected = [&] {
    if (rc.has("atomic")) return project(read_atomic_csv(rc.required("atomic")), u);
    return project(read_samples(rc.required("input"), rc.format()), u);
  }();
  write_output(rc, "projected.csv", projected_csv(projected));
  out << "wrote " << projected.size() << " atoms\n";
  return kSuccess;
}

int cmd_trace(const RunConfig& rc, std::ostream& out) {
  const auto seq = load_sequence(rc);
  const auto target = load_target(rc, seq.front().dim());
  const auto config = rc.verdict_config(seq.front().dim());
  config.validate(seq.front().dim());
  const auto dirs = directions_in_region(config);
  const auto traces = h1_traces(seq, target, dirs, config);
  write_output(rc, "traces.csv", traces_csv(traces));
  write_output(rc, "directions.csv", directions_csv(dirs));
  out << "wrote " << traces.size() << " traces\n";
  return kSuccess;
}

int cmd_carleman(const RunConfig& rc, std::ostream& out) {
  const auto order = static_cast<int>(rc.integer("order", rc.integer("carleman-order", 30)));
  std::optional<MomentSequence> seq;
  if (rc.has("dist")) {
    const auto dist = parse_distribution(rc.required("dist"), rc.integer("dim", 2));
    const auto u = rc.has("direction") ? Direction::normalized(to_doubles(rc.required("direction"), "direction"))
                                       : Direction::axis(dist.dim(), 0);
    seq = analytic_directional_moments(dist, u, 2 * order);
  } else {
    const auto samples = read_samples(rc.required("input"), rc.format());
    const auto u = rc.has("direction") ? Direction::normalized(to_doubles(rc.required("direction"), "direction"))
                                       : Direction::axis(samples.dim(), 0);
    seq = empirical_moments(samples, u, 2 * order, MomentKind::Absolute);
  }
  const auto report = carleman_partial_sums(*seq, order);
  write_output(rc, "carleman.json", to_json(report));
  out << "verdict: " << to_string(report.verdict);
  if (!report.partial_sums.empty()) out << ", partial sum " << format_double(report.partial_sums.back());
  out << '\n';
  return kSuccess;
}

int cmd_reconstruct(const RunConfig& rc, std::ostream& out) {
  const auto table = read_samples(rc.required("input"), rc.format());
  if (table.dim() < 3) throw Error(ErrorKind::InvalidArgument, "observations need d >= 2 direction columns and a value");
  const auto d = table.dim() - 1;
  const auto m = static_cast<int>(rc.integer("order", 2));
  std::vector<DirectionalObservation> obs;
  for (Eigen::Index r = 0; r < table.points().rows(); ++r) {
    const Eigen::VectorXd u = table.points().row(r).head(static_cast<Eigen::Index>(d)).transpose();
    obs.push_back({Direction::normalized(u), table.points()(r, static_cast<Eigen::Index>(d))});
  }
  const auto rec = reconstruct_mixed(obs, d, m);
  std::string csv;
  for (std::size_t i = 0; i < d; ++i) csv += "a" + std::to_string(i + 1) + ",";
  csv += "value\n";
  for (std::size_t k = 0; k < rec.indices.size(); ++k) {
    for (const int a : rec.indices[k].exponents()) csv += std::to_string(a) + ',';
    csv += format_double(rec.coefficients[k]) + '\n';
  }
  write_output(rc, "mixed_moments.csv", csv);
  write_output(rc, "reconstruct.json", to_json(rec));
  out << "recovered " << rec.coefficients.size() << " coefficients, condition " << format_double(rec.condition_number)
      << '\n';
  return kSuccess;
}

int cmd_tightness(const RunConfig& rc, std::ostream& out) {
  const auto seq = load_sequence(rc);
  const auto config = rc.verdict_config(seq.front().dim());
  const auto frame = extract_frame(directions_in_region(config), config.frame_tau);
  const auto box = tightness_box(seq, frame, config.epsilon);
  write_output(rc, "tightness.json", to_json(box));
  out << "half widths:";
  for (const double h : box.half_widths) out << ' ' << format_double(h);
  out << '\n';
  return kSuccess;
}

int cmd_verdict(const RunConfig& rc, std::ostream& out) {
  const auto seq = load_sequence(rc);
  const auto target = load_target(rc, seq.front().dim());
  const auto report = run_verdict(seq, target, rc.verdict_config(seq.front().dim()));
  write_output(rc, "report.json", to_json(report));
  write_output(rc, "traces.csv", traces_csv(report.traces));
  out << "overall_verdict: " << to_string(report.overall) << '\n';
  return report.overall == OverallVerdict::Inconsistent ? kInconsistent : kSuccess;
}

int cmd_counterexample(const RunConfig& rc, std::ostream& out) {
  std::vector<std::vector<long long>> lattice;
  for (const auto& row : split(rc.text("lattice", "1,0;0,1"), ';')) {
    std::vector<long long> v;
    for (const auto& cell : split(row, ',')) {
      const double x = to_double(cell, "lattice");
      if (x != std::floor(x)) throw Error(ErrorKind::InvalidArgument, "lattice entries must be integers");
      v.push_back(static_cast<long long>(x));
    }
    lattice.push_back(std::move(v));
  }
  const auto pair = switching_pair(lattice);
  Json j;
  j["lattice"] = lattice;
  j["p_atoms"] = pair.p.size();
  j["q_atoms"] = pair.q.size();
  Json certified = Json::array();
  for (const auto& u : pair.certified_directions) {
    const auto pp = project(pair.p, u);
    const auto pq = project(pair.q, u);
    Json c;
    c["direction"] = std::vector<double>(u.coords().begin(), u.coords().end());
    c["ks"] = ks_distance(pp, pq);
    c["w1"] = wasserstein1(pp, pq);
    certified.push_back(std::move(c));
  }
  j["certified"] = std::move(certified);
  const auto n_random = rc.integer("directions", 100);
  if (n_random > 0) {
    const auto dirs = sample_uniform(pair.p.dim(), n_random, derive_seed(rc.seed(), "directions"));
    std::vector<double> ks;
    for (const auto& u : dirs) ks.push_back(ks_distance(project(pair.p, u), project(pair.q, u)));
    Json r;
    r["count"] = ks.size();
    r["min_ks"] = *std::min_element(ks.begin(), ks.end());
    r["max_ks"] = *std::max_element(ks.begin(), ks.end());
    r["count_ks_above_0.2"] = std::count_if(ks.begin(), ks.end(), [](double v) { return v > 0.2; });
    j["random_directions"] = std::move(r);
  }
  write_output(rc, "p.csv", atomic_csv(pair.p));
  write_output(rc, "q.csv", atomic_csv(pair.q));
  write_output(rc, "certified_directions.csv", directions_csv(pair.certified_directions));
  write_output(rc, "counterexample.json", j.dump(2) + "\n");
  out << "P has " << pair.p.size() << " atoms, Q has " << pair.q.size() << " atoms\n";
  return kSuccess;
}

int cmd_gallery_sample(const RunConfig& rc, std::ostream& out) {
  const auto dist = parse_distribution(rc.required("dist"), 2);
  const auto n = rc.integer("count", 1000);
  const auto samples = sample(dist, n, rc.seed());
  write_output(rc, "samples.csv", samples_csv(samples));
  out << "wrote " << n << " samples\n";
  return kSuccess;
}

int dispatch(const RunConfig& rc, std::ostream& out) {
  const auto& c = rc.command();
  if (c == "sample-directions") return cmd_sample_directions(rc, out);
  if (c == "project") return cmd_project(rc, out);
  if (c == "trace") return cmd_trace(rc, out);
  if (c == "carleman") return cmd_carleman(rc, out);
  if (c == "reconstruct") return cmd_reconstruct(rc, out);
  if (c == "tightness") return cmd_tightness(rc, out);
  if (c == "verdict") return cmd_verdict(rc, out);
  if (c == "counterexample") return cmd_counterexample(rc, out);
  if (c == "gallery-sample") return cmd_gallery_sample(rc, out);
  throw Error(ErrorKind::InvalidArgument, "unknown subcommand").with("command", c);
}

std::uint64_t parse_seed(std::string_view text) {
  const std::string s(trim(text));
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::InvalidArgument, "seed must be an unsigned 64-bit integer").with("value", s);
  }
  return v;
}

}  // namespace

Settings parse_config_text(std::string_view text) {
  Settings settings;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::ParseError, "config line is not key = value").with("line", std::to_string(line_no));
    }
    const auto key = std::string(trim(line.substr(0, eq)));
    if (key.empty()) throw Error(ErrorKind::ParseError, "empty config key").with("line", std::to_string(line_no));
    settings[key] = std::string(trim(line.substr(eq + 1)));
  }
  return settings;
}

std::string render_config(const std::string& command, const Settings& settings) {
  std::string out = "# cwkit config echo; rerun with: cwkit " + command + " --config <this file>\n";
  out += "command = " + command + "\n";
  for (const auto& [k, v] : settings) out += k + " = " + v + "\n";
  return out;
}

Region parse_region(std::string_view spec, std::size_t default_dim) {
  spec = trim(spec);
  if (spec == "full") return Region::full_sphere(default_dim);
  if (spec.starts_with("full:")) return Region::full_sphere(static_cast<std::size_t>(to_double(spec.substr(5), "dimension")));
  if (spec.starts_with("finite:")) {
    std::vector<Direction> points;
    for (const auto& row : split(spec.substr(7), ';')) points.push_back(Direction::normalized(to_doubles(row, "direction")));
    return Region::finite_set(std::move(points));
  }
  std::vector<Cap> caps;
  for (const auto& part : split(spec, '+')) {
    const auto fields = split(part, ':');
    if (fields.size() != 3 || fields[0] != "cap") {
      throw Error(ErrorKind::InvalidArgument, "region must be full, cap:AXIS:ANGLE, a '+' union of caps, or finite:...")
          .with("region", std::string(spec));
    }
    caps.push_back(Cap{Direction::normalized(to_doubles(fields[1], "cap axis")), to_double(fields[2], "cap angle")});
  }
  if (caps.size() == 1) return Region::cap(caps.front().axis, caps.front().half_angle);
  return Region::union_of_caps(std::move(caps));
}

AnalyticDistribution parse_distribution(std::string_view spec, std::size_t default_dim) {
  const auto fields = split(trim(spec), ':');
  const auto& family = fields.front();
  if (family == "atomic") {
    if (fields.size() < 2) throw Error(ErrorKind::InvalidArgument, "atomic needs a path: atomic:PATH");
    // Paths may themselves contain ':'.
    const auto path = std::string(trim(spec)).substr(7);
    return AnalyticDistribution::atomic(read_atomic_csv(path));
  }
  const std::size_t dim = fields.size() > 1 && !fields[1].empty()
                              ? static_cast<std::size_t>(to_double(fields[1], "dimension"))
                              : default_dim;
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be >= 1");
  const auto d = static_cast<Eigen::Index>(dim);
  if (family == "gaussian") {
    Eigen::VectorXd mean = fields.size() > 2 ? broadcast(to_doubles(fields[2], "mean"), dim, "mean")
                                             : Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(d, d);
    if (fields.size() > 3) {
      const auto c = to_doubles(fields[3], "covariance");
      if (c.size() != dim * dim) throw Error(ErrorKind::DimensionMismatch, "covariance needs D*D values");
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index k = 0; k < d; ++k) cov(i, k) = c[static_cast<std::size_t>(i * d + k)];
      }
    }
    return AnalyticDistribution::gaussian(std::move(mean), std::move(cov));
  }
  if (family == "lognormal") {
    Eigen::VectorXd mu = fields.size() > 2 ? broadcast(to_doubles(fields[2], "mu"), dim, "mu") : Eigen::VectorXd::Zero(d);
    Eigen::VectorXd sigma =
        fields.size() > 3 ? broadcast(to_doubles(fields[3], "sigma"), dim, "sigma") : Eigen::VectorXd::Ones(d);
    return AnalyticDistribution::product_lognormal(std::move(mu), std::move(sigma));
  }
  throw Error(ErrorKind::InvalidArgument, "unknown distribution family").with("dist", std::string(spec));
}

std::vector<fs::path> expand_paths(std::string_view list) {
  std::vector<fs::path> out;
  for (const auto& item : split(list, ',')) {
    if (item.empty()) continue;
    const fs::path p(item);
    const auto name = p.filename().string();
    if (name.find_first_of("*?") == std::string::npos) {
      out.push_back(p);
      continue;
    }
    const auto dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    std::vector<fs::path> matches;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
      if (entry.is_regular_file() && wildcard_match(name, entry.path().filename().string())) {
        matches.push_back(p.has_parent_path() ? dir / entry.path().filename() : entry.path().filename());
      }
    }
    if (matches.empty()) throw Error(ErrorKind::IoError, "pattern matched no files").with("pattern", item);
    std::sort(matches.begin(), matches.end());
    out.insert(out.end(), matches.begin(), matches.end());
  }
  return out;
}

RunConfig::RunConfig(std::string command, Settings settings)
    : command_(std::move(command)), settings_(std::move(settings)) {}

std::string RunConfig::text(const std::string& key, const std::string& fallback) const {
  const auto it = settings_.find(key);
  return it == settings_.end() ? fallback : it->second;
}

std::string RunConfig::required(const std::string& key) const {
  const auto it = settings_.find(key);
  if (it == settings_.end() || it->second.empty()) {
    throw Error(ErrorKind::InvalidArgument, "missing required setting --" + key).with("key", key);
  }
  return it->second;
}

double RunConfig::number(const std::string& key, double fallback) const {
  return has(key) ? to_double(settings_.at(key), key) : fallback;
}

std::uint64_t RunConfig::integer(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const double v = to_double(settings_.at(key), key);
  if (v < 0 || v != std::floor(v)) throw Error(ErrorKind::InvalidArgument, "--" + key + " must be a nonnegative integer");
  return static_cast<std::uint64_t>(v);
}

std::uint64_t RunConfig::seed() const { return parse_seed(required("seed")); }

fs::path RunConfig::out_dir() const { return text("out", "cwkit-out"); }

SampleFormat RunConfig::format() const {
  const auto f = text("format", "auto");
  if (f == "auto") return SampleFormat::Auto;
  if (f == "csv") return SampleFormat::Csv;
  if (f == "ndjson") return SampleFormat::Ndjson;
  throw Error(ErrorKind::InvalidArgument, "format must be auto, csv or ndjson").with("format", f);
}

VerdictConfig RunConfig::verdict_config(std::size_t dim) const {
  VerdictConfig c;
  c.region = parse_region(text("region", "full"), dim);
  c.n_directions = integer("directions", c.n_directions);
  const auto metric = text("metric", "ks");
  if (metric != "ks" && metric != "w1") throw Error(ErrorKind::InvalidArgument, "metric must be ks or w1");
  c.metric = metric == "ks" ? Metric::KS : Metric::W1;
  if (has("h1-tolerance")) c.h1_tolerance = number("h1-tolerance", 0.0);
  const auto rule = text("h1-rule", "final_below");
  if (rule != "final_below" && rule != "monotone_trend") {
    throw Error(ErrorKind::InvalidArgument, "h1-rule must be final_below or monotone_trend");
  }
  c.h1_rule = rule == "final_below" ? H1Rule::FinalBelow : H1Rule::MonotoneTrend;
  c.carleman_order = static_cast<int>(integer("carleman-order", static_cast<std::uint64_t>(c.carleman_order)));
  c.moment_order = static_cast<int>(integer("moment-order", static_cast<std::uint64_t>(c.moment_order)));
  c.epsilon = number("epsilon", c.epsilon);
  c.seed = seed();
  c.frame_tau = number("tau", c.frame_tau);
  c.reference_size = integer("reference-size", c.reference_size);
  c.max_draw_budget = integer("budget", c.max_draw_budget);
  if (has("moment-tolerances")) c.moment_tolerances = to_doubles(required("moment-tolerances"), "moment-tolerances");
  c.moment_z = number("moment-z", c.moment_z);
  return c;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"cwkit: weak-convergence diagnostics from projections along a positive-measure set of directions"};
  app.name("cwkit");
  app.require_subcommand(1);

  const auto specs = command_specs();
  std::map<std::string, Settings> flag_values;
  std::map<std::string, std::string> config_paths;
  std::map<std::string, std::vector<std::pair<std::string, CLI::Option*>>> options;
  for (const auto& spec : specs) {
    auto* sub = app.add_subcommand(spec.name, spec.help);
    sub->add_option("--config", config_paths[spec.name], "Flat key = value config file; flags win");
    auto keys = spec.keys;
    keys.insert(keys.end(), kCommonKeys.begin(), kCommonKeys.end());
    for (const auto& [key, help] : keys) {
      options[spec.name].emplace_back(key, sub->add_option("--" + key, flag_values[spec.name][key], help));
    }
  }

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kSuccess;
    } catch (const CLI::ParseError& e) {
      throw Error(ErrorKind::InvalidArgument, e.what()).with("stage", "command line");
    }

    const auto* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    Settings settings;
    if (!config_paths[command].empty()) {
      settings = parse_config_text(read_text_file(config_paths[command]));
      if (const auto it = settings.find("command"); it != settings.end()) {
        if (it->second != command) {
          throw Error(ErrorKind::InvalidArgument, "config file was written for another subcommand")
              .with("config_command", it->second);
        }
        settings.erase(it);
      }
      for (const auto& [key, value] : settings) {
        const auto& known = options[command];
        if (std::none_of(known.begin(), known.end(), [&](const auto& kv) { return kv.first == key; })) {
          throw Error(ErrorKind::InvalidArgument, "unknown config key for " + command).with("key", key);
        }
      }
    }
    for (const auto& [key, opt] : options[command]) {
      if (opt->count() > 0) settings[key] = flag_values[command][key];
    }
    if (!settings.contains("seed")) {
      if (const char* env = std::getenv("CWKIT_SEED"); env && *env) {
        settings["seed"] = std::to_string(parse_seed(env));
      } else {
        std::random_device rd;
        settings["seed"] = std::to_string((static_cast<std::uint64_t>(rd()) << 32) | rd());
      }
    }
    settings.try_emplace("out", "cwkit-out");

    const RunConfig rc(command, settings);
    (void)rc.seed();
    std::error_code ec;
    fs::create_directories(rc.out_dir(), ec);
    if (ec || !fs::is_directory(rc.out_dir())) {
      throw Error(ErrorKind::IoError, "output directory is not writable").with("out", rc.out_dir().string());
    }
    write_file_atomic(rc.out_dir() / "config.echo", render_config(command, settings));
    return dispatch(rc, out);
  } catch (const Error& e) {
    err << error_json(e) << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << error_json(Error(ErrorKind::InvalidArgument, e.what())) << '\n';
    return kUsageError;
  }
}

}  // namespace cwkit::cli
