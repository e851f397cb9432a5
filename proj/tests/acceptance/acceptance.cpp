// Acceptance gate: one PASS/FAIL line per criterion; exit status is nonzero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "cwkit/error.hpp"
#include "cwkit/gallery.hpp"
#include "cwkit/io.hpp"
#include "cwkit/moments.hpp"
#include "cwkit/report.hpp"
#include "cwkit/rng.hpp"
#include "cwkit/verdict.hpp"
#include "oracles.hpp"

namespace {

using namespace cwkit;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Outcome moment_round_trip() {
  const auto t0 = Clock::now();
  Stream rng(2024, 0);
  double worst = 0.0;
  for (std::size_t d = 2; d <= 4; ++d) {
    for (int m = 1; m <= 6; ++m) {
      MixedMoments truth(d, m);
      for (auto& v : truth.order_values(m)) v = 2.0 * rng.uniform() - 1.0;
      const auto cap = Region::cap(Direction::axis(d, 0), std::numbers::pi / 3);
      std::vector<DirectionalObservation> obs;
      for (const auto& u : sample_in_region(cap, homogeneous_dim(d, m) + 5, 100 * d + m)) {
        obs.push_back({u, mixed_to_directional(truth, u, m)});
      }
      const auto rec = reconstruct_mixed(obs, d, m);
      const auto expect = truth.order_values(m);
      double err = 0.0, scale = 0.0;
      for (std::size_t k = 0; k < expect.size(); ++k) {
        err += std::pow(rec.coefficients[k] - expect[k], 2);
        scale += expect[k] * expect[k];
      }
      worst = std::max(worst, std::sqrt(err / scale));
    }
  }
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-8 && elapsed < 5.0, "max relative error " + fmt(worst) + ", " + fmt(elapsed) + " s"};
}

Outcome carleman_ground_truths() {
  const auto ln = AnalyticDistribution::product_lognormal(Eigen::Vector2d::Zero(), Eigen::Vector2d::Ones());
  const auto u = Direction::axis(2, 0);
  const auto lr = carleman_partial_sums(analytic_directional_moments(ln, u, 60), 30);
  const double ln_sum = lr.partial_sums.back();
  const double ln_oracle = oracle::lognormal_carleman_sum(30);
  const double limit = oracle::lognormal_carleman_limit();

  const auto gr = carleman_partial_sums(analytic_directional_moments(AnalyticDistribution::standard_gaussian(2), u, 200), 100);
  const double g_sum = gr.partial_sums.back();
  const double g_oracle = oracle::gaussian_carleman_sum(100);

  const bool ok = std::abs(ln_sum - limit) <= 1e-5 && std::abs(ln_sum - ln_oracle) <= 1e-12 &&
                  lr.verdict == CarlemanVerdict::Converging && g_sum >= 20.0 && g_sum <= 24.0 &&
                  std::abs(g_sum - g_oracle) <= 1e-9 * g_oracle && gr.verdict == CarlemanVerdict::Diverging;
  return {ok, "lognormal " + fmt(ln_sum) + " (" + std::string(to_string(lr.verdict)) + "), gaussian " + fmt(g_sum) +
                  " vs oracle " + fmt(g_oracle) + " (" + std::string(to_string(gr.verdict)) + ")"};
}

Outcome proof_inequalities() {
  Stream rng(7, 0);
  std::size_t violations = 0, checks = 0;
  for (std::uint64_t f = 0; f < 100; ++f) {
    const std::size_t d = 2 + f % 3;
    const auto frame = extract_frame(sample_uniform(d, d, 500 + f), 1e-3);
    const double c = frame_constant(frame);
    Eigen::MatrixXd pts(10000, static_cast<Eigen::Index>(d));
    for (Eigen::Index r = 0; r < pts.rows(); ++r) {
      const double scale = std::exp(rng.normal());
      for (Eigen::Index k = 0; k < pts.cols(); ++k) pts(r, k) = scale * rng.normal();
    }
    // First inequality evaluated directly, independent of the library's bound check.
    for (Eigen::Index r = 0; r < pts.rows(); ++r) {
      double s = 0.0;
      for (const auto& u : frame.directions()) s += std::abs(u.dot(pts.row(r).transpose()));
      violations += pts.row(r).norm() > c * s * (1 + 1e-12) ? 1 : 0;
      ++checks;
    }
    const SampleSet sample(pts);
    for (int m = 1; m <= 8; ++m) {
      const auto check = absolute_moment_bound_check(sample, frame, m);
      violations += check.pointwise_violations + (check.lhs > check.rhs ? 1 : 0);
      checks += sample.size();
    }
  }
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(checks) + " pointwise checks"};
}

Outcome tightness_holdout() {
  double worst = 1.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto dist = AnalyticDistribution::standard_gaussian(2);
    const std::vector<SampleSet> seq{sample(dist, 10000, 2 * s)};
    const auto frame = extract_frame(sample_uniform(2, 4, s));
    const auto box = tightness_box(seq, frame, 0.1);
    worst = std::min(worst, box.coverage(sample(dist, 10000, 2 * s + 1)));
  }
  return {worst >= 0.8, "minimum hold-out coverage " + fmt(worst) + " over 100 seeds"};
}

Outcome switching_exactness() {
  const std::vector<std::vector<long long>> lattice{{1, 0}, {0, 1}};
  const auto pair = switching_pair(lattice);
  bool exact = true;
  for (const auto& u : pair.certified_directions) {
    const auto a = project(pair.p, u), b = project(pair.q, u);
    exact = exact && a.size() == b.size() && ks_distance(a, b) == 0.0 && wasserstein1(a, b) == 0.0;
    for (std::size_t i = 0; exact && i < a.size(); ++i) {
      exact = std::abs(a.atoms()[i].value - b.atoms()[i].value) <= kMergeTolerance &&
              std::abs(a.atoms()[i].weight - b.atoms()[i].weight) <= kMergeTolerance;
    }
  }
  int separated = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto u = sample_uniform(2, 1, s).front();
    separated += ks_distance(project(pair.p, u), project(pair.q, u)) > 0.2 ? 1 : 0;
  }
  return {exact && separated >= 95, std::string(exact ? "exact" : "NOT exact") + " on certified directions, KS > 0.2 for " +
                                        std::to_string(separated) + "/100 random directions"};
}

std::vector<SampleSet> gaussian_sequence() {
  std::vector<SampleSet> seq;
  for (std::size_t n : {100u, 1000u, 10000u}) seq.push_back(sample(AnalyticDistribution::standard_gaussian(2), n, 7 * n + 1));
  return seq;
}

Outcome end_to_end() {
  std::string detail;
  bool ok = true;
  auto timed = [&](const std::string& name, OverallVerdict want, const std::function<VerdictReport()>& f,
                   const std::string& flag = {}) {
    const auto t0 = Clock::now();
    const auto report = f();
    const double elapsed = seconds_since(t0);
    const bool flagged = flag.empty() || std::find(report.flags.begin(), report.flags.end(), flag) != report.flags.end();
    ok = ok && report.overall == want && flagged && elapsed < 60.0;
    detail += (detail.empty() ? "" : "; ") + name + " -> " + std::string(to_string(report.overall)) + " in " + fmt(elapsed) + " s";
  };
  VerdictConfig c;
  c.seed = 11;
  timed("gaussian", OverallVerdict::ConsistentWithConvergence,
        [&] { return run_verdict(gaussian_sequence(), AnalyticDistribution::standard_gaussian(2), c); });
  timed("shifted", OverallVerdict::Inconsistent, [&] {
    return run_verdict(gaussian_sequence(), AnalyticDistribution::gaussian(Eigen::Vector2d(1, 0), Eigen::Matrix2d::Identity()), c);
  });
  timed(
      "switching", OverallVerdict::Inconclusive,
      [&] {
        const std::vector<std::vector<long long>> lattice{{1, 0}, {0, 1}};
        const auto pair = switching_pair(lattice);
        Eigen::MatrixXd pts(2, 2);
        pts.row(0) = pair.p.points()[0].transpose();
        pts.row(1) = pair.p.points()[1].transpose();
        const std::vector<SampleSet> seq{SampleSet(pts), SampleSet(pts), SampleSet(pts)};
        VerdictConfig fc = c;
        fc.region = Region::finite_set(pair.certified_directions);
        return run_verdict(seq, AnalyticDistribution::atomic(pair.q), fc);
      },
      "zero_measure_region");
  return {ok, detail};
}

Outcome rank_law() {
  std::size_t cases = 0, raised = 0;
  for (int m = 1; m <= 6; ++m) {
    const auto dim = static_cast<std::size_t>(homogeneous_dim(2, m));
    for (std::size_t count = 1; count < dim; ++count) {
      const auto distinct = sample_uniform(2, count, 1000 * m + count);
      std::vector<DirectionalObservation> obs;
      for (std::size_t i = 0; i < dim + 5; ++i) obs.push_back({distinct[i % count], 1.0});
      ++cases;
      try {
        (void)reconstruct_mixed(obs, 2, m);
      } catch (const Error& e) {
        raised += e.kind() == ErrorKind::RankDeficient ? 1 : 0;
      }
    }
  }
  return {cases > 0 && raised == cases, std::to_string(raised) + "/" + std::to_string(cases) + " cases raised RankDeficient"};
}

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"cwkit"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome cli_determinism() {
  const auto root = fs::temp_directory_path() / "cwkit-acceptance-determinism";
  fs::remove_all(root);
  const auto p = [&](const std::string& s) { return (root / s).string(); };
  std::string seq;
  for (const int n : {100, 1000, 5000}) {
    cli({"gallery-sample", "--dist", "gaussian:2", "--count", std::to_string(n), "--seed", std::to_string(n), "--out", p("g" + std::to_string(n))});
    seq += (seq.empty() ? "" : ",") + p("g" + std::to_string(n)) + "/samples.csv";
  }
  struct Run {
    std::vector<std::string> args;
    std::vector<std::string> outputs;
  };
  const std::vector<Run> runs{
      {{"verdict", "--sequence", seq, "--target-dist", "gaussian:2", "--reference-size", "20000"}, {"report.json", "traces.csv"}},
      {{"verdict", "--sequence", seq, "--target-dist", "gaussian:2:0.5,0", "--region", "cap:1,1:0.8", "--metric", "w1"},
       {"report.json", "traces.csv"}},
      {{"sample-directions", "--region", "cap:0,0,1:1.0+cap:1,0,0:0.3", "--count", "50"}, {"directions.csv"}},
      {{"trace", "--sequence", seq, "--target", p("g5000/samples.csv"), "--directions", "8"}, {"traces.csv"}},
      {{"tightness", "--sequence", seq, "--epsilon", "0.05"}, {"tightness.json"}},
      {{"counterexample", "--lattice", "1,2;3,-1"}, {"counterexample.json", "p.csv", "q.csv"}},
      {{"gallery-sample", "--dist", "lognormal:3", "--count", "500"}, {"samples.csv"}},
      {{"carleman", "--input", p("g5000/samples.csv"), "--order", "10"}, {"carleman.json"}},
  };
  std::size_t identical = 0, total = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto first = p("run" + std::to_string(i));
    auto args = runs[i].args;
    args.insert(args.end(), {"--out", first});
    const int c1 = cli(args);
    const auto second = p("rerun" + std::to_string(i));
    const int c2 = cli({runs[i].args.front(), "--config", first + "/config.echo", "--out", second});
    for (const auto& f : runs[i].outputs) {
      ++total;
      if (c1 != 2 && c1 == c2 && fs::exists(first + "/" + f) &&
          read_text_file(first + "/" + f) == read_text_file(second + "/" + f)) {
        ++identical;
      }
    }
  }
  return {identical == total, std::to_string(identical) + "/" + std::to_string(total) + " outputs byte-identical on echo re-run"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 moment round trip", moment_round_trip},
      {"2 carleman ground truths", carleman_ground_truths},
      {"3 proof inequalities pointwise", proof_inequalities},
      {"4 tightness hold-out coverage", tightness_holdout},
      {"5 switching-pair exactness", switching_exactness},
      {"6 end-to-end verdicts", end_to_end},
      {"7 rank/dimension law", rank_law},
      {"8 CLI determinism", cli_determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << name << "] " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " acceptance criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
