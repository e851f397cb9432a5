#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "cwkit/error.hpp"
#include "cwkit/gallery.hpp"
#include "cwkit/io.hpp"
#include "cwkit/report.hpp"

namespace cwkit {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "cwkit-io-test";
  fs::create_directories(dir);
  return dir / name;
}

TEST(Csv, ParsesWithAndWithoutHeader) {
  const auto a = parse_csv_samples("1,2\n3,4\n5,6\n");
  EXPECT_EQ(a.size(), 3u);
  EXPECT_EQ(a.dim(), 2u);
  const auto b = parse_csv_samples("x,y\n1,2\n3.5e-1,-4\n");
  EXPECT_EQ(b.size(), 2u);
  EXPECT_EQ(b.points()(1, 0), 0.35);
}

TEST(Csv, NonNumericCellNamesRowAndColumn) {
  try {
    (void)parse_csv_samples("1,2\n3,abc\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_EQ(e.context_value("line"), "2");
    EXPECT_EQ(e.context_value("column"), "2");
  }
}

TEST(Csv, RaggedRows) {
  try {
    (void)parse_csv_samples("1,2\n3,4,5\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RaggedRows);
    EXPECT_EQ(e.context_value("line"), "2");
  }
}

TEST(Ndjson, ArraysOfLengthThree) {
  const auto s = parse_ndjson_samples("[1,2,3]\n[4,5,6]\n");
  EXPECT_EQ(s.dim(), 3u);
  EXPECT_EQ(s.size(), 2u);
  EXPECT_THROW((void)parse_ndjson_samples("[1,2]\n{\"a\":1}\n"), Error);
}

TEST(ReadSamples, LabelIsStemAndFormatFollowsExtension) {
  const auto csv = scratch("alpha.csv");
  const auto nd = scratch("beta.ndjson");
  std::ofstream(csv) << "1,2\n3,4\n";
  std::ofstream(nd) << "[1,2]\n";
  EXPECT_EQ(read_samples(csv).label(), "alpha");
  EXPECT_EQ(read_samples(nd).size(), 1u);
  EXPECT_THROW((void)read_samples(scratch("missing.csv")), Error);
}

TEST(RoundTrip, SamplesAndAtomsSurviveText) {
  const auto s = sample(AnalyticDistribution::standard_gaussian(3), 25, 4);
  EXPECT_EQ(parse_csv_samples(samples_csv(s)).points(), s.points());
  const AtomicMeasure m({Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d(1.0 / 3.0, 5)}, {0.25, 0.75});
  const auto back = parse_atomic_csv(atomic_csv(m));
  EXPECT_EQ(back.points(), m.points());
  EXPECT_EQ(back.weights(), m.weights());
  const auto dirs = sample_uniform(4, 5, 1);
  EXPECT_EQ(parse_directions_csv(directions_csv(dirs)), dirs);
}

TEST(WriteFileAtomic, ReplacesContent) {
  const auto p = scratch("atomic.txt");
  write_file_atomic(p, "first");
  write_file_atomic(p, "second");
  EXPECT_EQ(read_text_file(p), "second");
}

TEST(Fingerprint, SensitiveToContent) {
  const auto a = sample(AnalyticDistribution::standard_gaussian(2), 10, 1);
  const auto b = sample(AnalyticDistribution::standard_gaussian(2), 10, 2);
  EXPECT_EQ(fingerprint(a), fingerprint(a));
  EXPECT_NE(fingerprint(a), fingerprint(b));
}

TEST(ErrorJson, CarriesKindAndContext) {
  const auto e = Error(ErrorKind::RankDeficient, "too few").with("rank", "2");
  const auto j = error_json(e);
  EXPECT_NE(j.find("\"RankDeficient\""), std::string::npos);
  EXPECT_NE(j.find("\"rank\""), std::string::npos);
}

}  // namespace
}  // namespace cwkit
