#include <octoflow/report.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace octoflow;
using report::json;

namespace {

ScanReport small_scan(std::uint64_t seed) { return norm_scan(4.0, Direction::of({0, 1}), 1000, 0.1, seed); }

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Format, SeventeenDigits) {
  EXPECT_EQ(report::format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(report::format_double(1.0), "1.0");
  EXPECT_EQ(report::format_double(-2.5e-300), "-2.5e-300");
  EXPECT_EQ(report::format_double(1.0 / 3.0), "0.33333333333333331");
  EXPECT_EQ(report::format_double(std::numeric_limits<double>::infinity()), "\"inf\"");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1e6, 1e6);
  for (int i = 0; i < 10000; ++i) {
    const double x = U(rng) * std::pow(10.0, static_cast<int>(U(rng)) % 200);
    EXPECT_EQ(std::stod(report::format_double(x)), x);
  }
}

TEST(Dump, SortedKeysAndStableBytes) {
  const std::string a = report::dump(report::to_json(small_scan(7)));
  const std::string b = report::dump(report::to_json(small_scan(7)));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, report::dump(report::to_json(small_scan(8))));
  // keys appear in lexicographic order at the top level
  const json j = json::parse(a);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  std::size_t last = 0;
  for (const auto& k : keys) {
    const std::size_t pos = a.find("\n  \"" + k + "\": ");
    ASSERT_NE(pos, std::string::npos) << k;
    EXPECT_GE(pos, last);
    last = pos;
  }
  EXPECT_NE(a.find("\"seed\": 7"), std::string::npos);
}

TEST(Dump, RoundTripsThroughParser) {
  const json j = report::to_json(small_scan(3));
  const json back = json::parse(report::dump(j));
  EXPECT_EQ(back, j);
  EXPECT_EQ(report::dump(back), report::dump(j));
  // every float survives bit for bit
  const auto& mass = back.at("histogram").at("mass");
  for (std::size_t k = 0; k < mass.size(); ++k) EXPECT_EQ(mass[k].get<double>(), j["histogram"]["mass"][k].get<double>());
}

TEST(Dump, NonFiniteValues) {
  const json j = {{"x", std::numeric_limits<double>::infinity()}, {"y", -std::numeric_limits<double>::infinity()}};
  const json back = json::parse(report::dump(j));
  EXPECT_EQ(report::as_double(back["x"]), std::numeric_limits<double>::infinity());
  EXPECT_EQ(report::as_double(back["y"]), -std::numeric_limits<double>::infinity());
  EXPECT_TRUE(std::isnan(report::as_double(json::parse(report::dump({{"z", std::nan("")}}))["z"])));
}

TEST(Csv, HistogramRowCountEqualsBins) {
  for (int bins : {1, 7, 64}) {
    ScanOptions opt;
    opt.bins = bins;
    const ScanReport r = norm_scan(4.0, Direction::of({0, 1}), 1000, 0.1, 2, opt);
    const std::string csv = report::histogram_csv(r.histogram);
    EXPECT_EQ(count_lines(csv), static_cast<std::size_t>(bins) + 1);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "bin_left,bin_right,mass");
  }
}

TEST(LocusPointJson, RoundTrip) {
  const LocusPoint p = reduce(geodesic(3.0) * horocycle(0.3) * omega1_frame());
  const json j = json::parse(report::dump(report::to_json(p)));
  const LocusPoint q = report::locus_point_from_json(j);
  EXPECT_EQ(q.frame.max_abs_diff(p.frame), 0.0);
  EXPECT_EQ(q.word, p.word);
  EXPECT_EQ(q.certified, p.certified);
}

TEST(SurfaceJson, ExactDescriptor) {
  const json j = report::to_json(omega1_surface());
  EXPECT_EQ(j.at("c_a").get<std::string>(), omega1_surface().c_a.str());
  EXPECT_EQ(QSqrt2::parse(j.at("tw_b").get<std::string>()), omega1_surface().tw_b);
  EXPECT_TRUE(report::to_json(omega1_surface().numeric()).at("h_a").is_number_float());
}

TEST(WriteFile, ReportsPathOnFailure) {
  const auto dir = std::filesystem::temp_directory_path() / "octoflow_report_test";
  std::filesystem::create_directories(dir);
  const std::string ok = (dir / "a.json").string();
  report::write_file(ok, "{}\n");
  std::ifstream in(ok);
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(s, "{}\n");
  const std::string bad = (dir / "missing" / "b.json").string();
  try {
    report::write_file(bad, "x");
    FAIL() << "expected an IO error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(bad), std::string::npos);
  }
}
