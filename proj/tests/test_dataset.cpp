#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <set>

#include "rsgd/dataset.hpp"
#include "rsgd/ideal_problem.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / "rsgd_dataset_test") {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string row_of(double value) {
  std::string row;
  for (int i = 0; i < rsgd::net::kFeatures; ++i) {
    if (i) row += ' ';
    row += std::to_string(value + i * 0.01);
  }
  return row + "\n";
}

}  // namespace

TEST_CASE("a two-line synthetic fixture parses into two examples") {
  TempDir dir;
  const std::string path = dir.file("tiny.txt");
  write_file(path, "1 1\n" + row_of(1.0) + row_of(-1.0));
  const auto raw = rsgd::load_raw(path);
  CHECK(raw.n_signal == 1);
  CHECK(raw.n_background == 1);
  CHECK(raw.size() == 2);
  CHECK_THAT(raw.features(0, 0), Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THAT(raw.features(1, 0), Catch::Matchers::WithinAbs(-1.0, 1e-12));
  CHECK(raw.source_checksum != 0);
}

TEST_CASE("a row with 49 values is reported with its line number") {
  TempDir dir;
  const std::string path = dir.file("short_row.txt");
  std::string row49 = "";
  for (int i = 0; i < 49; ++i) row49 += "0.5 ";
  write_file(path, "1 1\n" + row_of(1.0) + row49 + "\n");
  CHECK_THROWS_WITH(rsgd::load_raw(path),
                    Catch::Matchers::ContainsSubstring("line 3") &&
                        Catch::Matchers::ContainsSubstring("50"));
}

TEST_CASE("count mismatches name expected versus found") {
  TempDir dir;
  const std::string path = dir.file("count_mismatch.txt");
  write_file(path, "2 1\n" + row_of(1.0) + row_of(2.0));
  CHECK_THROWS_WITH(rsgd::load_raw(path),
                    Catch::Matchers::ContainsSubstring("3") &&
                        Catch::Matchers::ContainsSubstring("2"));
}

TEST_CASE("missing files point at the download or the synthetic fallback") {
  CHECK_THROWS_WITH(rsgd::load_raw("/nonexistent/MiniBooNE_PID.txt"),
                    Catch::Matchers::ContainsSubstring("UCI") ||
                        Catch::Matchers::ContainsSubstring("synthetic"));
}

TEST_CASE("labeling marks exactly n_signal examples regardless of the shuffle") {
  const auto raw = rsgd::synthetic_fallback(5, 120, 280);
  const auto split = rsgd::label_and_split(raw, 99, 0.7);
  std::int64_t signal = 0;
  for (const int label : split.train.labels) signal += label;
  for (const int label : split.test.labels) signal += label;
  CHECK(signal == 120);
  CHECK(split.train.size() + split.test.size() == 400);
  CHECK(split.train.size() == 280);  // floor(0.7 * 400)
}

TEST_CASE("split determinism and disjointness") {
  const auto raw = rsgd::synthetic_fallback(7, 60, 140);
  const auto a = rsgd::label_and_split(raw, 31, 0.7);
  const auto b = rsgd::label_and_split(raw, 31, 0.7);
  CHECK(a.order == b.order);
  CHECK(a.train.features == b.train.features);

  const auto c = rsgd::label_and_split(raw, 32, 0.7);
  CHECK(a.order != c.order);
  CHECK(a.train.size() == c.train.size());

  // Every raw index appears exactly once across train and test.
  std::set<std::int64_t> seen(a.order.begin(), a.order.end());
  CHECK(seen.size() == static_cast<std::size_t>(raw.size()));
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == raw.size() - 1);
}

TEST_CASE("the public file's proportions give the documented split sizes") {
  // 130064 total with fraction 0.7: floor gives exactly 91044 / 39020.
  const auto n_train = static_cast<std::int64_t>(std::floor(0.7 * 130064.0));
  CHECK(n_train == 91044);
  CHECK(130064 - n_train == 39020);
}

TEST_CASE("train fraction bounds are validated") {
  const auto raw = rsgd::synthetic_fallback(3, 10, 10);
  CHECK_THROWS_AS(rsgd::label_and_split(raw, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rsgd::label_and_split(raw, 1, 1.0), std::invalid_argument);
}

TEST_CASE("persisted splits round-trip bit-exactly") {
  TempDir dir;
  const auto raw = rsgd::synthetic_fallback(11, 50, 150);
  const auto split = rsgd::label_and_split(raw, 21, 0.7);
  const std::string path = dir.file("split.txt");
  rsgd::persist_split(split, path);
  const auto loaded = rsgd::load_split(path, raw);
  CHECK(loaded.order == split.order);
  CHECK(loaded.train.features == split.train.features);
  CHECK(loaded.train.labels == split.train.labels);
  CHECK(loaded.test.features == split.test.features);
  CHECK(loaded.split_seed == split.split_seed);
}

TEST_CASE("splits refuse to load against a drifted source") {
  TempDir dir;
  const auto raw = rsgd::synthetic_fallback(11, 50, 150);
  const auto split = rsgd::label_and_split(raw, 21, 0.7);
  const std::string path = dir.file("split.txt");
  rsgd::persist_split(split, path);

  auto drifted = rsgd::synthetic_fallback(12, 50, 150);  // different seed, same shape
  CHECK_THROWS_WITH(rsgd::load_split(path, drifted),
                    Catch::Matchers::ContainsSubstring("checksum"));
}

TEST_CASE("split files with missing metadata are rejected") {
  TempDir dir;
  const auto raw = rsgd::synthetic_fallback(11, 10, 10);
  const std::string path = dir.file("partial.txt");
  write_file(path, "seed=21\nfraction=0.7\n");
  CHECK_THROWS_WITH(rsgd::load_split(path, raw),
                    Catch::Matchers::ContainsSubstring("missing"));
}

TEST_CASE("synthetic fallback has the right shape and varies with the seed") {
  const auto a = rsgd::synthetic_fallback(1, 40, 60);
  CHECK(a.n_signal == 40);
  CHECK(a.n_background == 60);
  CHECK(a.features.rows() == 100);
  CHECK(a.features.cols() == rsgd::net::kFeatures);
  const auto b = rsgd::synthetic_fallback(2, 40, 60);
  CHECK(a.features != b.features);
  CHECK(a.source_checksum != b.source_checksum);
}

TEST_CASE("a linear probe learns the synthetic task well above chance") {
  const auto raw = rsgd::synthetic_fallback(17, 700, 1300);
  const auto split = rsgd::label_and_split(raw, 5, 0.7);

  // Streaming least squares of the 0/1 label on the features.
  rsgd::StreamingOls ols(rsgd::net::kFeatures);
  Eigen::VectorXd x(rsgd::net::kFeatures);
  for (std::int64_t i = 0; i < split.train.size(); ++i) {
    for (int c = 0; c < rsgd::net::kFeatures; ++c) x(c) = split.train.features(i, c);
    ols.add(x, static_cast<double>(split.train.labels[static_cast<std::size_t>(i)]));
  }
  const auto solution = ols.solve();
  REQUIRE(solution.status == rsgd::StreamingOls::Status::ok);

  std::int64_t correct = 0;
  for (std::int64_t i = 0; i < split.test.size(); ++i) {
    double score = 0.0;
    for (int c = 0; c < rsgd::net::kFeatures; ++c) {
      score += solution.beta(c) * split.test.features(i, c);
    }
    const int predicted = score >= 0.5 ? 1 : 0;
    if (predicted == split.test.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  const double accuracy = static_cast<double>(correct) / static_cast<double>(split.test.size());
  CHECK(accuracy > 0.6);
}
