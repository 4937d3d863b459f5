#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsgd/csv.hpp"
#include "rsgd/neural_net.hpp"
#include "rsgd/rng.hpp"

namespace rsgd {

/**
 * Particle-identification file format:
 *   line 1: "<n_signal> <n_background>"
 *   then one example per line, 50 whitespace-separated reals.
 * Signal examples come first. The public MiniBooNE file from the UCI
 * repository has n_signal = 36499, n_background = 93565.
 */
struct RawDataset {
  RowMatrixXd features;  ///< (n_signal + n_background) x 50, signal rows first
  std::int64_t n_signal = 0;
  std::int64_t n_background = 0;
  std::uint64_t source_checksum = 0;  ///< FNV-1a of the file bytes (or synthetic recipe)

  std::int64_t size() const { return n_signal + n_background; }
};

struct SplitDataset {
  ExampleSet train;
  ExampleSet test;
  std::uint64_t split_seed = 0;
  double train_fraction = 0.0;
  std::uint64_t source_checksum = 0;
  std::vector<std::int64_t> order;  ///< shuffled indices into the raw dataset
};

namespace detail {

inline std::uint64_t file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::uint64_t h = 0xCBF29CE484222325ull;
  char buffer[1 << 16];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    h = fnv1a64(buffer, static_cast<std::size_t>(in.gcount()), h);
  }
  return h;
}

inline bool parse_double(const char*& p, const char* end, double& out) {
  while (p != end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
  if (p == end) return false;
  const auto [next, ec] = std::from_chars(p, end, out);
  if (ec != std::errc()) return false;
  p = next;
  return true;
}

}  // namespace detail

/// Parses the raw file, cross-checking the declared counts against the rows found.
inline RawDataset load_raw(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_raw: cannot open " + path +
                             " (download MiniBooNE_PID.txt from the UCI repository, or use the "
                             "synthetic fallback)");
  }
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_raw: empty file " + path);
  std::int64_t n_signal = -1, n_background = -1;
  {
    std::istringstream head(line);
    if (!(head >> n_signal >> n_background) || n_signal < 0 || n_background < 0) {
      throw std::runtime_error("load_raw: line 1: expected \"<n_signal> <n_background>\"");
    }
  }
  RawDataset raw;
  raw.n_signal = n_signal;
  raw.n_background = n_background;
  raw.features.resize(n_signal + n_background, net::kFeatures);

  std::int64_t row = 0;
  std::int64_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (row >= raw.size()) {
      throw std::runtime_error("load_raw: line " + std::to_string(line_number) +
                               ": more rows than declared (" + std::to_string(raw.size()) + ")");
    }
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int c = 0; c < net::kFeatures; ++c) {
      double value;
      if (!detail::parse_double(p, end, value)) {
        throw std::runtime_error("load_raw: line " + std::to_string(line_number) + ": expected " +
                                 std::to_string(net::kFeatures) + " values, got " +
                                 std::to_string(c));
      }
      raw.features(row, c) = value;
    }
    double extra;
    if (detail::parse_double(p, end, extra)) {
      throw std::runtime_error("load_raw: line " + std::to_string(line_number) +
                               ": more than " + std::to_string(net::kFeatures) + " values");
    }
    ++row;
  }
  if (row != raw.size()) {
    throw std::runtime_error("load_raw: declared " + std::to_string(raw.size()) +
                             " examples but found " + std::to_string(row));
  }
  raw.source_checksum = detail::file_checksum(path);
  return raw;
}

namespace detail {

inline ExampleSet gather(const RawDataset& raw, const std::vector<std::int64_t>& order,
                         std::size_t begin, std::size_t end) {
  ExampleSet set;
  set.features.resize(static_cast<std::int64_t>(end - begin), net::kFeatures);
  set.labels.resize(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    const std::int64_t src = order[i];
    set.features.row(static_cast<std::int64_t>(i - begin)) = raw.features.row(src);
    set.labels[i - begin] = src < raw.n_signal ? 1 : 0;
  }
  return set;
}

}  // namespace detail

/**
 * Labels the first n_signal rows 1 and the rest 0, shuffles indices with a
 * seeded Fisher-Yates permutation, and assigns the first
 * floor(train_fraction * N) shuffled examples to the training set. With the
 * public file's N = 130064 and fraction 0.7 the sizes are 91044 / 39020.
 */
inline SplitDataset label_and_split(const RawDataset& raw, std::uint64_t split_seed,
                                    double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("label_and_split: train_fraction must be in (0, 1)");
  }
  const std::int64_t n = raw.size();
  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  RngStream stream = RngStream::derive(split_seed, 0x5117);
  for (std::int64_t i = n - 1; i > 0; --i) {
    const std::int64_t j = stream.uniform_int(i + 1);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  const auto n_train =
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));

  SplitDataset split;
  split.split_seed = split_seed;
  split.train_fraction = train_fraction;
  split.source_checksum = raw.source_checksum;
  split.order = order;
  split.train = detail::gather(raw, order, 0, n_train);
  split.test = detail::gather(raw, order, n_train, static_cast<std::size_t>(n));
  return split;
}

/// Writes the split as metadata plus the index permutation (plain text).
inline void persist_split(const SplitDataset& split, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("persist_split: cannot open " + path);
  out << "source_checksum=" << split.source_checksum << "\n";
  out << "seed=" << split.split_seed << "\n";
  out << "fraction=" << format_double(split.train_fraction) << "\n";
  out << "n_train=" << split.train.size() << "\n";
  out << "n_test=" << split.test.size() << "\n";
  out << "indices=";
  for (std::size_t i = 0; i < split.order.size(); ++i) {
    if (i) out << ' ';
    out << split.order[i];
  }
  out << "\n";
}

/**
 * Reloads a persisted split against its source dataset. Refuses to load when
 * the source checksum does not match (silent dataset drift is the failure
 * mode this guards against).
 */
inline SplitDataset load_split(const std::string& path, const RawDataset& raw) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_split: cannot open " + path);
  std::uint64_t checksum = 0, seed = 0;
  double fraction = -1.0;
  std::int64_t n_train = -1, n_test = -1;
  std::vector<std::int64_t> order;
  bool have_checksum = false, have_seed = false, have_fraction = false, have_indices = false;
  bool have_n_train = false, have_n_test = false;

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("load_split: malformed line: " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "source_checksum") {
      checksum = std::stoull(value);
      have_checksum = true;
    } else if (key == "seed") {
      seed = std::stoull(value);
      have_seed = true;
    } else if (key == "fraction") {
      fraction = std::stod(value);
      have_fraction = true;
    } else if (key == "n_train") {
      n_train = std::stoll(value);
      have_n_train = true;
    } else if (key == "n_test") {
      n_test = std::stoll(value);
      have_n_test = true;
    } else if (key == "indices") {
      std::istringstream idx(value);
      std::int64_t v;
      while (idx >> v) order.push_back(v);
      have_indices = true;
    }
  }
  if (!have_checksum || !have_seed || !have_fraction || !have_indices || !have_n_train ||
      !have_n_test) {
    throw std::runtime_error("load_split: missing metadata field in " + path);
  }
  if (checksum != raw.source_checksum) {
    throw std::runtime_error("load_split: source checksum mismatch (split=" +
                             std::to_string(checksum) + ", dataset=" +
                             std::to_string(raw.source_checksum) + "); refusing to load");
  }
  if (static_cast<std::int64_t>(order.size()) != raw.size() || n_train + n_test != raw.size()) {
    throw std::runtime_error("load_split: index list does not match dataset size");
  }

  SplitDataset split;
  split.split_seed = seed;
  split.train_fraction = fraction;
  split.source_checksum = checksum;
  split.order = order;
  split.train = detail::gather(raw, order, 0, static_cast<std::size_t>(n_train));
  split.test =
      detail::gather(raw, order, static_cast<std::size_t>(n_train), order.size());
  return split;
}

/**
 * Seeded synthetic stand-in with the same shape as the real file: 50
 * features, class-dependent Gaussian means (a seeded direction separates the
 * classes, so a linear probe learns the task well above chance).
 */
inline RawDataset synthetic_fallback(std::uint64_t seed, std::int64_t n_signal,
                                     std::int64_t n_background) {
  if (n_signal < 0 || n_background < 0 || n_signal + n_background < 1) {
    throw std::invalid_argument("synthetic_fallback: counts must be non-negative and non-empty");
  }
  RawDataset raw;
  raw.n_signal = n_signal;
  raw.n_background = n_background;
  raw.features.resize(n_signal + n_background, net::kFeatures);

  RngStream mean_stream = RngStream::derive(seed, 0x3EA2);
  Eigen::VectorXd shift(net::kFeatures);
  for (int c = 0; c < net::kFeatures; ++c) shift(c) = 0.15 * mean_stream.gaussian();

  RngStream stream = RngStream::derive(seed, 0xDA7A);
  for (std::int64_t i = 0; i < raw.size(); ++i) {
    const double sign = i < n_signal ? 1.0 : -1.0;
    for (int c = 0; c < net::kFeatures; ++c) {
      raw.features(i, c) = sign * shift(c) + stream.gaussian();
    }
  }
  std::uint64_t h = 0xCBF29CE484222325ull;
  h = fnv1a64(&seed, sizeof(seed), h);
  h = fnv1a64(&n_signal, sizeof(n_signal), h);
  h = fnv1a64(&n_background, sizeof(n_background), h);
  const char tag[] = "synthetic";
  raw.source_checksum = fnv1a64(tag, sizeof(tag) - 1, h);
  return raw;
}

}  // namespace rsgd
