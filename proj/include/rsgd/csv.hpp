#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsgd {

/// Shortest representation of a double that round-trips exactly.
inline std::string format_double(double v) {
  char buf[40];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  }
  return std::string(buf, end);
}

/**
 * Line-oriented CSV writer. Comment lines ("# key=value") carry the full
 * experiment configuration so every output file is self-describing.
 * Output is byte-deterministic for identical inputs.
 */
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
  }

  void comment(const std::string& key, const std::string& value) {
    out_ << "# " << key << "=" << value << "\n";
  }
  void comment(const std::string& key, double value) { comment(key, format_double(value)); }
  void comment(const std::string& key, std::int64_t value) {
    comment(key, std::to_string(value));
  }
  void comment_line(const std::string& text) { out_ << "# " << text << "\n"; }

  void header(const std::vector<std::string>& columns) { write_row(columns); }

  void row(const std::vector<std::string>& cells) { write_row(cells); }

  /// Cell helpers.
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(std::int64_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }

 private:
  void write_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ",";
      out_ << cells[i];
    }
    out_ << "\n";
  }

  std::ofstream out_;
};

}  // namespace rsgd
