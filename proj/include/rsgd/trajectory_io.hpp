#pragma once

#include <string>
#include <vector>

#include "rsgd/csv.hpp"
#include "rsgd/runner.hpp"

namespace rsgd {

/// Parameter snapshots as CSV rows "k,theta_0,...,theta_{d-1}".
inline void write_trajectory_csv(const std::vector<TrajectoryPoint>& trajectory,
                                 Eigen::Index dimension, CsvWriter& csv) {
  std::vector<std::string> header;
  header.reserve(static_cast<std::size_t>(dimension) + 1);
  header.push_back("k");
  for (Eigen::Index i = 0; i < dimension; ++i) header.push_back("theta_" + std::to_string(i));
  csv.header(header);
  for (const auto& pt : trajectory) {
    std::vector<std::string> row;
    row.reserve(static_cast<std::size_t>(dimension) + 1);
    row.push_back(CsvWriter::cell(pt.k));
    for (Eigen::Index i = 0; i < dimension; ++i) row.push_back(CsvWriter::cell(pt.theta(i)));
    csv.row(row);
  }
}

}  // namespace rsgd
