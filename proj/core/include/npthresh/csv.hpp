#pragma once

#include <string>
#include <vector>

#include "npthresh/types.hpp"

namespace npthresh {

// Which columns of a CSV file make up the sample.
struct DatasetSpec {
  std::string path;
  std::string y_column;
  std::vector<std::string> x_columns;
  std::string q_column;
  bool has_header = true;

  void validate() const;
};

struct LoadResult {
  Sample sample;
  Eigen::Index rows_dropped = 0;  // rows with missing or non-numeric cells
};

// Parses the selected numeric columns into a Sample. Rows with a missing or
// non-numeric cell in any selected column are dropped and counted. Throws
// DataError naming the offending file or column.
LoadResult load_csv(const DatasetSpec& spec);

}  // namespace npthresh
