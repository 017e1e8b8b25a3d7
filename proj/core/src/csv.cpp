#include "npthresh/csv.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <string>
#include <vector>

namespace npthresh {

void DatasetSpec::validate() const {
  if (path.empty()) throw DomainError("dataset path is empty");
  if (y_column.empty() || q_column.empty() || x_columns.empty()) {
    throw DomainError("dataset needs y, q and at least one x column");
  }
  std::set<std::string> names(x_columns.begin(), x_columns.end());
  names.insert(y_column);
  names.insert(q_column);
  if (names.size() != x_columns.size() + 2) {
    throw DomainError("dataset column names must be distinct");
  }
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

bool parse_cell(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

// Column index by header name, or by 0-based position for headerless files.
std::size_t column_index(const std::vector<std::string>& header,
                         const std::string& name, bool has_header,
                         std::size_t width) {
  if (has_header) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw DataError("column \"" + name + "\" not found");
  }
  std::size_t idx = 0;
  auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), idx);
  if (ec != std::errc() || ptr != name.data() + name.size() || idx >= width) {
    throw DataError("column \"" + name + "\" is not a valid column index");
  }
  return idx;
}

}  // namespace

LoadResult load_csv(const DatasetSpec& spec) {
  spec.validate();
  std::ifstream in(spec.path);
  if (!in) throw DataError("cannot open file \"" + spec.path + "\"");

  std::string line;
  std::vector<std::string> header;
  if (spec.has_header) {
    if (!std::getline(in, line)) {
      throw DataError("file \"" + spec.path + "\" is empty");
    }
    header = split_line(line);
  }

  std::vector<double> y, q;
  std::vector<std::vector<double>> x(spec.x_columns.size());
  std::size_t y_idx = 0, q_idx = 0;
  std::vector<std::size_t> x_idx(spec.x_columns.size());
  bool indices_ready = spec.has_header;
  if (spec.has_header) {
    y_idx = column_index(header, spec.y_column, true, header.size());
    q_idx = column_index(header, spec.q_column, true, header.size());
    for (std::size_t j = 0; j < spec.x_columns.size(); ++j) {
      x_idx[j] = column_index(header, spec.x_columns[j], true, header.size());
    }
  }

  Eigen::Index dropped = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (!indices_ready) {
      y_idx = column_index({}, spec.y_column, false, cells.size());
      q_idx = column_index({}, spec.q_column, false, cells.size());
      for (std::size_t j = 0; j < spec.x_columns.size(); ++j) {
        x_idx[j] = column_index({}, spec.x_columns[j], false, cells.size());
      }
      indices_ready = true;
    }
    std::size_t needed = std::max(y_idx, q_idx);
    for (std::size_t j : x_idx) needed = std::max(needed, j);
    double yv, qv;
    std::vector<double> xv(spec.x_columns.size());
    bool ok = cells.size() > needed && parse_cell(cells[y_idx], yv) &&
              parse_cell(cells[q_idx], qv);
    for (std::size_t j = 0; ok && j < x_idx.size(); ++j) {
      ok = parse_cell(cells[x_idx[j]], xv[j]);
    }
    if (!ok) {
      ++dropped;
      continue;
    }
    y.push_back(yv);
    q.push_back(qv);
    for (std::size_t j = 0; j < x_idx.size(); ++j) x[j].push_back(xv[j]);
  }

  if (y.empty()) {
    throw DataError("no usable rows in \"" + spec.path + "\"");
  }
  LoadResult out;
  const Eigen::Index n = static_cast<Eigen::Index>(y.size());
  out.sample.y = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  out.sample.q = Eigen::Map<const Eigen::VectorXd>(q.data(), n);
  out.sample.x.resize(n, static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) {
    out.sample.x.col(static_cast<Eigen::Index>(j)) =
        Eigen::Map<const Eigen::VectorXd>(x[j].data(), n);
  }
  out.rows_dropped = dropped;
  out.sample.validate();
  return out;
}

}  // namespace npthresh
