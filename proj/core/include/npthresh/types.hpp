#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "npthresh/errors.hpp"

namespace npthresh {

// Observed data: response y, covariates x (n rows, p columns) and the
// threshold variable q, aligned by row.
struct Sample {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;
  Eigen::VectorXd q;

  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return x.cols(); }

  // Throws DomainError on mismatched row counts, empty data or non-finite
  // entries.
  void validate() const;
};

// Half-open interval [lo, hi) of the threshold variable. Sentinel bounds
// use +-infinity.
struct RegimeInterval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double q_value) const { return q_value >= lo && q_value < hi; }
  void validate() const;
  std::string str() const;
};

// 1 iff q_value lies in [interval.lo, interval.hi).
int regime_indicator(double q_value, const RegimeInterval& interval);

// Strictly increasing threshold values g_1 < ... < g_s. The derived regimes
// are the s+1 half-open intervals with sentinels g_0 = -inf, g_{s+1} = +inf.
class RegimePartition {
public:
  RegimePartition() = default;
  explicit RegimePartition(std::vector<double> thresholds);

  int size() const { return static_cast<int>(thresholds_.size()); }
  int n_regimes() const { return size() + 1; }
  const std::vector<double>& thresholds() const { return thresholds_; }

  RegimeInterval regime(int j) const;
  std::vector<RegimeInterval> regimes() const;

  // Index of the regime containing q (0-based).
  int regime_of(double q_value) const;

  // Copy with one extra threshold inserted; throws DomainError if the value
  // duplicates an existing threshold.
  RegimePartition with_inserted(double gamma) const;

private:
  std::vector<double> thresholds_;
};

}  // namespace npthresh
