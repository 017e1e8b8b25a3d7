#include "npthresh/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace npthresh {

void Sample::validate() const {
  if (y.size() == 0) throw DomainError("sample is empty");
  if (x.rows() != y.size() || q.size() != y.size()) {
    std::ostringstream msg;
    msg << "sample row counts differ: y=" << y.size() << " x=" << x.rows()
        << " q=" << q.size();
    throw DomainError(msg.str());
  }
  if (x.cols() < 1) throw DomainError("sample has no covariate columns");
  if (!y.allFinite() || !x.allFinite() || !q.allFinite()) {
    throw DomainError("sample contains non-finite values");
  }
}

void RegimeInterval::validate() const {
  if (std::isnan(lo) || std::isnan(hi) || !(lo < hi)) {
    throw DomainError("invalid regime interval " + str());
  }
}

std::string RegimeInterval::str() const {
  std::ostringstream s;
  s << "[" << lo << ", " << hi << ")";
  return s.str();
}

int regime_indicator(double q_value, const RegimeInterval& interval) {
  if (std::isnan(q_value)) throw DomainError("regime_indicator: NaN input");
  interval.validate();
  return interval.contains(q_value) ? 1 : 0;
}

RegimePartition::RegimePartition(std::vector<double> thresholds)
    : thresholds_(std::move(thresholds)) {
  for (std::size_t i = 0; i < thresholds_.size(); ++i) {
    if (!std::isfinite(thresholds_[i])) {
      throw DomainError("threshold values must be finite");
    }
    if (i > 0 && !(thresholds_[i - 1] < thresholds_[i])) {
      throw DomainError("threshold values must be strictly increasing");
    }
  }
}

RegimeInterval RegimePartition::regime(int j) const {
  if (j < 0 || j >= n_regimes()) throw DomainError("regime index out of range");
  RegimeInterval r;
  if (j > 0) r.lo = thresholds_[j - 1];
  if (j < size()) r.hi = thresholds_[j];
  return r;
}

std::vector<RegimeInterval> RegimePartition::regimes() const {
  std::vector<RegimeInterval> out;
  out.reserve(n_regimes());
  for (int j = 0; j < n_regimes(); ++j) out.push_back(regime(j));
  return out;
}

int RegimePartition::regime_of(double q_value) const {
  auto it = std::upper_bound(thresholds_.begin(), thresholds_.end(), q_value);
  return static_cast<int>(it - thresholds_.begin());
}

RegimePartition RegimePartition::with_inserted(double gamma) const {
  std::vector<double> next = thresholds_;
  auto it = std::lower_bound(next.begin(), next.end(), gamma);
  if (it != next.end() && *it == gamma) {
    throw DomainError("threshold already present in partition");
  }
  next.insert(it, gamma);
  return RegimePartition(std::move(next));
}

}  // namespace npthresh
