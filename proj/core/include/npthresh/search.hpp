#pragma once

#include <vector>

#include "npthresh/inference.hpp"

namespace npthresh {

// Settings for the SSR grid search and the sequential detection loop.
struct SearchConfig {
  int grid_points = 100;       // candidate thresholds per interval
  double trim_fraction = 0.05; // per-side share of observations excluded
  int max_thresholds = 5;      // hard cap on the number of thresholds
  double alpha = 0.05;         // test level per round
  int m = 7;                   // candidate grid size for the tests

  void validate() const;
};

// Output of the sequential detection loop.
struct DetectionResult {
  int s_hat = 0;
  std::vector<double> gammas;               // sorted threshold estimates
  std::vector<double> round_ssr;            // full-partition SSR per round
  std::vector<SequentialTestReport> reports;
  std::vector<SkippedRegime> skipped_intervals;
  bool cap_reached = false;
};

// Thrown when detection aborts mid-way; carries the partial audit trail.
class DetectionAborted : public Error {
public:
  DetectionAborted(const std::string& what, DetectionResult partial)
      : Error(what), partial(std::move(partial)) {}
  DetectionResult partial;
};

// Minimizes the full-partition SSR over a trimmed quantile grid of Q values
// inside `interval`, holding the fixed thresholds in place. Returns the
// minimizing split value (smallest value on exact ties) and the SSR of the
// partition with it inserted. Throws SearchError when no grid point leaves
// both sides with at least config.min_regime_obs observations.
std::pair<double, double> estimate_one_threshold(const Sample& sample,
                                                 const RegimePartition& fixed,
                                                 const RegimeInterval& interval,
                                                 const KernelConfig& config,
                                                 const SearchConfig& search);

// Sequential detection: test the current partition; on rejection insert the
// SSR-minimizing new threshold (searching every current regime) and repeat
// until non-rejection or the threshold cap.
DetectionResult detect(const Sample& sample, const KernelConfig& config,
                       const SearchConfig& search, const WeightBox& box);

}  // namespace npthresh
