#pragma once

#include <Eigen/Dense>

#include "npthresh/kernel.hpp"
#include "npthresh/types.hpp"

namespace npthresh {

// Regime-restricted kernel density estimate at x:
//   (1 / (n h^p)) * sum_i K((X_i - x)/h) * 1[Q_i in interval].
// Zero when the interval holds no observations.
double density_hat(const Sample& sample, const RegimeInterval& interval,
                   const Eigen::Ref<const Eigen::VectorXd>& x,
                   const KernelConfig& config);

// Nadaraya-Watson estimate of E[Y | X = x] restricted to the interval. The
// denominator is clamped below at density_floor * n * h^p. Throws
// EstimationError when the interval holds no observations.
double nw_hat(const Sample& sample, const RegimeInterval& interval,
              const Eigen::Ref<const Eigen::VectorXd>& x,
              const KernelConfig& config);

// Conditional variance via NW: E[Y^2|x] - (E[Y|x])^2 within the interval,
// clamped below at zero.
double cond_var_hat(const Sample& sample, const RegimeInterval& interval,
                    const Eigen::Ref<const Eigen::VectorXd>& x,
                    const KernelConfig& config);

// Mean squared residual of the partitioned NW regression,
//   (1/n) sum_i (Y_i - mhat_{j(i)}(X_i))^2,
// where each regime's fit uses that regime's own observations (the fit at
// X_i includes observation i). Throws EstimationError when any regime holds
// fewer than config.min_regime_obs observations.
double ssr(const Sample& sample, const RegimePartition& partition,
           const KernelConfig& config);

}  // namespace npthresh
