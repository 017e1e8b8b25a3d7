#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "npthresh/estimators.hpp"
#include "npthresh/kernel.hpp"
#include "npthresh/types.hpp"

namespace npthresh {

// Floor applied to sigma2_hat before taking reciprocal square roots.
inline constexpr double kVarianceFloor = 1e-12;
// Eigenvalue floor used when inverting the candidate covariance matrix.
inline constexpr double kEigenvalueFloor = 1e-8;
// Per-side share of a regime's observations excluded when a sentinel
// (infinite) regime bound has to be replaced by an observed Q quantile for
// the candidate grid.
inline constexpr double kTestGridTrim = 0.10;
// A candidate whose variance bracket falls below this share of the grid's
// largest bracket is dropped; its normalized covariances are meaningless.
inline constexpr double kBracketFloorShare = 0.1;
// Assembled candidate correlations are clamped to this magnitude before the
// matrix inverse square root.
inline constexpr double kMaxCandidateCorr = 0.99;
// The candidate correlation matrix is shrunk toward the identity until its
// smallest eigenvalue reaches this value. Flooring eigenvalues alone would
// amplify noise directions by 1/sqrt(eig_floor) and can flip the sign of
// the regime statistic when the estimated matrix is far from valid.
inline constexpr double kMinSigmaEigenvalue = 0.05;

// m equally spaced interior candidate thresholds of a regime. For sentinel
// (infinite) bounds the grid spans the observed Q range inside the regime.
struct CandidateGrid {
  RegimeInterval regime;
  std::vector<double> taus;
};

// Per-regime outcome of the extra-threshold test.
struct RegimeTestResult {
  CandidateGrid grid;            // full equally spaced grid
  std::vector<int> used;         // indices of grid.taus that entered the test
  Eigen::VectorXd gamma_tilde;   // per used candidate
  Eigen::VectorXd xi_hat;
  Eigen::VectorXd sigma2_hat;
  Eigen::VectorXd delta_hat;     // standardized but not decorrelated
  Eigen::MatrixXd sigma_matrix;  // candidate correlation matrix
  Eigen::VectorXd delta_star;    // decorrelated statistics
  double z = 0.0;                // regime statistic
};

// A regime that could not be tested, with the reason.
struct SkippedRegime {
  RegimeInterval interval;
  std::string reason;
};

// Outcome of testing s thresholds against s+1.
struct SequentialTestReport {
  int s_null = 0;
  std::vector<RegimeTestResult> per_regime;
  std::vector<SkippedRegime> skipped;
  double f_stat = 0.0;
  double critical_value = 0.0;
  double alpha = 0.0;
  bool reject = false;
};

// Weighted squared gap between the one-regime fit and the two fits induced
// by splitting the regime at tau:
//   (1/n) sum_i { mhat_R(X_i) I_R(Q_i) - mhat_[lo,tau)(X_i) I_[lo,tau)(Q_i)
//                 - mhat_[tau,hi)(X_i) I_[tau,hi)(Q_i) }^2 a(X_i).
// Throws TestError("thin split") when either sub-regime holds fewer than
// config.min_regime_obs observations.
double gamma_tilde(const Sample& sample, const RegimeInterval& regime,
                   double tau, const KernelConfig& config,
                   const WeightBox& box);

// Bias estimate xi(tau) = C2 * (xi1 + xi2) with C2 = (2 sqrt(pi))^{-p}.
double xi_hat(const Sample& sample, const RegimeInterval& regime, double tau,
              const KernelConfig& config, const WeightBox& box);

// Variance estimate sigma^2(tau) = 2 C3 * (sigma1^2 + sigma2^2) with
// C3 = (2 sqrt(2 pi))^{-p}. Throws TestError("degenerate variance") when the
// result does not exceed kVarianceFloor.
double sigma2_hat(const Sample& sample, const RegimeInterval& regime,
                  double tau, const KernelConfig& config,
                  const WeightBox& box);

// The nine covariance terms for an ordered candidate pair tau_l < tau_k.
std::array<double, 9> cov_hat_terms(const Sample& sample,
                                    const RegimeInterval& regime, double tau_l,
                                    double tau_k, const KernelConfig& config,
                                    const WeightBox& box);

// Covariance of the standardized candidate statistics at tau_l < tau_k:
// the term sum above scaled by the two reciprocal root variances.
double cov_hat(const Sample& sample, const RegimeInterval& regime,
               double tau_l, double tau_k, const KernelConfig& config,
               const WeightBox& box);

// Symmetric inverse square root via eigendecomposition with eigenvalues
// clamped below at eig_floor.
Eigen::MatrixXd matrix_inv_sqrt(const Eigen::Ref<const Eigen::MatrixXd>& m,
                                double eig_floor);

// Tests one regime for an extra threshold with an m-point candidate grid.
// Candidates with thin splits or degenerate variances are dropped; throws
// TestError("no viable candidates") when none survive.
RegimeTestResult regime_test(const Sample& sample, const RegimeInterval& regime,
                             int m, const KernelConfig& config,
                             const WeightBox& box);

// Quantile of max of k independent standard normals: Phi^{-1}((1-alpha)^{1/k}).
double critical_value(int k, double alpha);

// P(max of k independent standard normals > f) = 1 - Phi(f)^k.
double p_value(double f_stat, int k);

// Tests the null of s thresholds (the given partition) against s+1 by
// running regime_test on every regime; F = max Z over testable regimes,
// compared against critical_value(#testable, alpha).
SequentialTestReport sequential_test(const Sample& sample,
                                     const RegimePartition& partition, int m,
                                     double alpha, const KernelConfig& config,
                                     const WeightBox& box);

}  // namespace npthresh
