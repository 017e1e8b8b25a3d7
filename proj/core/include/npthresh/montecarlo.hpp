#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "npthresh/rng.hpp"
#include "npthresh/search.hpp"
#include "npthresh/types.hpp"

namespace npthresh {

// Settings for a simulation experiment.
struct SimConfig {
  Eigen::Index n = 500;
  int reps = 200;
  std::uint64_t seed = 1;
  double c = 1.0;
  double delta = 4.25;
  int m = 7;
  std::vector<double> alphas = {0.01, 0.05, 0.10};

  void validate() const;
};

// Empirical rejection rates of the no-threshold test on the null DGP.
struct SizeTable {
  Eigen::Index n = 0;
  int reps = 0;
  int errors = 0;  // replications lost to test errors
  std::vector<double> alphas;
  std::vector<double> rejection_rate;
  std::vector<double> monte_carlo_se;

  std::string to_text() const;
};

// Mean / standard error / MSE of the sequential threshold estimates, one row
// per estimation round, against the truths in discovery order.
struct EstimationTable {
  Eigen::Index n = 0;
  int reps = 0;
  int errors = 0;
  std::array<double, 3> truth{};
  std::array<double, 3> mean{};
  std::array<double, 3> se{};
  std::array<double, 3> mse{};

  std::string to_text() const;
};

// Null DGP: Y = exp(-0.25 X) + sqrt(exp(-0.2 (X+Q)^2)) * eps with
// X = sqrt(0.2) Q + sqrt(0.8) u and Q, u, eps independent standard normals.
Sample dgp_null(Eigen::Index n, RngStream& rng);

// Three-threshold DGP split at Q = -0.7, 0.15, 0.5 with regime means
// 1 + exp(-0.5 X), 0.5 + exp(-0.8 X), 2 + exp(-0.1 X), exp(-0.25 X) from
// left to right and noise sd sqrt(0.5625 exp(-X^2)); X, Q, eps independent
// standard normals.
Sample dgp_three_thresholds(Eigen::Index n, RngStream& rng);

// True thresholds of dgp_three_thresholds in discovery order.
std::array<double, 3> three_threshold_truths_by_round();

// Default weighting box for the simulation experiments.
WeightBox default_sim_box();

// Rejection rates of sequential_test under the null of no threshold.
// Per-replication test errors are counted, not fatal.
SizeTable size_experiment(const SimConfig& sim);
SizeTable size_experiment(const SimConfig& sim, const WeightBox& box);

// Three rounds of SSR threshold estimation on the three-threshold DGP.
EstimationTable estimation_experiment(const SimConfig& sim);

}  // namespace npthresh
