#pragma once

#include <Eigen/Dense>

#include "npthresh/errors.hpp"

namespace npthresh {

// Kernel and bandwidth settings shared by all estimators.
//
// The bandwidth follows the rate rule h = c * scale * n^(-1/delta). Any
// kernel sum used as a denominator is clamped below so that estimated
// densities never fall under density_floor.
struct KernelConfig {
  int order_r = 2;              // kernel order (Gaussian product kernel, r = 2)
  double c = 1.0;               // bandwidth constant
  double delta = 4.25;          // rate exponent
  double h = 0.0;               // resolved bandwidth, must be > 0
  int dim_p = 1;                // covariate dimension
  double density_floor = 1e-10; // lower clamp for densities in denominators
  int min_regime_obs = 10;      // smallest regime size accepted by estimators

  void validate() const;

  // Config with h resolved from the rate rule for a sample of size n.
  static KernelConfig resolved(Eigen::Index n, int p, double c = 1.0,
                               double delta = 4.25, double scale = 1.0);
};

// Indicator weight a(x) of a closed axis-aligned box; restricts test
// statistics to a region where the covariate density stays away from zero.
struct WeightBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  void validate() const;
  static WeightBox symmetric(int p, double half_width);
};

// Product Gaussian kernel: prod_i phi(u_i). Throws DomainError on non-finite
// input or a dimension mismatch with config.dim_p.
double kernel_value(const Eigen::Ref<const Eigen::VectorXd>& u,
                    const KernelConfig& config);

// Squared-kernel mass of the product Gaussian kernel,
//   C2 = (integral of K^2)^p = (2 sqrt(pi))^{-p}.
double kernel_c2(int p);

// Overlap constant of the product Gaussian kernel,
//   C3 = (integral_w (integral_u K(u) K(u+w) du)^2 dw)^p = (2 sqrt(2 pi))^{-p}.
double kernel_c3(int p);

// h = c * scale * n^(-1/delta).
double resolve_bandwidth(double c, double scale, Eigen::Index n, double delta);

// 1 iff lower[i] <= x[i] <= upper[i] for all i, else 0.
int weight(const Eigen::Ref<const Eigen::VectorXd>& x, const WeightBox& box);

}  // namespace npthresh
