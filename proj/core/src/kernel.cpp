#include "npthresh/kernel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace npthresh {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}

void KernelConfig::validate() const {
  if (order_r < 2 || order_r % 2 != 0) {
    throw DomainError("kernel order must be an even integer >= 2");
  }
  if (!(c > 0.0) || !(delta > 0.0)) {
    throw DomainError("bandwidth constant and rate exponent must be positive");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw DomainError("bandwidth h must be positive and finite");
  }
  if (dim_p < 1) throw DomainError("covariate dimension must be >= 1");
  if (!(density_floor > 0.0)) throw DomainError("density floor must be positive");
  if (min_regime_obs < 1) throw DomainError("min_regime_obs must be >= 1");
}

KernelConfig KernelConfig::resolved(Eigen::Index n, int p, double c,
                                    double delta, double scale) {
  KernelConfig config;
  config.c = c;
  config.delta = delta;
  config.dim_p = p;
  config.h = resolve_bandwidth(c, scale, n, delta);
  config.validate();
  return config;
}

void WeightBox::validate() const {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw DomainError("weight box bounds must be non-empty and equal-sized");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i])) {
      throw DomainError("weight box requires lower < upper in every dimension");
    }
  }
}

WeightBox WeightBox::symmetric(int p, double half_width) {
  if (p < 1 || !(half_width > 0.0)) {
    throw DomainError("weight box needs p >= 1 and a positive half width");
  }
  WeightBox box;
  box.lower = Eigen::VectorXd::Constant(p, -half_width);
  box.upper = Eigen::VectorXd::Constant(p, half_width);
  return box;
}

double kernel_value(const Eigen::Ref<const Eigen::VectorXd>& u,
                    const KernelConfig& config) {
  if (u.size() != config.dim_p) {
    throw DomainError("kernel_value: dimension mismatch");
  }
  if (!u.allFinite()) throw DomainError("kernel_value: non-finite input");
  double value = 1.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    value *= kInvSqrt2Pi * std::exp(-0.5 * u[i] * u[i]);
  }
  return value;
}

double kernel_c2(int p) {
  if (p < 1) throw DomainError("kernel_c2: p must be >= 1");
  return std::pow(1.0 / (2.0 * std::sqrt(std::numbers::pi)), p);
}

double kernel_c3(int p) {
  if (p < 1) throw DomainError("kernel_c3: p must be >= 1");
  return std::pow(1.0 / (2.0 * std::sqrt(2.0 * std::numbers::pi)), p);
}

double resolve_bandwidth(double c, double scale, Eigen::Index n, double delta) {
  if (n < 1) throw DomainError("resolve_bandwidth: n must be >= 1");
  if (!(c > 0.0) || !(scale > 0.0) || !(delta > 0.0)) {
    throw DomainError("resolve_bandwidth: c, scale and delta must be positive");
  }
  return c * scale * std::pow(static_cast<double>(n), -1.0 / delta);
}

int weight(const Eigen::Ref<const Eigen::VectorXd>& x, const WeightBox& box) {
  box.validate();
  if (x.size() != box.lower.size()) {
    std::ostringstream msg;
    msg << "weight: point dimension " << x.size() << " != box dimension "
        << box.lower.size();
    throw DomainError(msg.str());
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < box.lower[i] || x[i] > box.upper[i]) return 0;
  }
  return 1;
}

}  // namespace npthresh
