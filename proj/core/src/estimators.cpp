#include "npthresh/estimators.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "engine.hpp"

namespace npthresh {

namespace {

struct RawSums {
  double sk = 0.0;
  double sky = 0.0;
  double sky2 = 0.0;
  Eigen::Index count = 0;
};

RawSums raw_interval_sums(const Sample& sample, const RegimeInterval& interval,
                          const Eigen::Ref<const Eigen::VectorXd>& x,
                          const KernelConfig& config) {
  sample.validate();
  interval.validate();
  config.validate();
  if (x.size() != sample.p() || sample.p() != config.dim_p) {
    throw DomainError("estimator: covariate dimension mismatch");
  }
  if (!x.allFinite()) throw DomainError("estimator: non-finite evaluation point");
  constexpr double kInvSqrt2Pi = 0.3989422804014326779;
  const double inv_h = 1.0 / config.h;
  double norm = 1.0;
  for (int d = 0; d < config.dim_p; ++d) norm *= kInvSqrt2Pi;
  RawSums out;
  for (Eigen::Index i = 0; i < sample.n(); ++i) {
    if (!interval.contains(sample.q[i])) continue;
    double s = 0.0;
    for (Eigen::Index d = 0; d < sample.p(); ++d) {
      const double u = (sample.x(i, d) - x[d]) * inv_h;
      s += u * u;
    }
    const double k = norm * std::exp(-0.5 * s);
    out.sk += k;
    out.sky += k * sample.y[i];
    out.sky2 += k * sample.y[i] * sample.y[i];
    ++out.count;
  }
  return out;
}

}  // namespace

double density_hat(const Sample& sample, const RegimeInterval& interval,
                   const Eigen::Ref<const Eigen::VectorXd>& x,
                   const KernelConfig& config) {
  const RawSums s = raw_interval_sums(sample, interval, x, config);
  const double hp = std::pow(config.h, config.dim_p);
  return s.sk / (static_cast<double>(sample.n()) * hp);
}

double nw_hat(const Sample& sample, const RegimeInterval& interval,
              const Eigen::Ref<const Eigen::VectorXd>& x,
              const KernelConfig& config) {
  const RawSums s = raw_interval_sums(sample, interval, x, config);
  if (s.count == 0) {
    throw EstimationError("empty regime " + interval.str(), interval.lo,
                          interval.hi);
  }
  const double hp = std::pow(config.h, config.dim_p);
  const double clamp = config.density_floor * static_cast<double>(sample.n()) *
                       hp * hp;
  return s.sky / std::max(s.sk, clamp);
}

double cond_var_hat(const Sample& sample, const RegimeInterval& interval,
                    const Eigen::Ref<const Eigen::VectorXd>& x,
                    const KernelConfig& config) {
  const RawSums s = raw_interval_sums(sample, interval, x, config);
  if (s.count == 0) {
    throw EstimationError("empty regime " + interval.str(), interval.lo,
                          interval.hi);
  }
  const double hp = std::pow(config.h, config.dim_p);
  const double clamp = config.density_floor * static_cast<double>(sample.n()) *
                       hp * hp;
  const double den = std::max(s.sk, clamp);
  const double m = s.sky / den;
  return std::max(0.0, s.sky2 / den - m * m);
}

namespace detail {

// Residual sum of squares of one regime's NW fit, evaluated at the regime's
// own observations. Fits are computed in centered form
//   mhat(X_e) = Y_e + sum_i K(Y_i - Y_e) / sum_i K
// so a constant response yields exactly zero residuals.
double regime_rss(const QSorted& qs, QSorted::Range r, const KernelConfig& config,
                  const KernelScale& scale) {
  std::vector<double> krow(static_cast<std::size_t>(r.count()));
  double rss = 0.0;
  for (Eigen::Index e = r.b; e < r.e; ++e) {
    kernel_row(qs, e, config.h, r.b, r.e, krow.data());
    double sk = 0.0, skdy = 0.0;
    const double ye = qs.y[e];
    for (Eigen::Index i = r.b; i < r.e; ++i) {
      const double k = krow[i - r.b];
      sk += k;
      skdy += k * (qs.y[i] - ye);
    }
    const double resid = -skdy / std::max(sk, scale.nw_clamp_raw);
    rss += resid * resid;
  }
  return rss;
}

}  // namespace detail

double ssr(const Sample& sample, const RegimePartition& partition,
           const KernelConfig& config) {
  sample.validate();
  config.validate();
  if (sample.p() != config.dim_p) {
    throw DomainError("ssr: covariate dimension mismatch");
  }
  const detail::QSorted qs = detail::QSorted::build(sample);
  const detail::KernelScale scale = detail::KernelScale::from(config, qs.n());
  double total = 0.0;
  for (int j = 0; j < partition.n_regimes(); ++j) {
    const RegimeInterval interval = partition.regime(j);
    const auto r = qs.range(interval);
    if (r.count() < config.min_regime_obs) {
      std::ostringstream msg;
      msg << "regime " << j << " " << interval.str() << " holds " << r.count()
          << " observations, need " << config.min_regime_obs;
      throw EstimationError(msg.str(), interval.lo, interval.hi);
    }
    total += detail::regime_rss(qs, r, config, scale);
  }
  return total / static_cast<double>(sample.n());
}

}  // namespace npthresh
