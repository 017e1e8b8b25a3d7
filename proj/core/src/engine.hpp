#pragma once

// Internal machinery shared by the estimator, inference and search code:
// the sample re-indexed by ascending Q so half-open regimes map to
// contiguous index ranges, plus raw Gaussian kernel sums over those ranges.
// Not installed.

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <vector>

#include "npthresh/kernel.hpp"
#include "npthresh/types.hpp"

namespace npthresh::detail {

struct QSorted {
  Eigen::MatrixXd x;  // n x p, rows in ascending q order
  Eigen::VectorXd y;
  Eigen::VectorXd y2;
  Eigen::VectorXd q;
  std::vector<Eigen::Index> to_orig;

  Eigen::Index n() const { return y.size(); }
  int p() const { return static_cast<int>(x.cols()); }

  struct Range {
    Eigen::Index b = 0;
    Eigen::Index e = 0;
    Eigen::Index count() const { return e - b; }
  };

  // First index with q[i] >= v.
  Eigen::Index lower(double v) const {
    if (v == -std::numeric_limits<double>::infinity()) return 0;
    if (v == std::numeric_limits<double>::infinity()) return n();
    const double* begin = q.data();
    const double* end = begin + n();
    return std::lower_bound(begin, end, v) - begin;
  }

  Range range(const RegimeInterval& interval) const {
    return Range{lower(interval.lo), lower(interval.hi)};
  }

  static QSorted build(const Sample& sample) {
    const Eigen::Index n = sample.n();
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return sample.q[a] < sample.q[b];
    });
    QSorted out;
    out.x.resize(n, sample.p());
    out.y.resize(n);
    out.y2.resize(n);
    out.q.resize(n);
    out.to_orig = std::move(order);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index src = out.to_orig[i];
      out.x.row(i) = sample.x.row(src);
      out.y[i] = sample.y[src];
      out.y2[i] = sample.y[src] * sample.y[src];
      out.q[i] = sample.q[src];
    }
    return out;
  }
};

// Normalization constants for raw kernel sums (sums of K(u/h) without the
// h^{-p} factor).
struct KernelScale {
  double inv_nhp;       // density = raw_sum * inv_nhp
  double nw_clamp_raw;  // raw-sum clamp equal to density_floor * n * h^p in
                        // K_h units
  static KernelScale from(const KernelConfig& config, Eigen::Index n) {
    const double hp = std::pow(config.h, config.dim_p);
    KernelScale s;
    s.inv_nhp = 1.0 / (static_cast<double>(n) * hp);
    s.nw_clamp_raw = config.density_floor * static_cast<double>(n) * hp * hp;
    return s;
  }
};

// Product Gaussian kernel values K((X_i - X_eval)/h) for sorted rows
// [b, e), written to out[0 .. e-b). The evaluation point is a sample row.
inline void kernel_row(const QSorted& qs, Eigen::Index eval_row, double h,
                       Eigen::Index b, Eigen::Index e, double* out) {
  constexpr double kInvSqrt2Pi = 0.3989422804014326779;
  const int p = qs.p();
  double norm = 1.0;
  for (int d = 0; d < p; ++d) norm *= kInvSqrt2Pi;
  const double inv_h = 1.0 / h;
  for (Eigen::Index i = b; i < e; ++i) {
    double s = 0.0;
    for (int d = 0; d < p; ++d) {
      const double u = (qs.x(i, d) - qs.x(eval_row, d)) * inv_h;
      s += u * u;
    }
    out[i - b] = norm * std::exp(-0.5 * s);
  }
}

// Density, NW mean and NW conditional variance at one evaluation point from
// a precomputed kernel row covering sorted columns [row_b, row_b + len).
//
// m is the plain ratio fit. mc is the same fit accumulated relative to
// y_center (the evaluation row's own response); differences of mc values
// over nested intervals cancel exactly for a constant response, which is
// what the squared-gap statistic needs.
struct PointStats {
  double f = 0.0;   // regime-restricted density estimate
  double m = 0.0;   // NW conditional mean
  double mc = 0.0;  // NW mean, centered accumulation
  double s2 = 0.0;  // NW conditional variance, clamped at zero
};

inline PointStats interval_stats(const double* krow, Eigen::Index row_b,
                                 const QSorted& qs, QSorted::Range r,
                                 const KernelScale& scale, double y_center) {
  double sk = 0.0, sky = 0.0, skdy = 0.0, sky2 = 0.0;
  for (Eigen::Index i = r.b; i < r.e; ++i) {
    const double k = krow[i - row_b];
    sk += k;
    sky += k * qs.y[i];
    skdy += k * (qs.y[i] - y_center);
    sky2 += k * qs.y2[i];
  }
  PointStats out;
  out.f = sk * scale.inv_nhp;
  const double den = std::max(sk, scale.nw_clamp_raw);
  out.m = sky / den;
  out.mc = y_center + skdy / den;
  out.s2 = std::max(0.0, sky2 / den - out.m * out.m);
  return out;
}

}  // namespace npthresh::detail
