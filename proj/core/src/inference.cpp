#include "npthresh/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "engine.hpp"
#include "npthresh/normal.hpp"
#include "npthresh/parallel.hpp"

namespace npthresh {

namespace {

using detail::KernelScale;
using detail::PointStats;
using detail::QSorted;

// Evaluation context shared by every statistic of one testing problem: the
// q-sorted sample, the box-filtered evaluation points and the unrestricted
// density estimate at those points.
struct EvalContext {
  QSorted qs;
  KernelScale scale;
  const KernelConfig* config = nullptr;
  std::vector<Eigen::Index> eval;  // sorted-row indices with a(X)=1
  Eigen::VectorXd fhat;            // unrestricted density, unclamped
  Eigen::VectorXd feval_q;         // q at eval points
  Eigen::VectorXd feval_clamped;   // max(fhat, density_floor)

  Eigen::Index n() const { return qs.n(); }
  Eigen::Index n_eval() const { return static_cast<Eigen::Index>(eval.size()); }
};

constexpr Eigen::Index kEvalBlock = 256;

EvalContext build_context(const Sample& sample, const KernelConfig& config,
                          const WeightBox& box) {
  sample.validate();
  config.validate();
  box.validate();
  if (sample.p() != config.dim_p) {
    throw DomainError("inference: covariate dimension mismatch with config");
  }
  if (box.lower.size() != sample.p()) {
    throw DomainError("inference: weight box dimension mismatch");
  }
  EvalContext ctx;
  ctx.qs = QSorted::build(sample);
  ctx.scale = KernelScale::from(config, ctx.qs.n());
  ctx.config = &config;
  for (Eigen::Index i = 0; i < ctx.qs.n(); ++i) {
    if (weight(ctx.qs.x.row(i).transpose(), box) == 1) ctx.eval.push_back(i);
  }
  const Eigen::Index ne = ctx.n_eval();
  ctx.fhat.resize(ne);
  ctx.feval_q.resize(ne);
  ctx.feval_clamped.resize(ne);
  const Eigen::Index n = ctx.qs.n();
  const Eigen::Index blocks = (ne + kEvalBlock - 1) / kEvalBlock;
  parallel::for_each_index(static_cast<int>(blocks), [&](int bi) {
    std::vector<double> krow(static_cast<std::size_t>(n));
    const Eigen::Index start = bi * kEvalBlock;
    const Eigen::Index stop = std::min(start + kEvalBlock, ne);
    for (Eigen::Index e = start; e < stop; ++e) {
      const Eigen::Index row = ctx.eval[e];
      detail::kernel_row(ctx.qs, row, config.h, 0, n, krow.data());
      double sk = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) sk += krow[i];
      ctx.fhat[e] = sk * ctx.scale.inv_nhp;
      ctx.feval_q[e] = ctx.qs.q[row];
      ctx.feval_clamped[e] = std::max(ctx.fhat[e], config.density_floor);
    }
  });
  return ctx;
}

// Density, NW mean and conditional variance of each requested interval at
// every evaluation point.
struct StatsTable {
  std::vector<Eigen::VectorXd> f, m, mc, s2;
};

StatsTable compute_interval_stats(const EvalContext& ctx,
                                  const std::vector<QSorted::Range>& ranges) {
  StatsTable table;
  const Eigen::Index ne = ctx.n_eval();
  const std::size_t k = ranges.size();
  table.f.assign(k, Eigen::VectorXd::Zero(ne));
  table.m.assign(k, Eigen::VectorXd::Zero(ne));
  table.mc.assign(k, Eigen::VectorXd::Zero(ne));
  table.s2.assign(k, Eigen::VectorXd::Zero(ne));
  if (ne == 0 || k == 0) return table;
  Eigen::Index span_b = ranges[0].b, span_e = ranges[0].e;
  for (const auto& r : ranges) {
    span_b = std::min(span_b, r.b);
    span_e = std::max(span_e, r.e);
  }
  const Eigen::Index blocks = (ne + kEvalBlock - 1) / kEvalBlock;
  parallel::for_each_index(static_cast<int>(blocks), [&](int bi) {
    std::vector<double> krow(static_cast<std::size_t>(span_e - span_b));
    const Eigen::Index start = bi * kEvalBlock;
    const Eigen::Index stop = std::min(start + kEvalBlock, ne);
    for (Eigen::Index e = start; e < stop; ++e) {
      const Eigen::Index row = ctx.eval[e];
      detail::kernel_row(ctx.qs, row, ctx.config->h, span_b, span_e,
                         krow.data());
      const double y_center = ctx.qs.y[row];
      for (std::size_t j = 0; j < k; ++j) {
        const PointStats st = detail::interval_stats(
            krow.data(), span_b, ctx.qs, ranges[j], ctx.scale, y_center);
        table.f[j][e] = st.f;
        table.m[j][e] = st.m;
        table.mc[j][e] = st.mc;
        table.s2[j][e] = st.s2;
      }
    }
  });
  return table;
}

// Interval layout for one candidate set within a regime: the regime itself,
// the left/right splits of each candidate and the between-candidate gaps.
struct IntervalLayout {
  std::vector<QSorted::Range> ranges;
  int regime = 0;
  std::vector<int> left;                  // [lo, tau_k)
  std::vector<int> right;                 // [tau_k, hi)
  std::vector<std::vector<int>> between;  // [tau_l, tau_k), l < k

  static IntervalLayout build(const QSorted& qs, const RegimeInterval& regime,
                              const std::vector<double>& taus) {
    IntervalLayout lay;
    const auto r = qs.range(regime);
    const int m = static_cast<int>(taus.size());
    lay.ranges.push_back(r);
    lay.regime = 0;
    std::vector<Eigen::Index> cuts(m);
    for (int k = 0; k < m; ++k) cuts[k] = qs.lower(taus[k]);
    lay.left.resize(m);
    lay.right.resize(m);
    for (int k = 0; k < m; ++k) {
      lay.left[k] = static_cast<int>(lay.ranges.size());
      lay.ranges.push_back({r.b, cuts[k]});
      lay.right[k] = static_cast<int>(lay.ranges.size());
      lay.ranges.push_back({cuts[k], r.e});
    }
    lay.between.assign(m, std::vector<int>(m, -1));
    for (int l = 0; l < m; ++l) {
      for (int k = l + 1; k < m; ++k) {
        lay.between[l][k] = static_cast<int>(lay.ranges.size());
        lay.ranges.push_back({cuts[l], cuts[k]});
      }
    }
    return lay;
  }
};

// Accumulators of the candidate-level statistics over evaluation points.
struct CandidateStats {
  Eigen::VectorXd gamma;   // Gamma-tilde per candidate
  Eigen::VectorXd xi2;     // second bias component per candidate
  Eigen::VectorXd s22;     // second variance component per candidate
  double xi1 = 0.0;
  double s21 = 0.0;
};

CandidateStats aggregate_candidates(const EvalContext& ctx,
                                    const IntervalLayout& lay,
                                    const StatsTable& st,
                                    const std::vector<double>& taus) {
  const int m = static_cast<int>(taus.size());
  const Eigen::Index ne = ctx.n_eval();
  CandidateStats out;
  out.gamma = Eigen::VectorXd::Zero(m);
  out.xi2 = Eigen::VectorXd::Zero(m);
  out.s22 = Eigen::VectorXd::Zero(m);
  const auto& fR = st.f[lay.regime];
  const auto& mR = st.mc[lay.regime];
  const auto& s2R = st.s2[lay.regime];
  const double floor = ctx.config->density_floor;
  const auto range_r = lay.ranges[lay.regime];
  for (Eigen::Index e = 0; e < ne; ++e) {
    const double fcl = ctx.feval_clamped[e];
    const double fRcl = std::max(fR[e], floor);
    out.xi1 += s2R[e] / fcl;
    out.s21 += s2R[e] * s2R[e] / fcl;
    const double qe = ctx.feval_q[e];
    const bool in_regime = ctx.eval[e] >= range_r.b && ctx.eval[e] < range_r.e;
    for (int k = 0; k < m; ++k) {
      const int ia = lay.left[k];
      const int ic = lay.right[k];
      if (in_regime) {
        const double fit = qe < taus[k] ? st.mc[ia][e] : st.mc[ic][e];
        const double diff = mR[e] - fit;
        out.gamma[k] += diff * diff;
      }
      const double wa = 1.0 - 2.0 * st.f[ia][e] / fRcl;
      const double wc = 1.0 - 2.0 * st.f[ic][e] / fRcl;
      out.xi2[k] += (wa * st.s2[ia][e] + wc * st.s2[ic][e]) / fcl;
      out.s22[k] += (wa * st.s2[ia][e] * st.s2[ia][e] +
                     wc * st.s2[ic][e] * st.s2[ic][e]) / fcl;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(ctx.n());
  out.gamma *= inv_n;
  out.xi2 *= inv_n;
  out.s22 *= inv_n;
  out.xi1 *= inv_n;
  out.s21 *= inv_n;
  return out;
}

// The nine covariance terms for the ordered pair (l, k) of the layout.
std::array<double, 9> cov_terms_from_stats(const EvalContext& ctx,
                                           const IntervalLayout& lay,
                                           const StatsTable& st, int l, int k) {
  const double floor = ctx.config->density_floor;
  const auto& fR = st.f[lay.regime];
  const auto& s2R = st.s2[lay.regime];
  const auto& fA = st.f[lay.left[l]];
  const auto& s2A = st.s2[lay.left[l]];
  const auto& fD = st.f[lay.left[k]];
  const auto& s2D = st.s2[lay.left[k]];
  const auto& fE = st.f[lay.right[l]];
  const auto& s2E = st.s2[lay.right[l]];
  const auto& fC = st.f[lay.right[k]];
  const auto& s2C = st.s2[lay.right[k]];
  const auto& fB = st.f[lay.between[l][k]];
  const auto& s2B = st.s2[lay.between[l][k]];
  std::array<double, 9> c{};
  const Eigen::Index ne = ctx.n_eval();
  for (Eigen::Index e = 0; e < ne; ++e) {
    const double fcl = ctx.feval_clamped[e];
    const double fRcl = std::max(fR[e], floor);
    const double fDcl = std::max(fD[e], floor);
    const double fEcl = std::max(fE[e], floor);
    c[0] += s2R[e] * s2R[e] / fcl;
    c[1] += -2.0 * (s2R[e] * s2D[e] * (fD[e] / fRcl) +
                    s2R[e] * s2C[e] * (fC[e] / fRcl)) / fcl;
    c[2] += (s2D[e] * s2D[e] * (fD[e] / fRcl) +
             s2C[e] * s2C[e] * (fC[e] / fRcl)) / fcl;
    c[3] += -2.0 * (s2R[e] * s2A[e] * (fA[e] / fRcl) +
                    s2R[e] * s2E[e] * (fE[e] / fRcl)) / fcl;
    c[4] += 4.0 * (s2R[e] * s2A[e] * (fA[e] / fcl) +
                   s2R[e] * s2B[e] * (fB[e] / fRcl) +
                   s2R[e] * s2C[e] * (fC[e] / fRcl)) / fcl;
    c[5] += -2.0 * (s2D[e] * s2A[e] * (fA[e] / fcl) +
                    s2D[e] * s2B[e] * (fB[e] / fRcl) +
                    s2C[e] * s2C[e] * (fC[e] / fRcl)) / fcl;
    c[6] += (s2A[e] * s2A[e] * (fA[e] / fRcl) +
             s2E[e] * s2E[e] * (fE[e] / fRcl)) / fcl;
    c[7] += -2.0 * (s2A[e] * s2A[e] * (fA[e] / fcl) +
                    s2C[e] * s2B[e] * (fB[e] / fRcl) +
                    s2E[e] * s2C[e] * (fC[e] / fRcl)) / fcl;
    c[8] += (s2A[e] * s2A[e] * (fA[e] / fDcl) +
             s2B[e] * s2B[e] * (fB[e] * fB[e] / (fDcl * fEcl)) +
             s2C[e] * s2C[e] * (fC[e] / fEcl)) / fcl;
  }
  const double inv_n = 1.0 / static_cast<double>(ctx.n());
  for (double& v : c) v *= inv_n;
  return c;
}

CandidateGrid make_candidate_grid(const QSorted& qs, const RegimeInterval& regime,
                                  int m) {
  regime.validate();
  if (m < 1) throw DomainError("candidate grid needs m >= 1");
  const auto r = qs.range(regime);
  CandidateGrid grid;
  grid.regime = regime;
  if (r.count() < 2) {
    throw TestError("no viable candidates: regime " + regime.str() +
                    " is too thin");
  }
  // Sentinel bounds are replaced by interior Q quantiles of the regime.
  // Candidates near the observed extremes have near-zero variance brackets,
  // which turns the estimated candidate correlations into garbage.
  const Eigen::Index trim = static_cast<Eigen::Index>(
      std::floor(kTestGridTrim * static_cast<double>(r.count())));
  const double lo =
      std::isfinite(regime.lo) ? regime.lo : qs.q[r.b + trim];
  const double hi =
      std::isfinite(regime.hi) ? regime.hi : qs.q[r.e - 1 - trim];
  if (!(hi > lo)) {
    throw TestError("no viable candidates: threshold variable is degenerate in " +
                    regime.str());
  }
  const double step = (hi - lo) / static_cast<double>(m + 1);
  grid.taus.resize(m);
  for (int i = 0; i < m; ++i) grid.taus[i] = lo + step * (i + 1);
  return grid;
}

RegimeTestResult regime_test_with_context(const EvalContext& ctx,
                                          const RegimeInterval& regime, int m) {
  const KernelConfig& config = *ctx.config;
  RegimeTestResult result;
  result.grid = make_candidate_grid(ctx.qs, regime, m);
  const auto r = ctx.qs.range(regime);

  // Candidates whose splits are too thin are dropped, not fatal.
  std::vector<int> used;
  std::vector<double> taus;
  for (int k = 0; k < m; ++k) {
    const Eigen::Index cut = ctx.qs.lower(result.grid.taus[k]);
    if (cut - r.b >= config.min_regime_obs &&
        r.e - cut >= config.min_regime_obs) {
      used.push_back(k);
      taus.push_back(result.grid.taus[k]);
    }
  }
  if (used.empty()) {
    throw TestError("no viable candidates in regime " + regime.str());
  }

  const IntervalLayout lay = IntervalLayout::build(ctx.qs, regime, taus);
  const StatsTable st = compute_interval_stats(ctx, lay.ranges);
  const CandidateStats agg = aggregate_candidates(ctx, lay, st, taus);

  const int p = config.dim_p;
  const double c2 = kernel_c2(p);
  const double c3 = kernel_c3(p);
  const double n = static_cast<double>(ctx.n());
  const double h_half = std::pow(config.h, 0.5 * p);

  const int mm = static_cast<int>(taus.size());
  Eigen::VectorXd xi(mm), sig2(mm), delta(mm), bracket(mm);
  for (int k = 0; k < mm; ++k) {
    xi[k] = c2 * (agg.xi1 + agg.xi2[k]);
    bracket[k] = agg.s21 + agg.s22[k];
    sig2[k] = 2.0 * c3 * bracket[k];
  }
  // Candidates with a degenerate variance, in absolute terms or relative to
  // the strongest candidate, are dropped like thin splits.
  double max_bracket = 0.0;
  for (int k = 0; k < mm; ++k) {
    if (sig2[k] > kVarianceFloor) max_bracket = std::max(max_bracket, bracket[k]);
  }
  std::vector<int> live;
  for (int k = 0; k < mm; ++k) {
    if (sig2[k] > kVarianceFloor && bracket[k] >= kBracketFloorShare * max_bracket) {
      live.push_back(k);
    }
  }
  if (live.empty()) {
    throw TestError("no viable candidates: degenerate variance in regime " +
                    regime.str());
  }
  const int ml = static_cast<int>(live.size());
  result.used.resize(ml);
  result.gamma_tilde.resize(ml);
  result.xi_hat.resize(ml);
  result.sigma2_hat.resize(ml);
  result.delta_hat.resize(ml);
  for (int i = 0; i < ml; ++i) {
    const int k = live[i];
    result.used[i] = used[k];
    result.gamma_tilde[i] = agg.gamma[k];
    result.xi_hat[i] = xi[k];
    result.sigma2_hat[i] = sig2[k];
    result.delta_hat[i] =
        (n * h_half * agg.gamma[k] - xi[k] / h_half) / std::sqrt(sig2[k]);
  }

  // Correlation matrix: unit diagonal by construction, the nine-term
  // covariance sum off the diagonal, mirrored exactly. An estimate outside
  // [-1, 1] means the normalization has broken down (gross misspecification
  // of the null); decorrelating against such a matrix can flip the sign of
  // the statistic, so the whole matrix falls back to the identity instead.
  result.sigma_matrix = Eigen::MatrixXd::Identity(ml, ml);
  bool valid = true;
  for (int a = 0; a < ml && valid; ++a) {
    for (int b = a + 1; b < ml && valid; ++b) {
      const int l = live[a];
      const int k = live[b];
      const auto terms = cov_terms_from_stats(ctx, lay, st, l, k);
      double sum = 0.0;
      for (double t : terms) sum += t;
      const double cov = sum / std::sqrt(bracket[l] * bracket[k]);
      if (std::fabs(cov) > 1.0) {
        valid = false;
        break;
      }
      result.sigma_matrix(a, b) = std::clamp(cov, -kMaxCandidateCorr,
                                             kMaxCandidateCorr);
      result.sigma_matrix(b, a) = result.sigma_matrix(a, b);
    }
  }
  if (!valid) {
    result.sigma_matrix = Eigen::MatrixXd::Identity(ml, ml);
  } else {
    // Shrink toward the identity until the matrix is safely positive
    // definite; see kMinSigmaEigenvalue.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> probe(result.sigma_matrix);
    const double lmin = probe.eigenvalues().minCoeff();
    if (lmin < kMinSigmaEigenvalue) {
      const double w = (kMinSigmaEigenvalue - lmin) / (1.0 - lmin);
      result.sigma_matrix =
          (1.0 - w) * result.sigma_matrix +
          w * Eigen::MatrixXd::Identity(ml, ml);
    }
  }
  const Eigen::MatrixXd root = matrix_inv_sqrt(result.sigma_matrix,
                                               kEigenvalueFloor);
  result.delta_star = root * result.delta_hat;
  result.z = result.delta_star.sum() / std::sqrt(static_cast<double>(ml));
  return result;
}

// Strict split-size check shared by the single-candidate statistics.
void require_split(const EvalContext& ctx, const RegimeInterval& regime,
                   double tau) {
  regime.validate();
  if (!(regime.lo < tau && tau < regime.hi)) {
    throw DomainError("candidate threshold must lie strictly inside the regime");
  }
  const auto r = ctx.qs.range(regime);
  const Eigen::Index cut = ctx.qs.lower(tau);
  if (cut - r.b < ctx.config->min_regime_obs ||
      r.e - cut < ctx.config->min_regime_obs) {
    std::ostringstream msg;
    msg << "thin split at tau=" << tau << " in regime " << regime.str();
    throw TestError(msg.str(), tau);
  }
}

}  // namespace

double gamma_tilde(const Sample& sample, const RegimeInterval& regime,
                   double tau, const KernelConfig& config,
                   const WeightBox& box) {
  const EvalContext ctx = build_context(sample, config, box);
  require_split(ctx, regime, tau);
  const IntervalLayout lay = IntervalLayout::build(ctx.qs, regime, {tau});
  const StatsTable st = compute_interval_stats(ctx, lay.ranges);
  const CandidateStats agg = aggregate_candidates(ctx, lay, st, {tau});
  return agg.gamma[0];
}

double xi_hat(const Sample& sample, const RegimeInterval& regime, double tau,
              const KernelConfig& config, const WeightBox& box) {
  const EvalContext ctx = build_context(sample, config, box);
  require_split(ctx, regime, tau);
  const IntervalLayout lay = IntervalLayout::build(ctx.qs, regime, {tau});
  const StatsTable st = compute_interval_stats(ctx, lay.ranges);
  const CandidateStats agg = aggregate_candidates(ctx, lay, st, {tau});
  return kernel_c2(config.dim_p) * (agg.xi1 + agg.xi2[0]);
}

double sigma2_hat(const Sample& sample, const RegimeInterval& regime,
                  double tau, const KernelConfig& config,
                  const WeightBox& box) {
  const EvalContext ctx = build_context(sample, config, box);
  require_split(ctx, regime, tau);
  const IntervalLayout lay = IntervalLayout::build(ctx.qs, regime, {tau});
  const StatsTable st = compute_interval_stats(ctx, lay.ranges);
  const CandidateStats agg = aggregate_candidates(ctx, lay, st, {tau});
  const double value = 2.0 * kernel_c3(config.dim_p) * (agg.s21 + agg.s22[0]);
  if (!(value > kVarianceFloor)) {
    throw TestError("degenerate variance at tau=" + std::to_string(tau), tau);
  }
  return value;
}

std::array<double, 9> cov_hat_terms(const Sample& sample,
                                    const RegimeInterval& regime, double tau_l,
                                    double tau_k, const KernelConfig& config,
                                    const WeightBox& box) {
  if (!(tau_l < tau_k)) {
    throw DomainError("cov_hat requires tau_l < tau_k");
  }
  const EvalContext ctx = build_context(sample, config, box);
  require_split(ctx, regime, tau_l);
  require_split(ctx, regime, tau_k);
  const Eigen::Index cl = ctx.qs.lower(tau_l);
  const Eigen::Index ck = ctx.qs.lower(tau_k);
  if (ck - cl < config.min_regime_obs) {
    throw TestError("thin split between candidate thresholds", tau_k);
  }
  const IntervalLayout lay = IntervalLayout::build(ctx.qs, regime, {tau_l, tau_k});
  const StatsTable st = compute_interval_stats(ctx, lay.ranges);
  return cov_terms_from_stats(ctx, lay, st, 0, 1);
}

double cov_hat(const Sample& sample, const RegimeInterval& regime,
               double tau_l, double tau_k, const KernelConfig& config,
               const WeightBox& box) {
  if (!(tau_l < tau_k)) {
    throw DomainError("cov_hat requires tau_l < tau_k");
  }
  const EvalContext ctx = build_context(sample, config, box);
  require_split(ctx, regime, tau_l);
  require_split(ctx, regime, tau_k);
  const Eigen::Index cl = ctx.qs.lower(tau_l);
  const Eigen::Index ck = ctx.qs.lower(tau_k);
  if (ck - cl < config.min_regime_obs) {
    throw TestError("thin split between candidate thresholds", tau_k);
  }
  const IntervalLayout lay = IntervalLayout::build(ctx.qs, regime, {tau_l, tau_k});
  const StatsTable st = compute_interval_stats(ctx, lay.ranges);
  const CandidateStats agg = aggregate_candidates(ctx, lay, st, {tau_l, tau_k});
  const double bl = agg.s21 + agg.s22[0];
  const double bk = agg.s21 + agg.s22[1];
  if (!(bl > 0.0) || !(bk > 0.0)) {
    throw TestError("degenerate variance in covariance normalization", tau_k);
  }
  const auto terms = cov_terms_from_stats(ctx, lay, st, 0, 1);
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum / std::sqrt(bl * bk);
}

Eigen::MatrixXd matrix_inv_sqrt(const Eigen::Ref<const Eigen::MatrixXd>& m,
                                double eig_floor) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DomainError("matrix_inv_sqrt: matrix must be square");
  }
  if (!(eig_floor > 0.0)) {
    throw DomainError("matrix_inv_sqrt: eigenvalue floor must be positive");
  }
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8) {
    throw DomainError("matrix_inv_sqrt: input is not symmetric");
  }
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw DomainError("matrix_inv_sqrt: eigendecomposition failed");
  }
  Eigen::VectorXd inv_root = solver.eigenvalues();
  for (Eigen::Index i = 0; i < inv_root.size(); ++i) {
    inv_root[i] = 1.0 / std::sqrt(std::max(inv_root[i], eig_floor));
  }
  return solver.eigenvectors() * inv_root.asDiagonal() *
         solver.eigenvectors().transpose();
}

RegimeTestResult regime_test(const Sample& sample, const RegimeInterval& regime,
                             int m, const KernelConfig& config,
                             const WeightBox& box) {
  const EvalContext ctx = build_context(sample, config, box);
  return regime_test_with_context(ctx, regime, m);
}

double critical_value(int k, double alpha) {
  if (k < 1) throw DomainError("critical_value: k must be >= 1");
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw DomainError("critical_value: alpha must lie in (0, 1)");
  }
  return normal_quantile(std::pow(1.0 - alpha, 1.0 / static_cast<double>(k)));
}

double p_value(double f_stat, int k) {
  if (k < 1) throw DomainError("p_value: k must be >= 1");
  if (std::isnan(f_stat)) throw DomainError("p_value: NaN statistic");
  return 1.0 - std::pow(normal_cdf(f_stat), k);
}

SequentialTestReport sequential_test(const Sample& sample,
                                     const RegimePartition& partition, int m,
                                     double alpha, const KernelConfig& config,
                                     const WeightBox& box) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw DomainError("sequential_test: alpha must lie in (0, 1)");
  }
  const EvalContext ctx = build_context(sample, config, box);
  SequentialTestReport report;
  report.s_null = partition.size();
  report.alpha = alpha;
  for (int j = 0; j < partition.n_regimes(); ++j) {
    const RegimeInterval regime = partition.regime(j);
    try {
      report.per_regime.push_back(regime_test_with_context(ctx, regime, m));
    } catch (const TestError& err) {
      report.skipped.push_back({regime, err.what()});
    }
  }
  if (report.per_regime.empty()) {
    throw TestError("all regimes skipped: no testable regime");
  }
  report.f_stat = report.per_regime[0].z;
  for (const auto& r : report.per_regime) {
    report.f_stat = std::max(report.f_stat, r.z);
  }
  const int k = static_cast<int>(report.per_regime.size());
  report.critical_value = critical_value(k, alpha);
  report.reject = report.f_stat > report.critical_value;
  return report;
}

}  // namespace npthresh
