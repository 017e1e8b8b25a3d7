#include "npthresh/search.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "engine.hpp"
#include "npthresh/parallel.hpp"

namespace npthresh {

namespace detail {
double regime_rss(const QSorted& qs, QSorted::Range r, const KernelConfig& config,
                  const KernelScale& scale);
}

void SearchConfig::validate() const {
  if (grid_points < 3) throw DomainError("search grid needs at least 3 points");
  if (!(trim_fraction >= 0.0) || trim_fraction >= 0.5) {
    throw DomainError("trim fraction must lie in [0, 0.5)");
  }
  if (max_thresholds < 1) throw DomainError("max_thresholds must be >= 1");
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw DomainError("alpha must lie in (0, 1)");
  }
  if (m < 1) throw DomainError("test grid size m must be >= 1");
}

namespace {

using detail::KernelScale;
using detail::QSorted;

struct GridCandidates {
  std::vector<double> gamma;       // strictly increasing candidate values
  std::vector<Eigen::Index> cut;   // split position within the containing regime
};

// Candidate thresholds at trimmed empirical quantiles of Q inside the
// interval, deduplicated and filtered so both sides of the containing
// regime keep at least min_regime_obs observations.
GridCandidates build_grid(const QSorted& qs, const RegimeInterval& interval,
                          QSorted::Range creg, const KernelConfig& config,
                          const SearchConfig& search) {
  const auto r = qs.range(interval);
  const Eigen::Index n_i = r.count();
  const Eigen::Index trim = static_cast<Eigen::Index>(
      std::floor(search.trim_fraction * static_cast<double>(n_i)));
  const Eigen::Index min_side =
      std::max<Eigen::Index>(trim, config.min_regime_obs);
  GridCandidates out;
  if (n_i < 2 * min_side || n_i < 2) return out;
  const Eigen::Index lo_pos = min_side;
  const Eigen::Index hi_pos = n_i - min_side;  // exclusive upper split position
  if (hi_pos < lo_pos) return out;
  const Eigen::Index g = search.grid_points;
  for (Eigen::Index t = 0; t < g; ++t) {
    const double frac =
        g == 1 ? 0.0 : static_cast<double>(t) / static_cast<double>(g - 1);
    const Eigen::Index pos =
        lo_pos + static_cast<Eigen::Index>(
                     std::llround(frac * static_cast<double>(hi_pos - lo_pos)));
    const double gamma = qs.q[r.b + std::min(pos, n_i - 1)];
    const Eigen::Index cut = qs.lower(gamma) - creg.b;
    if (cut < config.min_regime_obs || creg.count() - cut < config.min_regime_obs) {
      continue;
    }
    if (!out.gamma.empty() && gamma == out.gamma.back()) continue;
    out.gamma.push_back(gamma);
    out.cut.push_back(cut);
  }
  return out;
}

// SSR of the containing regime split at every candidate cut, one kernel row
// per observation. Left sums accumulate while walking candidates upward,
// right sums while walking downward, so each row costs O(n + #candidates).
// Fits are centered at the row's own response, matching ssr().
std::vector<double> split_rss(const QSorted& qs, QSorted::Range creg,
                              const std::vector<Eigen::Index>& cuts,
                              const KernelConfig& config,
                              const KernelScale& scale) {
  const Eigen::Index nc = creg.count();
  const int g = static_cast<int>(cuts.size());
  const Eigen::Index block_size = 128;
  const Eigen::Index blocks = (nc + block_size - 1) / block_size;
  std::vector<std::vector<double>> partial(
      static_cast<std::size_t>(blocks), std::vector<double>(g, 0.0));
  parallel::for_each_index(static_cast<int>(blocks), [&](int bi) {
    std::vector<double> krow(static_cast<std::size_t>(nc));
    auto& acc = partial[static_cast<std::size_t>(bi)];
    const Eigen::Index start = creg.b + bi * block_size;
    const Eigen::Index stop = std::min(start + block_size, creg.e);
    for (Eigen::Index e = start; e < stop; ++e) {
      detail::kernel_row(qs, e, config.h, creg.b, creg.e, krow.data());
      const double ye = qs.y[e];
      const Eigen::Index je = e - creg.b;
      // Left fits: candidates with cut > je use the left sub-regime for e.
      double sk = 0.0, skdy = 0.0;
      Eigen::Index col = 0;
      for (int t = 0; t < g; ++t) {
        const Eigen::Index cut = cuts[t];
        for (; col < cut; ++col) {
          const double k = krow[col];
          sk += k;
          skdy += k * (qs.y[creg.b + col] - ye);
        }
        if (je < cut) {
          const double resid = -skdy / std::max(sk, scale.nw_clamp_raw);
          acc[t] += resid * resid;
        }
      }
      // Right fits: candidates with cut <= je use the right sub-regime.
      sk = 0.0;
      skdy = 0.0;
      col = nc - 1;
      for (int t = g - 1; t >= 0; --t) {
        const Eigen::Index cut = cuts[t];
        for (; col >= cut; --col) {
          const double k = krow[col];
          sk += k;
          skdy += k * (qs.y[creg.b + col] - ye);
        }
        if (je >= cut) {
          const double resid = -skdy / std::max(sk, scale.nw_clamp_raw);
          acc[t] += resid * resid;
        }
      }
    }
  });
  std::vector<double> rss(g, 0.0);
  for (const auto& acc : partial) {
    for (int t = 0; t < g; ++t) rss[t] += acc[t];
  }
  return rss;
}

}  // namespace

std::pair<double, double> estimate_one_threshold(const Sample& sample,
                                                 const RegimePartition& fixed,
                                                 const RegimeInterval& interval,
                                                 const KernelConfig& config,
                                                 const SearchConfig& search) {
  sample.validate();
  config.validate();
  search.validate();
  interval.validate();
  const QSorted qs = QSorted::build(sample);
  const KernelScale scale = KernelScale::from(config, qs.n());

  // The interval must not straddle a fixed threshold.
  for (double g : fixed.thresholds()) {
    if (g > interval.lo && g < interval.hi) {
      throw DomainError("search interval straddles a fixed threshold");
    }
  }
  double probe = 0.0;
  if (std::isfinite(interval.lo)) {
    probe = interval.lo;
  } else if (std::isfinite(interval.hi)) {
    probe = std::nextafter(interval.hi, interval.lo);
  }
  const int creg_index = fixed.regime_of(probe);
  const RegimeInterval creg_interval = fixed.regime(creg_index);
  const auto creg = qs.range(creg_interval);

  const GridCandidates grid = build_grid(qs, interval, creg, config, search);
  if (grid.gamma.empty()) {
    throw SearchError("no feasible grid point in " + interval.str());
  }

  // Residual sum over the regimes that do not change with the candidate.
  double fixed_rss = 0.0;
  for (int j = 0; j < fixed.n_regimes(); ++j) {
    if (j == creg_index) continue;
    const RegimeInterval rj = fixed.regime(j);
    const auto range_j = qs.range(rj);
    if (range_j.count() < config.min_regime_obs) {
      std::ostringstream msg;
      msg << "regime " << rj.str() << " holds " << range_j.count()
          << " observations, need " << config.min_regime_obs;
      throw EstimationError(msg.str(), rj.lo, rj.hi);
    }
    fixed_rss += detail::regime_rss(qs, range_j, config, scale);
  }

  const std::vector<double> rss = split_rss(qs, creg, grid.cut, config, scale);
  std::size_t best = 0;
  for (std::size_t t = 1; t < rss.size(); ++t) {
    if (rss[t] < rss[best]) best = t;  // first minimizer wins exact ties
  }
  const double gamma_hat = grid.gamma[best];
  const double total =
      (fixed_rss + rss[best]) / static_cast<double>(sample.n());
  return {gamma_hat, total};
}

DetectionResult detect(const Sample& sample, const KernelConfig& config,
                       const SearchConfig& search, const WeightBox& box) {
  sample.validate();
  config.validate();
  search.validate();
  if (sample.n() < 4 * config.min_regime_obs) {
    std::ostringstream msg;
    msg << "detect needs at least " << 4 * config.min_regime_obs
        << " observations, got " << sample.n();
    throw DomainError(msg.str());
  }
  DetectionResult result;
  RegimePartition partition;
  for (;;) {
    SequentialTestReport report;
    try {
      report = sequential_test(sample, partition, search.m, search.alpha,
                               config, box);
    } catch (const Error& err) {
      throw DetectionAborted(std::string("test round failed: ") + err.what(),
                             std::move(result));
    }
    result.reports.push_back(report);
    for (const auto& s : report.skipped) result.skipped_intervals.push_back(s);
    if (!report.reject) break;
    if (partition.size() >= search.max_thresholds) {
      result.cap_reached = true;
      break;
    }
    // Search every current regime; keep the insertion with the smallest
    // full-partition SSR (smallest value on ties).
    bool have_best = false;
    double best_gamma = 0.0;
    double best_ssr = 0.0;
    for (int j = 0; j < partition.n_regimes(); ++j) {
      try {
        const auto [gamma_hat, ssr_at_min] = estimate_one_threshold(
            sample, partition, partition.regime(j), config, search);
        if (!have_best || ssr_at_min < best_ssr ||
            (ssr_at_min == best_ssr && gamma_hat < best_gamma)) {
          have_best = true;
          best_gamma = gamma_hat;
          best_ssr = ssr_at_min;
        }
      } catch (const SearchError&) {
        // Regime too thin to split further.
      } catch (const EstimationError&) {
      }
    }
    if (!have_best) {
      throw DetectionAborted(
          "test rejected but no regime admits another threshold",
          std::move(result));
    }
    partition = partition.with_inserted(best_gamma);
    result.round_ssr.push_back(best_ssr);
  }
  result.s_hat = partition.size();
  result.gammas = partition.thresholds();
  return result;
}

}  // namespace npthresh
