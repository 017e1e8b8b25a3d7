#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "npthresh/estimators.hpp"
#include "npthresh/montecarlo.hpp"
#include "npthresh/parallel.hpp"
#include "npthresh/search.hpp"

using namespace npthresh;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

KernelConfig sim_config(Eigen::Index n) {
  return KernelConfig::resolved(n, 1, 1.0, 4.25, 1.0);
}

}  // namespace

TEST_CASE("SearchConfig validation") {
  SearchConfig bad;
  bad.grid_points = 2;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = SearchConfig{};
  bad.trim_fraction = 0.5;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = SearchConfig{};
  bad.alpha = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("estimate_one_threshold returns the first grid point on ties") {
  RngStream rng(5, 0);
  Sample s = dgp_three_thresholds(100, rng);
  s.y.setConstant(2.5);  // constant response: every split has SSR zero
  const KernelConfig config = sim_config(100);
  const SearchConfig search;
  const auto [gamma_hat, ssr_min] = estimate_one_threshold(
      s, RegimePartition(), {-kInf, kInf}, config, search);
  CHECK(ssr_min == 0.0);
  // The lowest candidate is the Q order statistic at the trimming floor.
  std::vector<double> q(s.q.data(), s.q.data() + s.q.size());
  std::sort(q.begin(), q.end());
  const int min_side = std::max<int>(
      static_cast<int>(0.05 * 100), config.min_regime_obs);
  CHECK(gamma_hat == q[min_side]);
}

TEST_CASE("estimate_one_threshold finds the dominant threshold at n=3000") {
  RngStream rng(77, 0);
  const Sample s = dgp_three_thresholds(3000, rng);
  const KernelConfig config = sim_config(3000);
  const auto [gamma_hat, ssr_min] = estimate_one_threshold(
      s, RegimePartition(), {-kInf, kInf}, config, SearchConfig{});
  CHECK(gamma_hat == Catch::Approx(0.5).margin(0.05));
  CHECK(ssr_min > 0.0);
}

TEST_CASE("estimate_one_threshold fails on an interval that is too thin") {
  RngStream rng(9, 0);
  const Sample s = dgp_three_thresholds(200, rng);
  const KernelConfig config = sim_config(200);
  CHECK_THROWS_AS(estimate_one_threshold(s, RegimePartition(), {3.0, kInf},
                                          config, SearchConfig{}),
                  SearchError);
}

TEST_CASE("estimate_one_threshold rejects straddling intervals") {
  RngStream rng(11, 0);
  const Sample s = dgp_three_thresholds(400, rng);
  const KernelConfig config = sim_config(400);
  CHECK_THROWS_AS(estimate_one_threshold(s, RegimePartition({0.0}),
                                          {-1.0, 1.0}, config, SearchConfig{}),
                  DomainError);
}

TEST_CASE("detect recovers the three thresholds of the strong DGP") {
  RngStream rng(20260809, 1);
  const Sample s = dgp_three_thresholds(1500, rng);
  const KernelConfig config = sim_config(1500);
  SearchConfig search;
  const DetectionResult result = detect(s, config, search, default_sim_box());
  REQUIRE(result.s_hat >= 3);
  // The three true thresholds must all be matched by some estimate.
  for (double truth : {-0.7, 0.15, 0.5}) {
    double best = kInf;
    for (double g : result.gammas) best = std::min(best, std::fabs(g - truth));
    CHECK(best < 0.1);
  }
  CHECK((result.reports.size() == result.round_ssr.size() + 1 ||
         result.cap_reached));
  // Inserting an accepted threshold never increased the SSR.
  const double base = ssr(s, RegimePartition(), config);
  REQUIRE(!result.round_ssr.empty());
  CHECK(result.round_ssr.front() <= base);
  for (std::size_t r = 1; r < result.round_ssr.size(); ++r) {
    CHECK(result.round_ssr[r] <= result.round_ssr[r - 1]);
  }
}

TEST_CASE("detect is deterministic and thread-count invariant") {
  RngStream rng(33, 0);
  const Sample s = dgp_three_thresholds(800, rng);
  const KernelConfig config = sim_config(800);
  const SearchConfig search;
  const WeightBox box = default_sim_box();

  parallel::set_thread_count(1);
  const DetectionResult a = detect(s, config, search, box);
  const DetectionResult b = detect(s, config, search, box);
  parallel::set_thread_count(4);
  const DetectionResult c = detect(s, config, search, box);
  parallel::set_thread_count(0);

  REQUIRE(a.s_hat == b.s_hat);
  REQUIRE(a.s_hat == c.s_hat);
  for (int i = 0; i < a.s_hat; ++i) {
    CHECK(a.gammas[i] == b.gammas[i]);
    CHECK(a.gammas[i] == c.gammas[i]);
  }
  REQUIRE(a.reports.size() == c.reports.size());
  for (std::size_t r = 0; r < a.reports.size(); ++r) {
    CHECK(a.reports[r].f_stat == c.reports[r].f_stat);
  }
  for (std::size_t r = 0; r < a.round_ssr.size(); ++r) {
    CHECK(a.round_ssr[r] == c.round_ssr[r]);
  }
}

TEST_CASE("detect refuses tiny samples") {
  RngStream rng(2, 0);
  const Sample s = dgp_three_thresholds(30, rng);
  KernelConfig config = sim_config(30);
  CHECK_THROWS_AS(detect(s, config, SearchConfig{}, default_sim_box()),
                  DomainError);
}

TEST_CASE("detect honors the threshold cap") {
  RngStream rng(20260809, 1);
  const Sample s = dgp_three_thresholds(1500, rng);
  const KernelConfig config = sim_config(1500);
  SearchConfig search;
  search.max_thresholds = 1;
  const DetectionResult result = detect(s, config, search, default_sim_box());
  CHECK(result.s_hat == 1);
  CHECK(result.cap_reached);
}
