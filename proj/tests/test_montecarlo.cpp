#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "npthresh/estimators.hpp"
#include "npthresh/montecarlo.hpp"
#include "npthresh/parallel.hpp"
#include "npthresh/search.hpp"

using namespace npthresh;

TEST_CASE("dgp_null moments match the construction") {
  RngStream rng(123, 0);
  const Sample s = dgp_null(100000, rng);
  const double mean_x = s.x.col(0).mean();
  const double var_x =
      (s.x.col(0).array() - mean_x).square().sum() / (s.n() - 1);
  CHECK(var_x == Catch::Approx(1.0).margin(0.02));
  const double mean_q = s.q.mean();
  const double cov_xq =
      ((s.x.col(0).array() - mean_x) * (s.q.array() - mean_q)).sum() /
      (s.n() - 1);
  const double var_q = (s.q.array() - mean_q).square().sum() / (s.n() - 1);
  CHECK(cov_xq / std::sqrt(var_x * var_q) ==
        Catch::Approx(std::sqrt(0.2)).margin(0.02));

  // E[Y | X near 0] = exp(0) = 1.
  double sum = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < s.n(); ++i) {
    if (std::fabs(s.x(i, 0)) < 0.05) {
      sum += s.y[i];
      ++count;
    }
  }
  REQUIRE(count > 1000);
  CHECK(sum / count == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("dgp_three_thresholds regime means and noise scale") {
  RngStream rng(321, 0);
  const Sample s = dgp_three_thresholds(200000, rng);
  // Conditional means at X near 0 on both sides of the Q=0.15 threshold:
  // 0.5 + exp(0) = 1.5 below, 2 + exp(0) = 3 above.
  double below = 0.0, above = 0.0;
  int nb = 0, na = 0;
  for (Eigen::Index i = 0; i < s.n(); ++i) {
    if (std::fabs(s.x(i, 0)) > 0.05) continue;
    if (s.q[i] >= 0.05 && s.q[i] < 0.15) {
      below += s.y[i];
      ++nb;
    } else if (s.q[i] >= 0.15 && s.q[i] < 0.25) {
      above += s.y[i];
      ++na;
    }
  }
  REQUIRE(nb > 100);
  REQUIRE(na > 100);
  CHECK(below / nb == Catch::Approx(1.5).margin(0.1));
  CHECK(above / na == Catch::Approx(3.0).margin(0.1));
  CHECK(above / na - below / nb == Catch::Approx(1.5).margin(0.1));

  // Residual standard deviation at X near 0 is sqrt(0.5625) = 0.75.
  double rss = 0.0;
  int nr = 0;
  for (Eigen::Index i = 0; i < s.n(); ++i) {
    const double x = s.x(i, 0);
    if (std::fabs(x) > 0.05) continue;
    double mean;
    const double q = s.q[i];
    if (q < -0.7) {
      mean = 1.0 + std::exp(-0.5 * x);
    } else if (q < 0.15) {
      mean = 0.5 + std::exp(-0.8 * x);
    } else if (q < 0.5) {
      mean = 2.0 + std::exp(-0.1 * x);
    } else {
      mean = std::exp(-0.25 * x);
    }
    rss += (s.y[i] - mean) * (s.y[i] - mean);
    ++nr;
  }
  CHECK(std::sqrt(rss / nr) == Catch::Approx(0.75).margin(0.02));
}

TEST_CASE("dgps are reproducible from the stream key") {
  RngStream a(9, 4), b(9, 4);
  const Sample s1 = dgp_three_thresholds(500, a);
  const Sample s2 = dgp_three_thresholds(500, b);
  CHECK(s1.y == s2.y);
  CHECK(s1.x == s2.x);
  CHECK(s1.q == s2.q);
  RngStream c(9, 5);
  const Sample s3 = dgp_three_thresholds(500, c);
  CHECK(s1.y != s3.y);
}

TEST_CASE("size_experiment with one replication is a Bernoulli draw") {
  SimConfig sim;
  sim.n = 200;
  sim.reps = 1;
  sim.seed = 5;
  const SizeTable t = size_experiment(sim);
  for (double rate : t.rejection_rate) {
    CHECK((rate == 0.0 || rate == 1.0));
  }
  CHECK_THROWS_AS([&] {
    SimConfig bad;
    bad.reps = 0;
    bad.validate();
  }(), DomainError);
}

TEST_CASE("size_experiment smoke run stays near the nominal band") {
  SimConfig sim;
  sim.n = 500;
  sim.reps = 40;
  sim.seed = 99;
  const SizeTable t = size_experiment(sim);
  CHECK(t.errors == 0);
  REQUIRE(t.rejection_rate.size() == 3);
  for (std::size_t i = 0; i < t.alphas.size(); ++i) {
    CHECK(t.monte_carlo_se[i] ==
          Catch::Approx(std::sqrt(t.rejection_rate[i] *
                                  (1.0 - t.rejection_rate[i]) / sim.reps))
              .margin(1e-12));
    CHECK(t.rejection_rate[i] <= 0.35);
  }
  CHECK(!t.to_text().empty());
}

TEST_CASE("estimation_experiment satisfies the MSE identity exactly") {
  SimConfig sim;
  sim.n = 500;
  sim.reps = 12;
  sim.seed = 31;
  const EstimationTable t = estimation_experiment(sim);
  CHECK(t.errors == 0);
  for (int r = 0; r < 3; ++r) {
    const double bias = t.mean[r] - t.truth[r];
    CHECK(t.mse[r] == Catch::Approx(bias * bias + t.se[r] * t.se[r])
                          .margin(1e-12));
  }
  CHECK(t.truth[0] == 0.5);
  CHECK(t.truth[1] == 0.15);
  CHECK(t.truth[2] == -0.7);
  CHECK(!t.to_text().empty());
}

TEST_CASE("estimation MSE shrinks with the sample size") {
  SimConfig small;
  small.n = 500;
  small.reps = 20;
  small.seed = 2026;
  const EstimationTable a = estimation_experiment(small);
  SimConfig big = small;
  big.n = 1500;
  const EstimationTable b = estimation_experiment(big);
  for (int r = 0; r < 3; ++r) {
    CHECK(b.mse[r] < a.mse[r]);
  }
}

TEST_CASE("experiments are invariant to the worker count") {
  SimConfig sim;
  sim.n = 300;
  sim.reps = 16;
  sim.seed = 77;
  parallel::set_thread_count(1);
  const SizeTable s1 = size_experiment(sim);
  const EstimationTable e1 = estimation_experiment(sim);
  parallel::set_thread_count(4);
  const SizeTable s2 = size_experiment(sim);
  const EstimationTable e2 = estimation_experiment(sim);
  parallel::set_thread_count(0);
  CHECK(s1.rejection_rate == s2.rejection_rate);
  for (int r = 0; r < 3; ++r) {
    CHECK(e1.mean[r] == e2.mean[r]);
    CHECK(e1.se[r] == e2.se[r]);
    CHECK(e1.mse[r] == e2.mse[r]);
  }
}

TEST_CASE("single-threshold SSR search lands near a true threshold") {
  // On the three-threshold DGP the first-round minimizer should sit within
  // one grid step of one of the truths in nearly every replication.
  const int reps = 60;
  int near = 0;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream rng(515, rep);
    const Sample s = dgp_three_thresholds(1000, rng);
    const KernelConfig config = KernelConfig::resolved(1000, 1, 1.0, 4.25, 1.0);
    SearchConfig search;
    search.grid_points = 60;
    const auto [gamma_hat, ssr_min] = estimate_one_threshold(
        s, RegimePartition(), {-std::numeric_limits<double>::infinity(),
                               std::numeric_limits<double>::infinity()},
        config, search);
    (void)ssr_min;
    // A 60-point quantile grid over the trimmed sample spans roughly 0.06
    // quantile units per step; translate to a generous value window.
    for (double truth : {-0.7, 0.15, 0.5}) {
      if (std::fabs(gamma_hat - truth) < 0.12) {
        ++near;
        break;
      }
    }
  }
  CHECK(near >= static_cast<int>(0.9 * reps));
}

TEST_CASE("sequential test has power against the three-threshold DGP") {
  // Rejection of s=0 in at least 95% of replications at n=1000.
  const int reps = 200;
  int rejections = 0;
  int errors = 0;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream rng(818, rep);
    const Sample s = dgp_three_thresholds(1000, rng);
    const KernelConfig config = KernelConfig::resolved(1000, 1, 1.0, 4.25, 1.0);
    try {
      const SequentialTestReport report = sequential_test(
          s, RegimePartition(), 7, 0.05, config, default_sim_box());
      if (report.reject) ++rejections;
    } catch (const Error&) {
      ++errors;
    }
  }
  CHECK(errors == 0);
  CHECK(rejections >= static_cast<int>(0.95 * reps));
}

// Full-scale reference check; excluded from the default run ("[.]" tag).
// Run explicitly: npthresh_search_tests "[heavy]"
TEST_CASE("empirical size at n=2000 tracks the reference table", "[.][heavy]") {
  SimConfig sim;
  sim.n = 2000;
  sim.reps = 200;
  sim.seed = 20260809;
  const SizeTable t = size_experiment(sim);
  REQUIRE(t.alphas.size() == 3);
  CHECK(t.rejection_rate[0] == Catch::Approx(0.011).margin(0.03));
  CHECK(t.rejection_rate[1] == Catch::Approx(0.051).margin(0.03));
  CHECK(t.rejection_rate[2] == Catch::Approx(0.086).margin(0.03));

  // Size approaches the nominal level as n grows (loose band at 5%).
  SimConfig small = sim;
  small.n = 500;
  small.alphas = {0.05};
  const SizeTable t500 = size_experiment(small);
  small.n = 1000;
  const SizeTable t1000 = size_experiment(small);
  CHECK(std::fabs(t500.rejection_rate[0] - 0.05) <= 0.04);
  CHECK(std::fabs(t1000.rejection_rate[0] - 0.05) <= 0.03);
  CHECK(std::fabs(t.rejection_rate[1] - 0.05) <= 0.03);
}
