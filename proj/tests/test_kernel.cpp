#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "npthresh/kernel.hpp"
#include "npthresh/normal.hpp"
#include "npthresh/rng.hpp"

using namespace npthresh;

namespace {
KernelConfig config_p(int p) {
  KernelConfig c;
  c.dim_p = p;
  c.h = 0.5;
  return c;
}
Eigen::VectorXd vec1(double v) {
  Eigen::VectorXd u(1);
  u << v;
  return u;
}
}  // namespace

TEST_CASE("kernel_value matches the standard normal density") {
  CHECK(kernel_value(vec1(0.0), config_p(1)) ==
        Catch::Approx(0.3989422804).epsilon(1e-9));
  Eigen::VectorXd u2 = Eigen::VectorXd::Zero(2);
  CHECK(kernel_value(u2, config_p(2)) ==
        Catch::Approx(0.1591549431).epsilon(1e-9));
}

TEST_CASE("kernel_value is symmetric in every coordinate") {
  const KernelConfig c = config_p(1);
  for (double v : {0.1, 0.7, 1.5, 3.0}) {
    CHECK(kernel_value(vec1(v), c) == kernel_value(vec1(-v), c));
  }
  const KernelConfig c3 = config_p(3);
  RngStream rng(11, 0);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd u(3);
    u << rng.next_normal(), rng.next_normal(), rng.next_normal();
    CHECK(kernel_value(u, c3) == kernel_value((-u).eval(), c3));
  }
}

TEST_CASE("kernel_value rejects bad input") {
  CHECK_THROWS_AS(kernel_value(vec1(std::nan("")), config_p(1)), DomainError);
  Eigen::VectorXd u2 = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(kernel_value(u2, config_p(1)), DomainError);
}

TEST_CASE("kernel_value integrates to one (Monte Carlo)") {
  // Importance sampling with N(0, 2^2) proposals.
  RngStream rng(202, 0);
  for (int p : {1, 2}) {
    const KernelConfig c = config_p(p);
    const int draws = 100000;
    double total = 0.0;
    Eigen::VectorXd u(p);
    for (int t = 0; t < draws; ++t) {
      double proposal_density = 1.0;
      for (int d = 0; d < p; ++d) {
        u[d] = 2.0 * rng.next_normal();
        const double z = u[d] / 2.0;
        proposal_density *= std::exp(-0.5 * z * z) / (2.0 * std::sqrt(2.0 * M_PI));
      }
      total += kernel_value(u, c) / proposal_density;
    }
    CHECK(total / draws == Catch::Approx(1.0).margin(0.01));
  }
}

TEST_CASE("kernel constants of the product Gaussian kernel") {
  CHECK(kernel_c2(1) == Catch::Approx(0.2820948).margin(1e-7));
  CHECK(kernel_c3(1) == Catch::Approx(0.1994711).margin(1e-7));
  CHECK(kernel_c2(2) == Catch::Approx(kernel_c2(1) * kernel_c2(1)).epsilon(1e-12));
  CHECK_THROWS_AS(kernel_c2(0), DomainError);

  // Monte Carlo check of C2 = integral of K(u)^2 du for p = 1.
  RngStream rng(404, 0);
  const int draws = 200000;
  double total = 0.0;
  const KernelConfig c1 = [] {
    KernelConfig c;
    c.dim_p = 1;
    c.h = 1.0;
    return c;
  }();
  Eigen::VectorXd u(1);
  for (int t = 0; t < draws; ++t) {
    u[0] = 2.0 * rng.next_normal();
    const double z = u[0] / 2.0;
    const double proposal = std::exp(-0.5 * z * z) / (2.0 * std::sqrt(2.0 * M_PI));
    const double k = kernel_value(u, c1);
    total += k * k / proposal;
  }
  CHECK(total / draws == Catch::Approx(kernel_c2(1)).margin(0.005));
}

TEST_CASE("resolve_bandwidth follows the rate rule") {
  CHECK(resolve_bandwidth(1.0, 1.0, 1, 4.25) == Catch::Approx(1.0));
  CHECK(resolve_bandwidth(1.0, 1.0, 2000, 4.25) ==
        Catch::Approx(0.16721955364).margin(1e-6));
  CHECK(resolve_bandwidth(1.0, 0.46, 9915, 4.25) ==
        Catch::Approx(0.05277808918).margin(1e-6));
}

TEST_CASE("resolve_bandwidth monotonicity") {
  double prev = resolve_bandwidth(1.0, 1.0, 100, 4.25);
  for (Eigen::Index n : {200, 400, 800, 1600, 3200}) {
    const double h = resolve_bandwidth(1.0, 1.0, n, 4.25);
    CHECK(h < prev);
    prev = h;
  }
  for (double c : {0.5, 1.0, 1.5, 2.0}) {
    CHECK(resolve_bandwidth(c, 1.0, 500, 4.25) <
          resolve_bandwidth(c + 0.1, 1.0, 500, 4.25));
    CHECK(resolve_bandwidth(1.0, c, 500, 4.25) <
          resolve_bandwidth(1.0, c + 0.1, 500, 4.25));
  }
}

TEST_CASE("resolve_bandwidth rejects bad input") {
  CHECK_THROWS_AS(resolve_bandwidth(0.0, 1.0, 10, 4.25), DomainError);
  CHECK_THROWS_AS(resolve_bandwidth(1.0, -1.0, 10, 4.25), DomainError);
  CHECK_THROWS_AS(resolve_bandwidth(1.0, 1.0, 0, 4.25), DomainError);
  CHECK_THROWS_AS(resolve_bandwidth(1.0, 1.0, 10, 0.0), DomainError);
}

TEST_CASE("weight box membership is closed on both ends") {
  const WeightBox box = WeightBox::symmetric(1, 0.5);
  CHECK(weight(vec1(0.0), box) == 1);
  CHECK(weight(vec1(0.6), box) == 0);
  CHECK(weight(vec1(-0.5), box) == 1);
  CHECK(weight(vec1(0.5), box) == 1);
  CHECK_THROWS_AS(weight(Eigen::VectorXd::Zero(2), box), DomainError);

  WeightBox bad;
  bad.lower = vec1(1.0);
  bad.upper = vec1(-1.0);
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("KernelConfig resolves and validates") {
  const KernelConfig c = KernelConfig::resolved(2000, 1);
  CHECK(c.h == Catch::Approx(0.16721955364).margin(1e-6));
  KernelConfig bad = c;
  bad.order_r = 3;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = c;
  bad.h = -1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("normal quantile and cdf are consistent") {
  CHECK(normal_quantile(0.975) == Catch::Approx(1.959963985).epsilon(1e-9));
  CHECK(normal_quantile(0.5) == Catch::Approx(0.0).margin(1e-12));
  for (double p : {0.001, 0.025, 0.2, 0.5, 0.77, 0.95, 0.9999}) {
    CHECK(normal_cdf(normal_quantile(p)) == Catch::Approx(p).epsilon(1e-12));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(normal_quantile(1.0), DomainError);
}

TEST_CASE("RngStream is reproducible and stream-splittable") {
  RngStream a(42, 3), b(42, 3), c(42, 4);
  for (int i = 0; i < 100; ++i) {
    const double va = a.next_uniform();
    CHECK(va == b.next_uniform());
    CHECK(va != c.next_uniform());
    CHECK(va > 0.0);
    CHECK(va < 1.0);
  }
}

TEST_CASE("RngStream normals have first two moments of N(0,1)") {
  RngStream rng(7, 0);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next_normal();
    sum += z;
    sum2 += z * z;
  }
  CHECK(sum / n == Catch::Approx(0.0).margin(0.01));
  CHECK(sum2 / n == Catch::Approx(1.0).margin(0.02));
}
