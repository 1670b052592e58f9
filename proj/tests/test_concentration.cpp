#include <Eigen/Dense>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "risklab/audit.hpp"
#include "risklab/concentration.hpp"

using namespace risklab;

TEST_CASE("ceil_log2 small values and powers of two") {
  CHECK(ceil_log2(1) == 0);
  CHECK(ceil_log2(2) == 1);
  CHECK(ceil_log2(3) == 2);
  CHECK(ceil_log2(4) == 2);
  CHECK(ceil_log2(5) == 3);
  CHECK(ceil_log2(1024) == 10);
  CHECK(ceil_log2(1025) == 11);
  for (long long n : {1LL, 2LL, 7LL, 64LL, 100LL, 4096LL, 1000000LL})
    CHECK(ceil_log2(n) == oracles::ref_ceil_log2(n));
}

TEST_CASE("khintchine constants: known values and the p-th power sandwich") {
  CHECK(khintchine_constant(2.0) == Catch::Approx(1.0).margin(1e-12));
  CHECK(khintchine_constant(4.0) == Catch::Approx(1.3160740129524926).margin(1e-14));
  for (double p : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
    double cp_pow = std::pow(khintchine_constant(p), p);
    double core = std::sqrt(2.0) * std::pow(p / kE, p / 2.0);
    double lower = std::exp(-1.0 / (4.0 * p)) * core;
    double upper = std::exp(-1.0 / (18.0 * p)) * core;
    REQUIRE(lower < cp_pow);
    REQUIRE(cp_pow < upper);
  }
  // frozen endpoints of the sandwich at p = 2
  double core2 = std::sqrt(2.0) * (2.0 / kE);
  CHECK(std::exp(-1.0 / 8.0) * core2 == Catch::Approx(0.91825584479213362).margin(1e-14));
  CHECK(std::exp(-1.0 / 36.0) * core2 == Catch::Approx(1.0120145953684772).margin(1e-14));
}

TEST_CASE("marcinkiewicz-zygmund coefficient") {
  CHECK(mz_coefficient(1, 2.0) == Catch::Approx(2.040117829975296).margin(1e-14));
  CHECK(mz_coefficient(4, 2.0) == Catch::Approx(2.0 * mz_coefficient(1, 2.0)).epsilon(1e-14));
  for (long long n : {2LL, 8LL, 100LL, 4096LL})
    CHECK(mz_coefficient(n, 2.0) >= std::sqrt(static_cast<double>(n)));
}

TEST_CASE("mcdiarmid p-norm bounds") {
  CHECK(mcdiarmid_pnorm_bound(4, 2.0, 1.0, McDiarmidVariant::vector_valued) ==
        Catch::Approx(6.0).margin(1e-14));
  CHECK(mcdiarmid_pnorm_bound(9, 2.0, 1.0, McDiarmidVariant::expectation_only) ==
        Catch::Approx(3.0).margin(1e-14));
  CHECK(mcdiarmid_pnorm_bound(100, 8.0, 0.0, McDiarmidVariant::real_valued) == 0.0);
  for (long long n : {2LL, 16LL, 256LL})
    for (double p : {2.0, 4.0, 16.0}) {
      double real = mcdiarmid_pnorm_bound(n, p, 0.7, McDiarmidVariant::real_valued);
      CHECK(real == Catch::Approx(std::sqrt(2.0 * p * static_cast<double>(n)) * 0.7));
      // the vector variant must cover the real-valued one
      CHECK(real <= mcdiarmid_pnorm_bound(n, p, 0.7, McDiarmidVariant::vector_valued) + 1e-12);
    }
}

TEST_CASE("sharpened moment bound: frozen anchors and baseline dominance") {
  MomentBoundInputs sampling{16, 2.0, 1.0, 0.0};
  CHECK(theorem1_moment_bound(sampling) == Catch::Approx(24.0).margin(1e-12));
  CHECK(eq2_moment_bound(sampling) == Catch::Approx(27.313708498984759).margin(1e-12));
  double ratio1 = theorem1_moment_bound(sampling) / eq2_moment_bound(sampling);
  CHECK(ratio1 == Catch::Approx(0.8786796564403575).margin(1e-14));
  CHECK(std::abs(ratio1 - 0.879) <= 1e-3);

  MomentBoundInputs stability{16, 2.0, 0.0, 1.0};
  double ratio2 = theorem1_moment_bound(stability) / eq2_moment_bound(stability);
  CHECK(ratio2 == Catch::Approx(0.63378335551120168).margin(1e-14));
  CHECK(std::abs(ratio2 - 0.634) <= 1e-3);

  MomentBoundInputs zero{16, 2.0, 0.0, 0.0};
  CHECK(theorem1_moment_bound(zero) == 0.0);
  CHECK(eq2_moment_bound(zero) == 0.0);
  MomentBoundInputs single{1, 4.0, 0.5, 0.5};
  CHECK(theorem1_terms(single).second == 0.0);  // no dyadic levels at n = 1

  for (double p : {2.0, 3.0, 8.0, 32.0, 64.0})
    for (int k = 1; k <= 16; k += 3)
      for (double G : {0.0, 1.0})
        for (double beta : {0.0, 1.0}) {
          MomentBoundInputs in{1LL << k, p, G, beta};
          REQUIRE(theorem1_moment_bound(in) <= eq2_moment_bound(in) + 1e-12);
          REQUIRE(theorem1_moment_bound(in) ==
                  Catch::Approx(oracles::ref_theorem1(in.n, p, G, beta)).margin(1e-12));
          REQUIRE(eq2_moment_bound(in) ==
                  Catch::Approx(oracles::ref_eq2(in.n, p, G, beta)).margin(1e-12));
        }
}

TEST_CASE("moment-to-tail conversion") {
  CHECK(tails_from_moments(1.0, 0.0, 1.0) == Catch::Approx(kE).margin(1e-14));
  CHECK(tails_from_moments(0.0, 0.0, 0.3) == 0.0);
  double prev = tails_from_moments(0.7, 0.2, 1e-6);
  for (double delta : {1e-4, 1e-2, 0.1, 0.5, 1.0}) {
    double cur = tails_from_moments(0.7, 0.2, delta);
    REQUIRE(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("vector bernstein tail") {
  CHECK(vector_bernstein_tail(10, 0.0, 1.0, 2.0 / kE) == Catch::Approx(0.1).margin(1e-14));
  double base = vector_bernstein_tail(50, 2.0, 0.0, 0.05);
  CHECK(vector_bernstein_tail(200, 2.0, 0.0, 0.05) == Catch::Approx(0.5 * base).epsilon(1e-12));
}

TEST_CASE("centered product family: moments and bounded differences") {
  Eigen::VectorXd u(3);
  u << 1.0, 0.0, 0.0;
  auto fam = centered_product_family(16, 1.0, u, 99);
  CHECK(fam.beta() == 2.0);

  // E||sum||^2 = n exactly; the MC 2-norm should bracket sqrt(n)
  auto sampler = [&](std::uint64_t stream) { return fam.draw_at(stream).sum; };
  PNormEstimate est = mc_pnorm(sampler, 2.0, 4000, 7);
  CHECK(est.ci_low <= 4.0);
  CHECK(4.0 <= est.ci_high);
  CHECK(est.point_estimate == Catch::Approx(4.0).epsilon(0.1));

  // marginal mean of each summand vanishes at the sampling rate
  Eigen::VectorXd mean_sum = Eigen::VectorXd::Zero(3);
  const int trials = 4000;
  for (int t = 0; t < trials; ++t) mean_sum += fam.draw_at(static_cast<std::uint64_t>(t)).sum;
  mean_sum /= static_cast<double>(trials);
  CHECK(mean_sum.norm() <= 5.0 * std::sqrt(16.0 / trials));

  // changing one coordinate moves the sum by at most 2 * beta = 4c^2
  const int n = 8;
  const double c = 0.5;
  Rng rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> r(n), s(n);
    for (auto& x : r) x = c * rng.next_sign();
    for (auto& x : s) x = c * rng.next_sign();
    auto coeff_sum = [&](const std::vector<double>& rr, const std::vector<double>& ss) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += rr[i] * ss[(i + 1) % n];
      return acc;
    };
    double f0 = coeff_sum(r, s);
    int j = static_cast<int>(rng.next_below(n));
    for (double rj : {-c, c})
      for (double sj : {-c, c}) {
        auto r2 = r;
        auto s2 = s;
        r2[static_cast<std::size_t>(j)] = rj;
        s2[static_cast<std::size_t>(j)] = sj;
        REQUIRE(std::abs(coeff_sum(r2, s2) - f0) <= 4.0 * c * c + 1e-12);
      }
  }

  CHECK_THROWS_AS(centered_product_family(1, 1.0, u, 0), std::invalid_argument);
  Eigen::VectorXd bad = 2.0 * u;
  CHECK_THROWS_AS(centered_product_family(4, 1.0, bad, 0), std::invalid_argument);
}

TEST_CASE("mc_pnorm estimator") {
  Eigen::VectorXd v(2);
  v << 0.0, 3.0;
  auto constant = [&](std::uint64_t) { return v; };
  PNormEstimate est = mc_pnorm(constant, 2.0, 500, 11);
  CHECK(est.point_estimate == 3.0);
  CHECK(est.ci_low == 3.0);
  CHECK(est.ci_high == 3.0);

  // sum of 16 scalar signs has exact 2-norm 4
  auto rademacher = [](std::uint64_t stream) {
    Rng rng(mix_seed({stream, 0xADD}));
    Eigen::VectorXd x(1);
    x(0) = 0.0;
    for (int i = 0; i < 16; ++i) x(0) += rng.next_sign();
    return x;
  };
  PNormEstimate r2 = mc_pnorm(rademacher, 2.0, 5000, 3);
  CHECK(r2.ci_low <= 4.0);
  CHECK(4.0 <= r2.ci_high);

  // identical draws: the empirical p-norm is nondecreasing in p
  double prev = 0.0;
  for (double p : {2.0, 4.0, 8.0}) {
    double cur = mc_pnorm(rademacher, p, 2000, 3).point_estimate;
    REQUIRE(cur >= prev - 1e-12);
    prev = cur;
  }

  CHECK_THROWS_AS(mc_pnorm(constant, 2.0, 50, 0), std::invalid_argument);
  CHECK_THROWS_AS(mc_pnorm(constant, 0.5, 500, 0), std::invalid_argument);
}

TEST_CASE("audit smoke run on a small grid") {
  AuditConfig config;
  config.n_grid = {8};
  config.p_grid = {2.0};
  config.trials = 400;
  config.coverage_deltas = {0.1};
  config.base_seed = 4;
  AuditReport report = run_concentration_audit(config);
  CHECK(report.cells.size() == 4);
  CHECK(report.violations == 0);
  CHECK(report.pass);
  for (const auto& cell : report.cells) {
    CHECK(cell.pass);
    if (cell.family == "centered_product") {
      REQUIRE(std::isfinite(cell.bound));
      CHECK(cell.estimate.ci_high <= cell.bound);
      CHECK(cell.bound <= cell.bound_eq2);
    }
  }

  AuditConfig bad = config;
  bad.families = {"nonsense"};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
