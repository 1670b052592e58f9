#include <Eigen/Dense>
#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "oracles.hpp"
#include "risklab/stability.hpp"

using namespace risklab;

namespace {

Constants unit_constants() {
  Constants c;
  c.mu = 1.0;
  c.gamma = 1.0;
  c.M = 1.0;
  return c;
}

AlgorithmConfig kind_config(AlgoKind kind) {
  AlgorithmConfig c;
  c.kind = kind;
  if (kind == AlgoKind::pgd) {
    c.step_rule = StepRule::constant;
    c.T = 50;
  }
  if (kind == AlgoKind::sgd) {
    c.step_rule = StepRule::strongly_convex;
    c.T = 400;
    c.algo_seed = 21;
  }
  return c;
}

}  // namespace

TEST_CASE("stability budgets at unit constants") {
  Constants c = unit_constants();
  CHECK(stability_budget(c, 100, kind_config(AlgoKind::erm)) == Catch::Approx(0.04).margin(1e-15));
  CHECK(stability_budget(c, 100, kind_config(AlgoKind::pgd)) == Catch::Approx(0.02).margin(1e-15));
  // SGD with zero suboptimality collapses to the ERM budget
  CHECK(stability_budget(c, 100, kind_config(AlgoKind::sgd), 0.0) ==
        Catch::Approx(0.04).margin(1e-15));
  double eps = 0.5;
  CHECK(stability_budget(c, 100, kind_config(AlgoKind::sgd), eps) ==
        Catch::Approx(2.0 * std::sqrt(2.0 * eps) + 0.04).margin(1e-12));
  CHECK_THROWS_AS(stability_budget(c, 100, kind_config(AlgoKind::sgd)), std::invalid_argument);
  CHECK_THROWS_AS(stability_budget(c, 0, kind_config(AlgoKind::erm)), std::invalid_argument);
}

TEST_CASE("erm stability on a hand-built neighboring pair") {
  ProblemSpec spec = make_quadratic_spec(1, 1.0, {NoiseRule::constant, 0.0}, 3);
  spec.b_mean(0) = 2.0;
  spec.domain_radius = 4.0;
  auto dataset_of = [&](std::initializer_list<double> values) {
    Dataset ds;
    ds.n = static_cast<int>(values.size());
    ds.spec_fingerprint = spec_fingerprint(spec);
    for (double v : values) {
      Eigen::VectorXd z(1);
      z(0) = v;
      ds.samples.push_back(z);
    }
    return ds;
  };
  Dataset s = dataset_of({1.0, 2.0, 3.0, 2.0});
  Eigen::VectorXd z_prime(1);
  z_prime(0) = 0.0;
  Dataset s1 = make_neighbor(s, 1, z_prime);  // the means differ by 1/4
  Eigen::VectorXd w = solve_erm(spec, s).w_hat;
  Eigen::VectorXd w1 = solve_erm(spec, s1).w_hat;
  CHECK(spec.apply_A(w - w1).norm() == Catch::Approx(0.25).margin(1e-15));

  // self-replacement changes nothing
  Dataset same = make_neighbor(s, 2, s.samples[1]);
  Eigen::VectorXd w2 = solve_erm(spec, same).w_hat;
  CHECK(spec.apply_A(w - w2).norm() == 0.0);

  CHECK_THROWS_AS(make_neighbor(s, 0, z_prime), std::invalid_argument);
  CHECK_THROWS_AS(make_neighbor(s, 5, z_prime), std::invalid_argument);
}

TEST_CASE("measured stability is symmetric in the dataset pair") {
  ProblemSpec spec = make_quadratic_spec(3, 2.0, {NoiseRule::constant, 1.0}, 40);
  Dataset s = sample_dataset(spec, 8, 41);
  Eigen::VectorXd z_prime = draw_replacement_sample(spec, 8, 42);
  Dataset s3 = make_neighbor(s, 3, z_prime);
  Eigen::VectorXd a = solve_erm(spec, s).w_hat;
  Eigen::VectorXd b = solve_erm(spec, s3).w_hat;
  CHECK(spec.apply_A(a - b).norm() == spec.apply_A(b - a).norm());
}

TEST_CASE("measured stability stays below the budget for every algorithm") {
  for (auto kind : {AlgoKind::erm, AlgoKind::pgd, AlgoKind::sgd}) {
    AlgorithmConfig config = kind_config(kind);
    int audits = 0;
    for (std::uint64_t instance = 0; instance < 3; ++instance) {
      ProblemSpec spec =
          make_quadratic_spec(3, 1.0 + 3.0 * static_cast<double>(instance),
                              {NoiseRule::constant, 1.0}, 300 + instance);
      for (int n : {8, 32}) {
        for (int rep = 0; rep < 6; ++rep) {
          std::uint64_t tag = 1000 * instance + static_cast<std::uint64_t>(100 * n + rep);
          Rng rng(mix_seed({tag, 0x1D}));
          int i = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
          if (kind == AlgoKind::sgd) config.algo_seed = mix_seed({tag, 0xA160});
          StabilityMeasurement m =
              estimate_grad_stability(spec, config, n, i, mix_seed({tag, 0xDA7A}),
                                      mix_seed({tag, 0x5EED}));
          REQUIRE(m.measured_beta <= m.theoretical_beta);
          REQUIRE(m.is_exact_sup);
          CHECK(m.n == n);
          CHECK(m.i == i);
          ++audits;
        }
      }
    }
    CHECK(audits == 36);
  }
}

TEST_CASE("pgd stability across 100 seeded instances") {
  AlgorithmConfig config = kind_config(AlgoKind::pgd);
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    ProblemSpec spec = make_quadratic_spec(2 + static_cast<int>(rep % 3),
                                            1.0 + static_cast<double>(rep % 5),
                                            {NoiseRule::constant, 1.0}, 7000 + rep);
    int n = 8 << (rep % 3);
    Constants c = constants_for(spec, n);
    StabilityMeasurement m = estimate_grad_stability(
        spec, config, n, 1 + static_cast<int>(rep % n), 7100 + rep, 7200 + rep);
    REQUIRE(m.measured_beta <= 2.0 * c.M * c.gamma / (static_cast<double>(n) * c.mu));
  }
}

TEST_CASE("worst measured erm stability halves when n doubles") {
  ProblemSpec spec = make_quadratic_spec(3, 2.0, {NoiseRule::constant, 1.0}, 600);
  AlgorithmConfig config = kind_config(AlgoKind::erm);
  auto worst_at = [&](int n) {
    double worst = 0.0;
    for (std::uint64_t rep = 0; rep < 50; ++rep) {
      StabilityMeasurement m = estimate_grad_stability(
          spec, config, n, 1 + static_cast<int>(rep % n), 610 + rep, 710 + rep);
      worst = std::max(worst, m.measured_beta);
    }
    return worst;
  };
  double ratio = worst_at(128) / worst_at(64);
  CHECK(ratio >= 0.3);
  CHECK(ratio <= 0.7);
}

TEST_CASE("stability csv layout") {
  ProblemSpec spec = make_quadratic_spec(2, 1.0, {NoiseRule::constant, 1.0}, 800);
  StabilityMeasurement m =
      estimate_grad_stability(spec, kind_config(AlgoKind::erm), 8, 2, 801, 802);
  std::string csv = stability_measurements_to_csv({m});
  CHECK(csv.rfind("algorithm,n,i,measured_beta,theoretical_beta,ratio\n", 0) == 0);
  CHECK(csv.find("\nerm,8,2,") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK_THROWS_AS(estimate_grad_stability(spec, kind_config(AlgoKind::erm), 8, 0, 1, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_grad_stability(spec, kind_config(AlgoKind::erm), 8, 9, 1, 2),
                  std::invalid_argument);
}
