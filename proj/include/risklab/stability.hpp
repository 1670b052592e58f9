#pragma once

// Uniform stability in gradients, measured on neighboring datasets and
// compared against the per-algorithm theoretical budgets. For the quadratic
// family the gradient difference A(w - w') does not depend on the query
// sample, so the measured value is the exact supremum over z.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "risklab/io.hpp"
#include "risklab/optimizers.hpp"
#include "risklab/problems.hpp"

namespace risklab {

struct StabilityMeasurement {
  AlgorithmConfig algorithm;
  int n = 0;
  int i = 0;  // replaced index, 1-based
  double measured_beta = 0.0;
  bool is_exact_sup = true;
  double theoretical_beta = 0.0;
  std::uint64_t data_seed = 0;
  std::uint64_t replacement_seed = 0;
  double eps_opt = std::numeric_limits<double>::quiet_NaN();  // SGD budget input
};

// Stability budgets: 4Mg/(n mu) for exact ERM, 2Mg/(n mu) for PGD at
// eta = 1/gamma, and 2g sqrt(2 eps_opt/mu) + 4Mg/(n mu) for SGD, where
// eps_opt is the empirical suboptimality of the returned iterate.
inline double stability_budget(const Constants& constants, int n, const AlgorithmConfig& config,
                               std::optional<double> eps_opt = std::nullopt) {
  if (n < 1) throw std::invalid_argument("stability_budget: n must be >= 1");
  double base = constants.M * constants.gamma / (static_cast<double>(n) * constants.mu);
  switch (config.kind) {
    case AlgoKind::erm:
      return 4.0 * base;
    case AlgoKind::pgd:
      return 2.0 * base;
    case AlgoKind::sgd: {
      if (!eps_opt.has_value())
        throw std::invalid_argument("stability_budget: SGD requires eps_opt");
      if (*eps_opt < 0.0)
        throw std::invalid_argument("stability_budget: eps_opt must be >= 0");
      return 2.0 * constants.gamma * std::sqrt(2.0 * *eps_opt / constants.mu) + 4.0 * base;
    }
  }
  throw std::invalid_argument("stability_budget: unknown algorithm kind");
}

inline StabilityMeasurement estimate_grad_stability(const ProblemSpec& spec,
                                                    const AlgorithmConfig& config, int n, int i,
                                                    std::uint64_t data_seed,
                                                    std::uint64_t replacement_seed) {
  if (i < 1 || i > n) throw std::invalid_argument("estimate_grad_stability: i out of range");
  Dataset s = sample_dataset(spec, n, data_seed);
  Eigen::VectorXd z_prime = draw_replacement_sample(spec, n, replacement_seed);
  Dataset s_i = make_neighbor(s, i, z_prime);

  Eigen::VectorXd w, w_prime;
  StabilityMeasurement m;
  m.algorithm = config;
  m.n = n;
  m.i = i;
  m.data_seed = data_seed;
  m.replacement_seed = replacement_seed;

  Constants constants = constants_for(spec, n);
  switch (config.kind) {
    case AlgoKind::erm: {
      w = solve_erm(spec, s, config.erm_tolerance).w_hat;
      w_prime = solve_erm(spec, s_i, config.erm_tolerance).w_hat;
      m.theoretical_beta = stability_budget(constants, n, config);
      break;
    }
    case AlgoKind::pgd: {
      Trajectory a = run_pgd(spec, s, config);
      Trajectory b = run_pgd(spec, s_i, config);
      w = a.final_w;
      w_prime = b.final_w;
      m.theoretical_beta = stability_budget(constants, n, config);
      break;
    }
    case AlgoKind::sgd: {
      // Same config (hence same algo_seed and n) on both runs: the index
      // sequences coincide, which is the coupling the audit relies on.
      Trajectory a = run_sgd(spec, s, config);
      Trajectory b = run_sgd(spec, s_i, config);
      w = a.final_w;
      w_prime = b.final_w;
      double eps_a = std::max(0.0, a.final_F_S - a.F_S_min);
      double eps_b = std::max(0.0, b.final_F_S - b.F_S_min);
      m.eps_opt = std::max(eps_a, eps_b);
      m.theoretical_beta = stability_budget(constants, n, config, m.eps_opt);
      break;
    }
  }
  m.measured_beta = spec.apply_A(w - w_prime).norm();
  m.is_exact_sup = true;
  return m;
}

inline std::string stability_measurements_to_csv(const std::vector<StabilityMeasurement>& batch) {
  std::string out = "algorithm,n,i,measured_beta,theoretical_beta,ratio\n";
  for (const auto& m : batch) {
    const char* name = m.algorithm.kind == AlgoKind::erm   ? "erm"
                       : m.algorithm.kind == AlgoKind::pgd ? "pgd"
                                                           : "sgd";
    out += name;
    out += ",";
    out += std::to_string(m.n);
    out += ",";
    out += std::to_string(m.i);
    out += ",";
    out += fmt_double(m.measured_beta);
    out += ",";
    out += fmt_double(m.theoretical_beta);
    out += ",";
    out += fmt_double(m.theoretical_beta > 0.0 ? m.measured_beta / m.theoretical_beta : 0.0);
    out += "\n";
  }
  return out;
}

}  // namespace risklab
