#pragma once

// Replicated, seeded experiment harness. "With probability at least
// 1-delta" is operationalized as the empirical (1-delta)-quantile over
// independent replicates; rates are checked as log-log slopes of that
// quantile against n. Every cell (n, replicate) derives its own RNG stream
// from (base_seed, n, replicate), so results are independent of worker
// count and scheduling.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "risklab/bounds.hpp"
#include "risklab/concentration.hpp"
#include "risklab/optimizers.hpp"
#include "risklab/parallel.hpp"
#include "risklab/problems.hpp"
#include "risklab/stability.hpp"

namespace risklab {

// ---- small numeric utilities ---------------------------------------------

// Nearest-rank quantile: the ceil(q*N)-th order statistic, no interpolation.
inline double quantile(std::vector<double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("quantile: empty sample list");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile: q must be in (0, 1)");
  std::sort(samples.begin(), samples.end());
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size())));
  if (rank < 1) rank = 1;
  if (rank > samples.size()) rank = samples.size();
  return samples[rank - 1];
}

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares on (log x, log y).
inline SlopeFit fit_loglog(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("fit_loglog: need at least 3 points");
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0))
      throw std::invalid_argument("fit_loglog: points must be strictly positive");
    sx += std::log(x);
    sy += std::log(y);
  }
  double mx = sx / static_cast<double>(points.size());
  double my = sy / static_cast<double>(points.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    double dx = std::log(x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y) - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_loglog: x values must not be all equal");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& [x, y] : points) {
    double ly = std::log(y);
    double pred = fit.intercept + fit.slope * std::log(x);
    ss_res += (ly - pred) * (ly - pred);
    ss_tot += (ly - my) * (ly - my);
  }
  fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  if (fit.r_squared < 0.0) fit.r_squared = 0.0;
  if (fit.r_squared > 1.0) fit.r_squared = 1.0;
  return fit;
}

// ---- experiment configuration ---------------------------------------------

enum class Metric { excess_risk, grad_gap, pop_grad_norm, weighted_grad_avg };

inline const char* metric_name(Metric m) {
  switch (m) {
    case Metric::excess_risk: return "excess_risk";
    case Metric::grad_gap: return "grad_gap";
    case Metric::pop_grad_norm: return "pop_grad_norm";
    case Metric::weighted_grad_avg: return "weighted_grad_avg";
  }
  return "?";
}

struct ProblemTemplate {
  int d = 4;
  double kappa = 1.0;
  NoiseSpec noise{NoiseRule::constant, 1.0};
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  ProblemTemplate problem;
  AlgorithmConfig algo;
  std::vector<int> n_grid;
  int replicates = 200;
  double delta = 0.05;
  Metric metric = Metric::excess_risk;
  std::uint64_t base_seed = 0;
  int workers = 0;

  void validate() const {
    if (n_grid.empty()) throw std::invalid_argument("ExperimentConfig: empty n_grid");
    for (int n : n_grid)
      if (n < 1) throw std::invalid_argument("ExperimentConfig: n_grid entries must be >= 1");
    if (replicates < 50) throw std::invalid_argument("ExperimentConfig: replicates must be >= 50");
    if (!(delta > 0.0 && delta < 1.0))
      throw std::invalid_argument("ExperimentConfig: delta must be in (0, 1)");
  }
};

// PGD budget T ~ log n, sized so the squared contraction factor is below
// n^-4 and the optimization term cannot influence the measured rate.
inline long long pgd_iteration_budget(int n, double gamma, double mu) {
  if (gamma <= mu) return 1;
  double denom = std::log(gamma / (gamma - mu));
  long long t = static_cast<long long>(std::ceil(2.0 * std::log(std::max(n, 2)) / denom));
  return std::clamp<long long>(t, 1, 10000000);
}

struct PerNStats {
  int n = 0;
  double quantile_value = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  int replicates = 0;
  bool below_threshold = false;
};

struct DominanceCurve {
  std::string name;
  std::vector<double> values;    // per-n bound value (max over replicates where it varies)
  std::vector<double> fraction;  // per-n share of replicates at or under the bound
};

struct ExperimentResult {
  std::vector<PerNStats> per_n;
  std::vector<std::vector<double>> raw;  // [n_index][replicate]
  std::optional<SlopeFit> slope_fit;
  bool degenerate_metric = false;
  std::vector<DominanceCurve> curves;
  double threshold_n = 0.0;
};

// ---- the replicated runner -------------------------------------------------

namespace detail {

struct CellOutput {
  double value = 0.0;   // the metric
  double bound2 = 0.0;  // thm2 total (grad_gap only)
  double bound3 = 0.0;  // thm3 total (grad_gap only)
};

inline AlgorithmConfig resolve_algo_for_n(const ExperimentConfig& config, const ProblemSpec& spec,
                                          int n) {
  AlgorithmConfig algo = config.algo;
  if (config.metric == Metric::weighted_grad_avg) algo.track_population = true;
  if (algo.kind == AlgoKind::pgd && algo.T == 0)
    algo.T = pgd_iteration_budget(n, spec.gamma(), spec.mu());
  if (algo.kind == AlgoKind::sgd && algo.T == 0) {
    if (algo.step_rule != StepRule::strongly_convex)
      throw std::invalid_argument("experiments: SGD needs an explicit T for this step rule");
    algo.T = static_cast<long long>(n) * static_cast<long long>(n);
  }
  return algo;
}

inline ExperimentResult run_replicated(const ExperimentConfig& config, bool with_bound_curves) {
  config.validate();
  ProblemSpec spec =
      make_quadratic_spec(config.problem.d, config.problem.kappa, config.problem.noise,
                          config.problem.seed);
  std::size_t n_count = config.n_grid.size();
  auto reps = static_cast<std::size_t>(config.replicates);

  ExperimentResult result;
  result.threshold_n = sample_size_threshold(spec.gamma(), spec.mu(), config.delta);
  result.raw.assign(n_count, std::vector<double>(reps, 0.0));
  std::vector<std::vector<CellOutput>> cells(n_count, std::vector<CellOutput>(reps));
  std::vector<PopulationOracle> oracles;
  std::vector<Constants> constants;
  std::vector<AlgorithmConfig> algos;
  oracles.reserve(n_count);
  constants.reserve(n_count);
  algos.reserve(n_count);
  for (std::size_t k = 0; k < n_count; ++k) {
    oracles.push_back(population_oracle(spec, config.n_grid[k]));
    constants.push_back(constants_for(spec, config.n_grid[k]));
    algos.push_back(resolve_algo_for_n(config, spec, config.n_grid[k]));
  }

  parallel_for(n_count * reps, config.workers, [&](std::size_t idx) {
    std::size_t k = idx / reps;
    std::size_t rep = idx % reps;
    int n = config.n_grid[k];
    const PopulationOracle& oracle = oracles[k];
    AlgorithmConfig algo = algos[k];
    std::uint64_t cell_seed =
        mix_seed({config.base_seed, static_cast<std::uint64_t>(n), rep, 0xCE11});
    Dataset ds = sample_dataset(spec, n, cell_seed);

    Eigen::VectorXd w;
    double eps_opt = 0.0;
    double weighted = std::numeric_limits<double>::quiet_NaN();
    if (algo.kind == AlgoKind::erm) {
      if (config.metric == Metric::weighted_grad_avg)
        throw std::invalid_argument("experiments: weighted_grad_avg needs an iterative algorithm");
      w = solve_erm(spec, ds, algo.erm_tolerance).w_hat;
    } else {
      algo.algo_seed = mix_seed({config.algo.algo_seed, static_cast<std::uint64_t>(n), rep});
      Trajectory traj = algo.kind == AlgoKind::pgd ? run_pgd(spec, ds, algo)
                                                   : run_sgd(spec, ds, algo);
      w = traj.final_w;
      eps_opt = std::max(0.0, traj.final_F_S - traj.F_S_min);
      weighted = traj.weighted_grad_avg;
    }

    CellOutput out;
    switch (config.metric) {
      case Metric::excess_risk:
        out.value = oracle.F(w) - oracle.F_star;
        break;
      case Metric::grad_gap: {
        auto [risk, grad_s] = empirical_risk_and_grad(spec, ds, w);
        (void)risk;
        out.value = (oracle.grad(w) - grad_s).norm();
        break;
      }
      case Metric::pop_grad_norm:
        out.value = oracle.grad(w).norm();
        break;
      case Metric::weighted_grad_avg:
        out.value = weighted;
        break;
    }
    if (!std::isfinite(out.value))
      throw std::runtime_error("experiments: nonfinite metric at n = " + std::to_string(n) +
                               ", replicate " + std::to_string(rep));

    if (with_bound_curves && config.metric == Metric::grad_gap) {
      const Constants& cst = constants[k];
      double beta = algo.kind == AlgoKind::sgd
                        ? stability_budget(cst, n, algo, eps_opt)
                        : stability_budget(cst, n, algo);
      out.bound2 = thm2_bound(cst.M, beta, n, config.delta).total;
      out.bound3 = thm3_bound(cst.V_at(w), beta, cst.M, n, config.delta).total;
    }
    cells[k][rep] = out;
  });

  for (std::size_t k = 0; k < n_count; ++k)
    for (std::size_t rep = 0; rep < reps; ++rep) result.raw[k][rep] = cells[k][rep].value;

  bool quantiles_positive = true;
  for (std::size_t k = 0; k < n_count; ++k) {
    PerNStats stats;
    stats.n = config.n_grid[k];
    stats.replicates = config.replicates;
    stats.below_threshold = static_cast<double>(stats.n) < result.threshold_n;
    stats.quantile_value = quantile(result.raw[k], 1.0 - config.delta);
    double mean = 0.0;
    for (double v : result.raw[k]) mean += v;
    mean /= static_cast<double>(reps);
    double ss = 0.0;
    for (double v : result.raw[k]) ss += (v - mean) * (v - mean);
    stats.mean = mean;
    stats.sd = reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1)) : 0.0;
    result.per_n.push_back(stats);
    if (!(stats.quantile_value > 0.0)) quantiles_positive = false;
  }

  if (!quantiles_positive) {
    result.degenerate_metric = true;
  } else if (n_count >= 3) {
    std::vector<std::pair<double, double>> points;
    points.reserve(n_count);
    for (const auto& s : result.per_n)
      points.emplace_back(static_cast<double>(s.n), s.quantile_value);
    result.slope_fit = fit_loglog(points);
  }

  if (with_bound_curves && config.metric == Metric::grad_gap) {
    DominanceCurve c2{"thm2", {}, {}};
    DominanceCurve c3{"thm3", {}, {}};
    for (std::size_t k = 0; k < n_count; ++k) {
      double max2 = 0.0, max3 = 0.0;
      std::size_t under2 = 0, under3 = 0;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        const CellOutput& out = cells[k][rep];
        max2 = std::max(max2, out.bound2);
        max3 = std::max(max3, out.bound3);
        if (out.value <= out.bound2) ++under2;
        if (out.value <= out.bound3) ++under3;
      }
      c2.values.push_back(max2);
      c2.fraction.push_back(static_cast<double>(under2) / static_cast<double>(reps));
      c3.values.push_back(max3);
      c3.fraction.push_back(static_cast<double>(under3) / static_cast<double>(reps));
    }
    result.curves.push_back(std::move(c2));
    result.curves.push_back(std::move(c3));
  }
  return result;
}

}  // namespace detail

inline ExperimentResult run_scaling_experiment(const ExperimentConfig& config) {
  if (config.metric != Metric::excess_risk && config.metric != Metric::pop_grad_norm)
    throw std::invalid_argument("run_scaling_experiment: metric must be excess_risk or pop_grad_norm");
  return detail::run_replicated(config, false);
}

inline ExperimentResult run_gradient_gap_experiment(const ExperimentConfig& config) {
  if (config.metric != Metric::grad_gap && config.metric != Metric::weighted_grad_avg)
    throw std::invalid_argument(
        "run_gradient_gap_experiment: metric must be grad_gap or weighted_grad_avg");
  return detail::run_replicated(config, true);
}

}  // namespace risklab
