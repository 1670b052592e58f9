#pragma once

// Monte-Carlo audit of the concentration inequalities on constructed
// families. Dominance cells compare a bootstrap CI upper end against the
// closed-form bound; coverage cells compare empirical violation frequency
// of the Bernstein tail against its nominal delta.

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "risklab/concentration.hpp"
#include "risklab/parallel.hpp"
#include "risklab/problems.hpp"

namespace risklab {

struct AuditConfig {
  std::vector<int> n_grid{8, 16, 32, 64, 128, 256};
  std::vector<double> p_grid{2.0, 4.0, 8.0};
  long long trials = 10000;
  std::vector<std::string> families{"centered_product", "rademacher_mz", "mcdiarmid_mean",
                                    "bernstein_coverage"};
  int d = 4;
  double c = 1.0;      // centered-product scale
  double sigma = 1.0;  // truncated-Gaussian scale for the mean families
  std::vector<double> coverage_deltas{0.1, 0.01};
  std::uint64_t base_seed = 0;
  int workers = 0;

  void validate() const {
    if (trials < 100) throw std::invalid_argument("AuditConfig: trials must be >= 100");
    if (n_grid.empty() || p_grid.empty() || families.empty())
      throw std::invalid_argument("AuditConfig: empty grid");
    for (int n : n_grid)
      if (n < 2) throw std::invalid_argument("AuditConfig: n_grid entries must be >= 2");
    for (double p : p_grid)
      if (!(p >= 2.0)) throw std::invalid_argument("AuditConfig: p_grid entries must be >= 2");
    if (d < 1) throw std::invalid_argument("AuditConfig: d must be >= 1");
    if (c < 0.0 || sigma < 0.0) throw std::invalid_argument("AuditConfig: scales must be >= 0");
    for (const auto& f : families)
      if (f != "centered_product" && f != "rademacher_mz" && f != "mcdiarmid_mean" &&
          f != "bernstein_coverage")
        throw std::invalid_argument("AuditConfig: unknown family '" + f + "'");
  }
};

struct AuditCell {
  std::string family;
  int n = 0;
  double p = 2.0;
  bool pass = false;
  std::string note;
  // dominance cells
  double bound = std::numeric_limits<double>::quiet_NaN();
  double bound_eq2 = std::numeric_limits<double>::quiet_NaN();  // centered_product only
  PNormEstimate estimate;
  // coverage cells: (delta, bound, violation fraction)
  struct Coverage {
    double delta = 0.0;
    double bound = 0.0;
    double violation_fraction = 0.0;
  };
  std::vector<Coverage> coverage;
};

struct AuditReport {
  AuditConfig config;
  std::vector<AuditCell> cells;
  int violations = 0;
  bool pass = true;
};

namespace detail {

inline std::uint64_t mix_p(double p) { return std::bit_cast<std::uint64_t>(p); }

inline AuditCell run_audit_cell(const AuditConfig& config, const std::string& family, int n,
                                double p) {
  AuditCell cell;
  cell.family = family;
  cell.n = n;
  cell.p = p;
  std::uint64_t cell_seed =
      mix_seed({config.base_seed, fnv1a64(family), static_cast<std::uint64_t>(n), mix_p(p)});

  if (family == "centered_product") {
    Rng dir_rng(mix_seed({config.base_seed, 0xD12}));
    Eigen::VectorXd u(config.d);
    for (int j = 0; j < config.d; ++j) u(j) = dir_rng.next_gaussian();
    u.normalize();
    CenteredProductFamily fam = centered_product_family(n, config.c, u, cell_seed);
    MomentBoundInputs inputs{n, p, 0.0, fam.beta()};
    cell.bound = theorem1_moment_bound(inputs);
    cell.bound_eq2 = eq2_moment_bound(inputs);
    cell.estimate = mc_pnorm([&fam](std::uint64_t s) { return fam.draw_at(s).sum; }, p,
                             config.trials, cell_seed);
    cell.pass = cell.estimate.ci_high <= cell.bound && cell.bound <= cell.bound_eq2;
    cell.note = "G=0, beta=2c^2; also checks bound <= baseline bound";
    return cell;
  }

  if (family == "rademacher_mz") {
    // i.i.d. centered unit-norm terms eps_i * u: the per-term p-norm is 1.
    Rng dir_rng(mix_seed({config.base_seed, 0xD12}));
    Eigen::VectorXd u(config.d);
    for (int j = 0; j < config.d; ++j) u(j) = dir_rng.next_gaussian();
    u.normalize();
    auto sampler = [&u, n](std::uint64_t stream) {
      Rng rng(mix_seed({stream, 0x3A}));
      double coeff = 0.0;
      for (int i = 0; i < n; ++i) coeff += rng.next_sign();
      return Eigen::VectorXd(coeff * u);
    };
    cell.bound = mz_coefficient(n, p);
    cell.estimate = mc_pnorm(sampler, p, config.trials, cell_seed);
    cell.pass = cell.estimate.ci_high <= cell.bound;
    cell.note = "per-term p-norm is exactly 1";
    return cell;
  }

  if (family == "mcdiarmid_mean") {
    // Vector mean of truncated Gaussians; replacing one sample moves the
    // mean by at most 2 B_dev / n.
    int d = config.d;
    double sigma = config.sigma;
    auto sampler = [d, sigma, n](std::uint64_t stream) {
      Rng rng(mix_seed({stream, 0x4B}));
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
      for (int i = 0; i < n; ++i) mean += truncated_gaussian(d, sigma, rng);
      return Eigen::VectorXd(mean / static_cast<double>(n));
    };
    double beta = 2.0 * (6.0 * sigma) / static_cast<double>(n);
    cell.bound = mcdiarmid_pnorm_bound(n, p, beta, McDiarmidVariant::vector_valued);
    cell.estimate = mc_pnorm(sampler, p, config.trials, cell_seed);
    cell.pass = cell.estimate.ci_high <= cell.bound;
    cell.note = "beta = 2*B_dev/n";
    return cell;
  }

  // bernstein_coverage: p is part of the grid shape but plays no role in
  // the bound; each cell checks every configured delta.
  int d = config.d;
  double sigma = config.sigma;
  double sigma_sq = d * truncated_coord_variance(sigma, d);
  double m_bound = 6.0 * sigma;
  std::vector<double> norms(static_cast<std::size_t>(config.trials));
  for (long long t = 0; t < config.trials; ++t) {
    Rng rng(mix_seed({cell_seed, static_cast<std::uint64_t>(t), 0x5C}));
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < n; ++i) mean += truncated_gaussian(d, sigma, rng);
    norms[static_cast<std::size_t>(t)] = (mean / static_cast<double>(n)).norm();
  }
  cell.pass = true;
  for (double delta : config.coverage_deltas) {
    AuditCell::Coverage cov;
    cov.delta = delta;
    cov.bound = vector_bernstein_tail(n, sigma_sq, m_bound, delta);
    std::size_t over = 0;
    for (double v : norms)
      if (v > cov.bound) ++over;
    cov.violation_fraction = static_cast<double>(over) / static_cast<double>(config.trials);
    cell.pass = cell.pass && cov.violation_fraction <= delta;
    cell.coverage.push_back(cov);
  }
  cell.estimate.trials = config.trials;
  cell.note = "coverage family; p recorded but unused";
  return cell;
}

}  // namespace detail

inline AuditReport run_concentration_audit(const AuditConfig& config) {
  config.validate();
  AuditReport report;
  report.config = config;
  std::size_t cell_count = config.families.size() * config.n_grid.size() * config.p_grid.size();
  report.cells.resize(cell_count);
  std::size_t per_family = config.n_grid.size() * config.p_grid.size();
  parallel_for(cell_count, config.workers, [&](std::size_t idx) {
    std::size_t f = idx / per_family;
    std::size_t rem = idx % per_family;
    std::size_t ni = rem / config.p_grid.size();
    std::size_t pi = rem % config.p_grid.size();
    report.cells[idx] = detail::run_audit_cell(config, config.families[f], config.n_grid[ni],
                                               config.p_grid[pi]);
  });
  for (const auto& cell : report.cells)
    if (!cell.pass) ++report.violations;
  report.pass = report.violations == 0;
  return report;
}

inline json audit_report_to_json(const AuditReport& report) {
  json j;
  j["version"] = 1;
  j["trials"] = report.config.trials;
  j["families"] = report.config.families;
  j["n_grid"] = report.config.n_grid;
  j["p_grid"] = report.config.p_grid;
  j["d"] = report.config.d;
  j["c"] = report.config.c;
  j["sigma"] = report.config.sigma;
  j["coverage_deltas"] = report.config.coverage_deltas;
  j["base_seed"] = report.config.base_seed;
  j["cells"] = json::array();
  for (const auto& cell : report.cells) {
    json c;
    c["family"] = cell.family;
    c["n"] = cell.n;
    c["p"] = cell.p;
    c["pass"] = cell.pass;
    if (!std::isnan(cell.bound)) c["bound"] = cell.bound;
    if (!std::isnan(cell.bound_eq2)) c["bound_eq2"] = cell.bound_eq2;
    if (cell.estimate.trials > 0 && cell.coverage.empty()) {
      c["point_estimate"] = cell.estimate.point_estimate;
      c["ci_low"] = cell.estimate.ci_low;
      c["ci_high"] = cell.estimate.ci_high;
    }
    if (!cell.coverage.empty()) {
      c["coverage"] = json::array();
      for (const auto& cov : cell.coverage) {
        json cj;
        cj["delta"] = cov.delta;
        cj["bound"] = cov.bound;
        cj["violation_fraction"] = cov.violation_fraction;
        c["coverage"].push_back(cj);
      }
    }
    c["note"] = cell.note;
    j["cells"].push_back(c);
  }
  j["violations"] = report.violations;
  j["pass"] = report.pass;
  return j;
}

}  // namespace risklab
