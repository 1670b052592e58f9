#pragma once

// The summary-table analogue: one row per (source class, algorithm) with the
// qualitative columns (method, assumptions, sample-size order, rate) and,
// for the rows this lab evaluates, the numeric bound values at a given
// (problem, n, delta). Comparison rows keep their qualitative content only.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "risklab/bounds.hpp"
#include "risklab/io.hpp"
#include "risklab/stability.hpp"

namespace risklab {

struct BoundsTableRow {
  std::string group;        // uc_baseline, as_baseline, this_lab
  std::string algorithm;    // erm, pgd, sgd
  std::string method;       // UC or AS
  std::string assumptions;  // beyond Lipschitz + bounded gradient variance
  std::string sample_size;  // order of the required n, "-" when none
  std::string rate;
  // Evaluated columns; NaN renders as "-".
  double beta_budget = std::numeric_limits<double>::quiet_NaN();
  double thm2_total = std::numeric_limits<double>::quiet_NaN();
  double thm3_total = std::numeric_limits<double>::quiet_NaN();
  double excess_total = std::numeric_limits<double>::quiet_NaN();
};

struct BoundsTable {
  long long n = 0;
  double delta = 0.0;
  double threshold_n = 0.0;
  std::vector<BoundsTableRow> rows;
};

// eps_opt feeds the SGD stability budget (0 = fully optimized); pgd_T sets
// the PGD optimization term (1 - mu/gamma)^{2T} in the order-level report.
inline BoundsTable bounds_table(const Constants& constants, long long n, double delta,
                                double eps_opt = 0.0, long long pgd_T = 1) {
  if (n < 1) throw std::invalid_argument("bounds_table: n must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("bounds_table: delta in (0,1)");
  if (eps_opt < 0.0) throw std::invalid_argument("bounds_table: eps_opt must be >= 0");
  BoundsTable table;
  table.n = n;
  table.delta = delta;
  table.threshold_n = sample_size_threshold(constants.gamma, constants.mu, delta);

  table.rows.push_back({"uc_baseline", "erm", "UC", "smooth, SC, LN", "gamma*d/mu", "O(1/n^2)",
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN()});
  table.rows.push_back({"uc_baseline", "erm", "UC", "smooth, PL, LN", "gamma^2*d/mu^2",
                        "O(1/n^2)", std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN()});
  table.rows.push_back({"uc_baseline", "pgd", "UC", "smooth, PL, LN", "gamma^2*d/mu^2",
                        "O(1/n^2)", std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN()});
  table.rows.push_back({"uc_baseline", "sgd", "UC", "smooth, PL, LN", "gamma^2*d/mu^2",
                        "O(1/n^2)", std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN()});
  table.rows.push_back({"as_baseline", "sgd", "AS", "smooth, SC", "-", "O(1/n)",
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN()});
  table.rows.push_back({"as_baseline", "erm", "AS", "SC", "-", "O(1/n)",
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN()});
  table.rows.push_back({"as_baseline", "pgd", "AS", "smooth, SC", "-", "O(1/n)",
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN()});

  double v_star = constants.V_at(constants.oracle.w_star);  // tr(Sigma_b)
  double f_star = constants.oracle.F_star;
  double contraction = 1.0 - constants.mu / constants.gamma;
  AlgorithmConfig cfg;
  for (const char* algo : {"erm", "pgd", "sgd"}) {
    BoundsTableRow row;
    row.group = "this_lab";
    row.algorithm = algo;
    row.method = "AS";
    row.assumptions = "smooth, SC, LN";
    row.sample_size = "gamma^2/mu^2";
    row.rate = "O(1/n^2)";
    double opt_term = 0.0;
    if (row.algorithm == "erm") {
      cfg.kind = AlgoKind::erm;
      row.beta_budget = stability_budget(constants, static_cast<int>(n), cfg);
    } else if (row.algorithm == "pgd") {
      cfg.kind = AlgoKind::pgd;
      row.beta_budget = stability_budget(constants, static_cast<int>(n), cfg);
      opt_term = std::pow(contraction, 2.0 * static_cast<double>(pgd_T));
    } else {
      cfg.kind = AlgoKind::sgd;
      row.beta_budget = stability_budget(constants, static_cast<int>(n), cfg, eps_opt);
    }
    row.thm2_total = thm2_bound(constants.M, row.beta_budget, n, delta).total;
    row.thm3_total = thm3_bound(v_star, row.beta_budget, constants.M, n, delta).total;
    row.excess_total = excess_order_bound(opt_term, f_star, row.beta_budget, n, delta).total;
    table.rows.push_back(row);
  }
  return table;
}

namespace detail {

inline std::string cell(double v) {
  return std::isnan(v) ? std::string("-") : fmt_double(v);
}

}  // namespace detail

inline std::string bounds_table_to_csv(const BoundsTable& table) {
  std::string out =
      "group,algorithm,method,assumptions,sample_size,rate,beta_budget,thm2_total,thm3_total,"
      "excess_total_unit_constants\n";
  for (const auto& r : table.rows) {
    out += r.group + "," + r.algorithm + "," + r.method + ",\"" + r.assumptions + "\"," +
           r.sample_size + "," + r.rate + "," + detail::cell(r.beta_budget) + "," +
           detail::cell(r.thm2_total) + "," + detail::cell(r.thm3_total) + "," +
           detail::cell(r.excess_total) + "\n";
  }
  return out;
}

inline std::string bounds_table_to_text(const BoundsTable& table) {
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"group", "algorithm", "method", "assumptions", "sample size", "rate",
                  "beta budget", "thm2 total", "thm3 total", "excess total (unit c)"});
  for (const auto& r : table.rows)
    grid.push_back({r.group, r.algorithm, r.method, r.assumptions, r.sample_size, r.rate,
                    detail::cell(r.beta_budget), detail::cell(r.thm2_total),
                    detail::cell(r.thm3_total), detail::cell(r.excess_total)});
  std::vector<std::size_t> width(grid[0].size(), 0);
  for (const auto& row : grid)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::string out = "high-probability excess risk bounds at n = " + std::to_string(table.n) +
                    ", delta = " + fmt_double(table.delta) +
                    " (fast-rate threshold n >= " + fmt_double(table.threshold_n) + ")\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::string line;
    for (std::size_t c = 0; c < grid[i].size(); ++c) {
      std::string cellv = grid[i][c];
      cellv.resize(width[c], ' ');
      line += cellv;
      if (c + 1 < grid[i].size()) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
    if (i == 0) {
      std::size_t total = 0;
      for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c + 1 < width.size() ? 2 : 0);
      out += std::string(total, '-') + "\n";
    }
  }
  return out;
}

}  // namespace risklab
