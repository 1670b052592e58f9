#pragma once

// Serialization of experiment results: raw and summary CSV, a JSON summary,
// and two-column plot data. All numbers go through fmt_double so reruns are
// byte-identical.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "risklab/experiments.hpp"
#include "risklab/io.hpp"

namespace risklab {

inline const char* algo_name(AlgoKind k) {
  switch (k) {
    case AlgoKind::erm: return "erm";
    case AlgoKind::pgd: return "pgd";
    case AlgoKind::sgd: return "sgd";
  }
  return "?";
}

inline const char* step_rule_name(StepRule r) {
  switch (r) {
    case StepRule::constant: return "constant";
    case StepRule::polynomial: return "polynomial";
    case StepRule::strongly_convex: return "strongly_convex";
  }
  return "?";
}

inline json experiment_config_to_json(const ExperimentConfig& config) {
  json j;
  j["problem"] = {{"d", config.problem.d},
                  {"kappa", config.problem.kappa},
                  {"noise_rule",
                   config.problem.noise.rule == NoiseRule::constant ? "constant" : "inverse_n"},
                  {"noise_value", config.problem.noise.value},
                  {"seed", config.problem.seed}};
  j["algorithm"] = {{"kind", algo_name(config.algo.kind)},
                    {"T", config.algo.T},
                    {"step_rule", step_rule_name(config.algo.step_rule)},
                    {"eta", config.algo.eta},
                    {"eta1", config.algo.eta1},
                    {"theta", config.algo.theta},
                    {"t0", config.algo.t0},
                    {"algo_seed", config.algo.algo_seed}};
  j["n_grid"] = config.n_grid;
  j["replicates"] = config.replicates;
  j["delta"] = config.delta;
  j["metric"] = metric_name(config.metric);
  j["base_seed"] = config.base_seed;
  return j;
}

inline json experiment_result_to_json(const ExperimentConfig& config,
                                      const ExperimentResult& result) {
  json j;
  j["version"] = 1;
  j["config"] = experiment_config_to_json(config);
  j["threshold_n"] = result.threshold_n;
  j["degenerate_metric"] = result.degenerate_metric;
  j["per_n"] = json::array();
  for (const auto& s : result.per_n) {
    json row;
    row["n"] = s.n;
    row["quantile_value"] = s.quantile_value;
    row["mean"] = s.mean;
    row["sd"] = s.sd;
    row["replicates"] = s.replicates;
    row["below_threshold"] = s.below_threshold;
    j["per_n"].push_back(row);
  }
  if (result.slope_fit) {
    j["slope_fit"] = {{"slope", result.slope_fit->slope},
                      {"intercept", result.slope_fit->intercept},
                      {"r_squared", result.slope_fit->r_squared}};
  } else {
    j["slope_fit"] = nullptr;
  }
  j["bound_curves"] = json::array();
  for (const auto& curve : result.curves) {
    json c;
    c["name"] = curve.name;
    c["values"] = curve.values;
    c["dominance_fraction"] = curve.fraction;
    j["bound_curves"].push_back(c);
  }
  return j;
}

inline std::string experiment_raw_csv(const ExperimentConfig& config,
                                      const ExperimentResult& result) {
  std::string out = "n,replicate,value\n";
  for (std::size_t k = 0; k < result.raw.size(); ++k)
    for (std::size_t rep = 0; rep < result.raw[k].size(); ++rep) {
      out += std::to_string(config.n_grid[k]);
      out += ",";
      out += std::to_string(rep);
      out += ",";
      out += fmt_double(result.raw[k][rep]);
      out += "\n";
    }
  return out;
}

inline std::string experiment_summary_csv(const ExperimentConfig& config,
                                          const ExperimentResult& result) {
  (void)config;
  bool with_curves = !result.curves.empty();
  std::string out = "n,quantile,mean,sd,replicates,below_threshold";
  if (with_curves)
    for (const auto& curve : result.curves)
      out += ",bound_" + curve.name + ",dominance_" + curve.name;
  out += "\n";
  for (std::size_t k = 0; k < result.per_n.size(); ++k) {
    const auto& s = result.per_n[k];
    out += std::to_string(s.n);
    out += ",";
    out += fmt_double(s.quantile_value);
    out += ",";
    out += fmt_double(s.mean);
    out += ",";
    out += fmt_double(s.sd);
    out += ",";
    out += std::to_string(s.replicates);
    out += ",";
    out += s.below_threshold ? "1" : "0";
    if (with_curves)
      for (const auto& curve : result.curves) {
        out += ",";
        out += fmt_double(curve.values[k]);
        out += ",";
        out += fmt_double(curve.fraction[k]);
      }
    out += "\n";
  }
  return out;
}

// Two-column (x, y) plot data.
inline std::string plot_data(const std::vector<double>& x, const std::vector<double>& y) {
  std::string out;
  for (std::size_t i = 0; i < x.size(); ++i)
    out += fmt_double(x[i]) + " " + fmt_double(y[i]) + "\n";
  return out;
}

inline void write_experiment_outputs(const std::filesystem::path& dir,
                                     const ExperimentConfig& config,
                                     const ExperimentResult& result) {
  write_text_file(dir / "raw.csv", experiment_raw_csv(config, result));
  write_text_file(dir / "summary.csv", experiment_summary_csv(config, result));
  write_text_file(dir / "summary.json", experiment_result_to_json(config, result).dump(2) + "\n");

  std::vector<double> xs, ys;
  for (const auto& s : result.per_n) {
    xs.push_back(static_cast<double>(s.n));
    ys.push_back(s.quantile_value);
  }
  write_text_file(dir / "quantile_curve.dat", plot_data(xs, ys));
  if (result.slope_fit) {
    std::vector<double> fit_y;
    for (double x : xs)
      fit_y.push_back(std::exp(result.slope_fit->intercept) *
                      std::pow(x, result.slope_fit->slope));
    write_text_file(dir / "slope_fit.dat", plot_data(xs, fit_y));
  }
  for (const auto& curve : result.curves)
    write_text_file(dir / ("bound_" + curve.name + ".dat"), plot_data(xs, curve.values));
}

}  // namespace risklab
