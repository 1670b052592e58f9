// risklab command-line front end.
//
// Subcommands: verify-concentration, stability, scaling, gradient-gap,
// bounds-table, run. Configuration comes from a flat key-value file
// (--config), overridden by repeated --set key=value flags. Every invocation
// writes manifest.cfg (the fully resolved configuration plus meta.*) next to
// its outputs; re-running from that manifest reproduces every output file
// byte-identically at any worker count.
//
// Exit codes: 0 success, 1 audit violation or runtime failure, 2 config error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "risklab/audit.hpp"
#include "risklab/bounds_table.hpp"
#include "risklab/config.hpp"
#include "risklab/experiments.hpp"
#include "risklab/io.hpp"
#include "risklab/rand.hpp"
#include "risklab/reporting.hpp"
#include "risklab/stability.hpp"
#include "risklab/version.hpp"

namespace {

using namespace risklab;

struct CliOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  int workers = 0;
  std::vector<std::string> overrides;
};

const std::vector<KeySpec> kMetaSchema = {
    {"seed", "u64", "1", "base seed for every derived random stream"},
    {"meta.version", "string", "", "artifact version (written into manifests)"},
    {"meta.subcommand", "string", "", "subcommand a manifest belongs to"},
};

const std::vector<KeySpec> kProblemSchema = {
    {"problem.d", "int", "4", "problem dimension"},
    {"problem.kappa", "real", "1", "condition number gamma/mu (mu is pinned to 1)"},
    {"problem.noise_rule", "string", "constant", "constant | inverse_n"},
    {"problem.noise_value", "real", "1", "sigma_b for constant, c for inverse_n (sigma_b^2 = c/n)"},
};

const std::vector<KeySpec> kAlgoSchema = {
    {"algorithm", "string", "erm", "erm | pgd | sgd"},
    {"algorithm.T", "int", "0", "iteration count; 0 picks the default budget"},
    {"algorithm.step_rule", "string", "strongly_convex",
     "constant | polynomial | strongly_convex (SGD only)"},
    {"algorithm.eta", "real", "0", "constant step; 0 picks 1/gamma for PGD"},
    {"algorithm.eta1", "real", "0", "polynomial rule scale, eta_t = eta1 * t^-theta"},
    {"algorithm.theta", "real", "0", "polynomial rule exponent in (0,1)"},
    {"algorithm.t0", "real", "0", "strongly_convex rule offset; 0 picks max(4*gamma/mu, 1)"},
};

std::vector<KeySpec> concat(std::initializer_list<std::vector<KeySpec>> parts) {
  std::vector<KeySpec> out;
  for (const auto& part : parts) out.insert(out.end(), part.begin(), part.end());
  return out;
}

std::string schema_footer(const std::vector<KeySpec>& schema) {
  std::string out = "Config keys (file lines `key = value`, overridable via --set key=value):\n";
  for (const auto& k : schema) {
    out += "  " + k.key + " (" + k.type;
    if (!k.default_value.empty()) out += ", default " + k.default_value;
    out += ")";
    if (!k.help.empty()) out += "  " + k.help;
    out += "\n";
  }
  return out;
}

// --seed beats the config file's `seed`, which beats RISKBOUND_LAB_SEED.
std::uint64_t resolve_seed(const KvConfig& cfg, const CliOptions& opts) {
  if (opts.seed) return *opts.seed;
  if (cfg.has("seed")) return cfg.get_u64("seed", 1);
  if (const char* env = std::getenv("RISKBOUND_LAB_SEED")) {
    std::string raw(env);
    try {
      std::size_t pos = 0;
      unsigned long long v = std::stoull(raw, &pos);
      if (pos != raw.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("RISKBOUND_LAB_SEED: expected unsigned integer, got '" + raw + "'");
    }
  }
  return 1;
}

// Loads --config, applies --set overrides, resolves the seed, rejects unknown
// keys, and fills every schema default so the manifest is self-contained.
KvConfig load_config(const CliOptions& opts, const std::string& subcommand,
                     const std::vector<KeySpec>& schema) {
  KvConfig cfg;
  if (!opts.config_path.empty()) cfg = KvConfig::from_file(opts.config_path);
  for (const auto& assignment : opts.overrides) cfg.set_assignment(assignment);
  cfg.validate_keys(schema);
  if (cfg.has("meta.subcommand") && cfg.get_string("meta.subcommand", "") != subcommand)
    throw ConfigError("meta.subcommand is '" + cfg.get_string("meta.subcommand", "") +
                      "' but the invoked subcommand is '" + subcommand + "'");
  cfg.set("seed", std::to_string(resolve_seed(cfg, opts)));
  for (const auto& k : schema)
    if (!cfg.has(k.key) && !k.default_value.empty()) cfg.set(k.key, k.default_value);
  cfg.set("meta.version", version());
  cfg.set("meta.subcommand", subcommand);
  return cfg;
}

void write_manifest(const CliOptions& opts, const KvConfig& cfg) {
  write_text_file(std::filesystem::path(opts.out_dir) / "manifest.cfg", cfg.serialize());
}

NoiseSpec parse_noise(const KvConfig& cfg) {
  std::string rule = cfg.get_string("problem.noise_rule", "constant");
  NoiseSpec noise;
  if (rule == "constant")
    noise.rule = NoiseRule::constant;
  else if (rule == "inverse_n")
    noise.rule = NoiseRule::inverse_n;
  else
    throw ConfigError("key 'problem.noise_rule': expected constant or inverse_n, got '" + rule +
                      "'");
  noise.value = cfg.get_real("problem.noise_value", 1.0);
  return noise;
}

ProblemTemplate parse_problem(const KvConfig& cfg, std::uint64_t seed) {
  ProblemTemplate tpl;
  tpl.d = static_cast<int>(cfg.get_int("problem.d", 4));
  tpl.kappa = cfg.get_real("problem.kappa", 1.0);
  tpl.noise = parse_noise(cfg);
  tpl.seed = seed;
  return tpl;
}

AlgoKind parse_algo_kind(const KvConfig& cfg, const std::string& def) {
  std::string raw = cfg.get_string("algorithm", def);
  if (raw == "erm") return AlgoKind::erm;
  if (raw == "pgd") return AlgoKind::pgd;
  if (raw == "sgd") return AlgoKind::sgd;
  throw ConfigError("key 'algorithm': expected erm, pgd or sgd, got '" + raw + "'");
}

StepRule parse_step_rule(const KvConfig& cfg, const std::string& key) {
  std::string raw = cfg.get_string(key, "strongly_convex");
  if (raw == "constant") return StepRule::constant;
  if (raw == "polynomial") return StepRule::polynomial;
  if (raw == "strongly_convex") return StepRule::strongly_convex;
  throw ConfigError("key '" + key + "': expected constant, polynomial or strongly_convex, got '" +
                    raw + "'");
}

AlgorithmConfig parse_algorithm(const KvConfig& cfg, std::uint64_t seed, const std::string& def) {
  AlgorithmConfig algo;
  algo.kind = parse_algo_kind(cfg, def);
  algo.T = cfg.get_int("algorithm.T", 0);
  algo.step_rule = algo.kind == AlgoKind::pgd ? StepRule::constant
                                              : parse_step_rule(cfg, "algorithm.step_rule");
  algo.eta = cfg.get_real("algorithm.eta", 0.0);
  algo.eta1 = cfg.get_real("algorithm.eta1", 0.0);
  algo.theta = cfg.get_real("algorithm.theta", 0.0);
  algo.t0 = cfg.get_real("algorithm.t0", 0.0);
  algo.algo_seed = seed;
  return algo;
}

std::vector<int> to_int_grid(const KvConfig& cfg, const std::string& key, const std::string& def) {
  std::vector<int> out;
  for (long long v : cfg.get_int_list(key, def)) {
    if (v < 1 || v > (1 << 30)) throw ConfigError("key '" + key + "': value out of range");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

Metric parse_metric(const KvConfig& cfg, const std::string& def) {
  std::string raw = cfg.get_string("metric", def);
  if (raw == "excess_risk") return Metric::excess_risk;
  if (raw == "grad_gap") return Metric::grad_gap;
  if (raw == "pop_grad_norm") return Metric::pop_grad_norm;
  if (raw == "weighted_grad_avg") return Metric::weighted_grad_avg;
  throw ConfigError("key 'metric': unknown metric '" + raw + "'");
}

// ---- verify-concentration ---------------------------------------------------

const std::vector<KeySpec> kAuditSchema = concat({kMetaSchema,
                                                  {
                                                      {"n_grid", "int_list", "8,16,32,64,128,256",
                                                       "sample sizes"},
                                                      {"p_grid", "real_list", "2,4,8",
                                                       "moment orders (p >= 2)"},
                                                      {"trials", "int", "10000",
                                                       "Monte-Carlo trials per cell"},
                                                      {"families", "string_list",
                                                       "centered_product,rademacher_mz,"
                                                       "mcdiarmid_mean,bernstein_coverage",
                                                       "random families to audit"},
                                                      {"d", "int", "4", "vector dimension"},
                                                      {"c", "real", "1",
                                                       "centered-product factor bound"},
                                                      {"sigma", "real", "1",
                                                       "truncated-Gaussian scale"},
                                                      {"coverage_deltas", "real_list", "0.1,0.01",
                                                       "tail levels for the coverage family"},
                                                  }});

int run_verify_concentration(const CliOptions& opts) {
  KvConfig cfg = load_config(opts, "verify-concentration", kAuditSchema);
  AuditConfig acfg;
  acfg.n_grid = to_int_grid(cfg, "n_grid", "8,16,32,64,128,256");
  acfg.p_grid = cfg.get_real_list("p_grid", "2,4,8");
  acfg.trials = cfg.get_int("trials", 10000);
  acfg.families = cfg.get_string_list("families",
                                      "centered_product,rademacher_mz,mcdiarmid_mean,"
                                      "bernstein_coverage");
  acfg.d = static_cast<int>(cfg.get_int("d", 4));
  acfg.c = cfg.get_real("c", 1.0);
  acfg.sigma = cfg.get_real("sigma", 1.0);
  acfg.coverage_deltas = cfg.get_real_list("coverage_deltas", "0.1,0.01");
  acfg.base_seed = cfg.get_u64("seed", 1);
  acfg.workers = opts.workers;
  acfg.validate();

  AuditReport report = run_concentration_audit(acfg);
  write_text_file(std::filesystem::path(opts.out_dir) / "audit.json",
                  audit_report_to_json(report).dump(2) + "\n");
  write_manifest(opts, cfg);
  std::cout << "cells: " << report.cells.size() << ", violations: " << report.violations << ", "
            << (report.pass ? "PASS" : "FAIL") << "\n";
  return report.pass ? 0 : 1;
}

// ---- stability ----------------------------------------------------------------

const std::vector<KeySpec> kStabilitySchema = concat(
    {kMetaSchema,
     kProblemSchema,
     {
         {"algorithms", "string_list", "erm,pgd,sgd", "algorithms to audit"},
         {"n_grid", "int_list", "16,32,64,128", "sample sizes"},
         {"replicates", "int", "25", "audits per (algorithm, n) cell"},
         {"pgd.T", "int", "50", "PGD iteration count"},
         {"sgd.T", "int", "0", "SGD iteration count; 0 picks n^2"},
         {"sgd.step_rule", "string", "strongly_convex", "SGD step rule"},
         {"sgd.eta", "real", "0", "SGD constant step"},
         {"sgd.eta1", "real", "0", "SGD polynomial scale"},
         {"sgd.theta", "real", "0", "SGD polynomial exponent"},
         {"sgd.t0", "real", "0", "SGD strongly_convex offset; 0 picks the default"},
     }});

int run_stability(const CliOptions& opts) {
  KvConfig cfg = load_config(opts, "stability", kStabilitySchema);
  std::uint64_t seed = cfg.get_u64("seed", 1);
  ProblemTemplate tpl = parse_problem(cfg, seed);
  ProblemSpec spec = make_quadratic_spec(tpl.d, tpl.kappa, tpl.noise, tpl.seed);
  std::vector<std::string> algos = cfg.get_string_list("algorithms", "erm,pgd,sgd");
  std::vector<int> n_grid = to_int_grid(cfg, "n_grid", "16,32,64,128");
  int replicates = static_cast<int>(cfg.get_int("replicates", 25));
  if (replicates < 1) throw ConfigError("key 'replicates': must be >= 1");

  std::vector<StabilityMeasurement> batch;
  long long violations = 0;
  for (const auto& name : algos) {
    AlgorithmConfig algo;
    if (name == "erm") {
      algo.kind = AlgoKind::erm;
    } else if (name == "pgd") {
      algo.kind = AlgoKind::pgd;
      algo.T = cfg.get_int("pgd.T", 50);
    } else if (name == "sgd") {
      algo.kind = AlgoKind::sgd;
      algo.T = cfg.get_int("sgd.T", 0);
      algo.step_rule = parse_step_rule(cfg, "sgd.step_rule");
      algo.eta = cfg.get_real("sgd.eta", 0.0);
      algo.eta1 = cfg.get_real("sgd.eta1", 0.0);
      algo.theta = cfg.get_real("sgd.theta", 0.0);
      algo.t0 = cfg.get_real("sgd.t0", 0.0);
    } else {
      throw ConfigError("key 'algorithms': expected erm, pgd or sgd, got '" + name + "'");
    }
    std::uint64_t tag = fnv1a64(name);
    for (int n : n_grid) {
      AlgorithmConfig cell_algo = algo;
      if (cell_algo.kind == AlgoKind::sgd && cell_algo.T == 0)
        cell_algo.T = static_cast<long long>(n) * n;
      for (int rep = 0; rep < replicates; ++rep) {
        std::uint64_t un = static_cast<std::uint64_t>(n);
        std::uint64_t ur = static_cast<std::uint64_t>(rep);
        cell_algo.algo_seed = mix_seed({seed, tag, un, ur, 0xA160});
        Rng pick(mix_seed({seed, tag, un, ur, 0x1D}));
        int i = 1 + static_cast<int>(pick.next_below(static_cast<std::uint64_t>(n)));
        StabilityMeasurement m =
            estimate_grad_stability(spec, cell_algo, n, i, mix_seed({seed, tag, un, ur, 0xDA7A}),
                                    mix_seed({seed, tag, un, ur, 0x5EED}));
        if (m.measured_beta > m.theoretical_beta) ++violations;
        batch.push_back(std::move(m));
      }
    }
  }

  write_text_file(std::filesystem::path(opts.out_dir) / "stability.csv",
                  stability_measurements_to_csv(batch));

  json summary;
  summary["version"] = 1;
  summary["total"] = batch.size();
  summary["violations"] = violations;
  summary["pass"] = violations == 0;
  summary["per_algorithm"] = json::array();
  for (const auto& name : algos) {
    AlgoKind kind = name == "erm" ? AlgoKind::erm : name == "pgd" ? AlgoKind::pgd : AlgoKind::sgd;
    long long count = 0, bad = 0;
    double max_ratio = 0.0;
    for (const auto& m : batch) {
      if (m.algorithm.kind != kind) continue;
      ++count;
      if (m.measured_beta > m.theoretical_beta) ++bad;
      if (m.theoretical_beta > 0.0) max_ratio = std::max(max_ratio, m.measured_beta / m.theoretical_beta);
    }
    summary["per_algorithm"].push_back(
        {{"algorithm", name}, {"count", count}, {"violations", bad}, {"max_ratio", max_ratio}});
  }
  write_text_file(std::filesystem::path(opts.out_dir) / "stability.json",
                  summary.dump(2) + "\n");
  write_manifest(opts, cfg);
  std::cout << "audits: " << batch.size() << ", violations: " << violations << ", "
            << (violations == 0 ? "PASS" : "FAIL") << "\n";
  return violations == 0 ? 0 : 1;
}

// ---- scaling / gradient-gap -----------------------------------------------

const std::vector<KeySpec> kExperimentSchema = concat(
    {kMetaSchema,
     kProblemSchema,
     kAlgoSchema,
     {
         {"metric", "string", "", "measured quantity (subcommand default if empty)"},
         {"n_grid", "int_list", "", "sample sizes (subcommand default if empty)"},
         {"replicates", "int", "200", "independent replicates per n"},
         {"delta", "real", "0.05", "tail level; quantile order is 1 - delta"},
     }});

ExperimentConfig parse_experiment(const KvConfig& cfg, const CliOptions& opts,
                                  const std::string& default_metric,
                                  const std::string& default_grid) {
  std::uint64_t seed = cfg.get_u64("seed", 1);
  ExperimentConfig ec;
  ec.problem = parse_problem(cfg, seed);
  ec.algo = parse_algorithm(cfg, seed, "erm");
  ec.n_grid = to_int_grid(cfg, "n_grid", default_grid);
  ec.replicates = static_cast<int>(cfg.get_int("replicates", 200));
  ec.delta = cfg.get_real("delta", 0.05);
  ec.metric = parse_metric(cfg, default_metric);
  ec.base_seed = seed;
  ec.workers = opts.workers;
  return ec;
}

int run_experiment_subcommand(const CliOptions& opts, const std::string& name) {
  KvConfig cfg = load_config(opts, name, kExperimentSchema);
  bool gap = name == "gradient-gap";
  ExperimentConfig ec = parse_experiment(cfg, opts, gap ? "grad_gap" : "excess_risk",
                                         gap ? "32,64,128,256" : "32,64,128,256,512,1024");
  ExperimentResult result =
      gap ? run_gradient_gap_experiment(ec) : run_scaling_experiment(ec);
  write_experiment_outputs(opts.out_dir, ec, result);
  write_manifest(opts, cfg);

  std::cout << metric_name(ec.metric) << " over n in [" << ec.n_grid.front() << ", "
            << ec.n_grid.back() << "], " << ec.replicates << " replicates\n";
  if (result.degenerate_metric) std::cout << "degenerate metric: quantile hit zero\n";
  if (result.slope_fit)
    std::cout << "log-log slope: " << fmt_double(result.slope_fit->slope)
              << " (r^2 = " << fmt_double(result.slope_fit->r_squared) << ")\n";
  for (const auto& curve : result.curves) {
    double min_frac = 1.0;
    for (double f : curve.fraction) min_frac = std::min(min_frac, f);
    std::cout << "bound " << curve.name
              << ": min per-n coverage = " << fmt_double(min_frac) << "\n";
  }
  return 0;
}

// ---- bounds-table -----------------------------------------------------------

const std::vector<KeySpec> kBoundsTableSchema = concat(
    {kMetaSchema,
     kProblemSchema,
     {
         {"n", "int", "256", "sample size the bounds are evaluated at"},
         {"delta", "real", "0.05", "tail level"},
         {"eps_opt", "real", "0", "SGD empirical suboptimality fed into its budget"},
         {"pgd_T", "int", "0", "PGD iterations in the excess-risk row; 0 picks ~2 log n"},
     }});

int run_bounds_table(const CliOptions& opts) {
  KvConfig cfg = load_config(opts, "bounds-table", kBoundsTableSchema);
  std::uint64_t seed = cfg.get_u64("seed", 1);
  ProblemTemplate tpl = parse_problem(cfg, seed);
  ProblemSpec spec = make_quadratic_spec(tpl.d, tpl.kappa, tpl.noise, tpl.seed);
  long long n = cfg.get_int("n", 256);
  if (n < 1) throw ConfigError("key 'n': must be >= 1");
  Constants constants = constants_for(spec, static_cast<int>(n));
  long long pgd_T = cfg.get_int("pgd_T", 0);
  if (pgd_T == 0) pgd_T = pgd_iteration_budget(static_cast<int>(n), constants.gamma, constants.mu);
  BoundsTable table = bounds_table(constants, n, cfg.get_real("delta", 0.05),
                                   cfg.get_real("eps_opt", 0.0), pgd_T);
  std::string text = bounds_table_to_text(table);
  write_text_file(std::filesystem::path(opts.out_dir) / "bounds_table.txt", text);
  write_text_file(std::filesystem::path(opts.out_dir) / "bounds_table.csv",
                  bounds_table_to_csv(table));
  write_manifest(opts, cfg);
  std::cout << text;
  return 0;
}

// ---- run ---------------------------------------------------------------------

const std::vector<KeySpec> kRunSchema = concat(
    {kMetaSchema,
     kProblemSchema,
     kAlgoSchema,
     {
         {"n", "int", "128", "training-set size"},
         {"track_population", "bool", "true", "record population risk along the trajectory"},
         {"store_iterates", "bool", "false", "keep the iterates themselves"},
     }});

int run_single(const CliOptions& opts) {
  KvConfig cfg = load_config(opts, "run", kRunSchema);
  std::uint64_t seed = cfg.get_u64("seed", 1);
  ProblemTemplate tpl = parse_problem(cfg, seed);
  ProblemSpec spec = make_quadratic_spec(tpl.d, tpl.kappa, tpl.noise, tpl.seed);
  int n = static_cast<int>(cfg.get_int("n", 128));
  if (n < 1) throw ConfigError("key 'n': must be >= 1");

  AlgorithmConfig algo = parse_algorithm(cfg, mix_seed({seed, 0xA160}), "pgd");
  algo.track_population = cfg.get_bool("track_population", true);
  algo.store_iterates = cfg.get_bool("store_iterates", false);
  Constants constants = constants_for(spec, n);
  if (algo.T == 0) {
    if (algo.kind == AlgoKind::pgd)
      algo.T = pgd_iteration_budget(n, constants.gamma, constants.mu);
    else if (algo.kind == AlgoKind::sgd)
      algo.T = static_cast<long long>(n) * n;
  }

  std::uint64_t data_seed = mix_seed({seed, 0xDA7A});
  Dataset ds = sample_dataset(spec, n, data_seed);
  const PopulationOracle& oracle = constants.oracle;

  json solution;
  solution["version"] = 1;
  solution["n"] = n;
  solution["data_seed"] = data_seed;
  solution["algorithm"] = algo_name(algo.kind);
  Eigen::VectorXd w_hat;
  if (algo.kind == AlgoKind::erm) {
    Solution sol = solve_erm(spec, ds);
    w_hat = sol.w_hat;
    solution["F_S"] = sol.F_S;
    solution["grad_norm_S"] = sol.grad_norm;
    solution["closed_form"] = sol.closed_form;
  } else {
    Trajectory traj = algo.kind == AlgoKind::pgd ? run_pgd(spec, ds, algo)
                                                 : run_sgd(spec, ds, algo);
    w_hat = traj.final_w;
    solution["F_S"] = traj.final_F_S;
    solution["grad_norm_S"] = traj.final_grad_norm_S;
    solution["T"] = traj.T;
    write_text_file(std::filesystem::path(opts.out_dir) / "trajectory.csv",
                    trajectory_to_csv(traj, algo.track_population));
  }
  solution["F_pop"] = oracle.F(w_hat);
  solution["excess_risk"] = oracle.F(w_hat) - oracle.F_star;
  solution["w_hat"] = std::vector<double>(w_hat.data(), w_hat.data() + w_hat.size());

  write_text_file(std::filesystem::path(opts.out_dir) / "spec.json",
                  spec_to_json(spec).dump(2) + "\n");
  write_text_file(std::filesystem::path(opts.out_dir) / "solution.json",
                  solution.dump(2) + "\n");
  write_manifest(opts, cfg);
  std::cout << algo_name(algo.kind) << " on n = " << n
            << ": excess risk = " << fmt_double(oracle.F(w_hat) - oracle.F_star) << "\n";
  return 0;
}

void attach_common(CLI::App* sub, CliOptions& opts, const std::vector<KeySpec>& schema) {
  sub->add_option("--config", opts.config_path, "key-value configuration file");
  sub->add_option("--out", opts.out_dir, "output directory (default: out)");
  sub->add_option("--seed", opts.seed, "base seed; overrides config and RISKBOUND_LAB_SEED");
  sub->add_option("--workers", opts.workers, "worker threads; 0 = hardware concurrency");
  sub->add_option("--set", opts.overrides, "override a config key, e.g. --set replicates=100");
  sub->footer(schema_footer(schema));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("risklab ") + risklab::version() +
               " -- stability and concentration experiments on synthetic quadratics"};
  app.require_subcommand(1);

  CliOptions opts;
  int exit_code = 0;

  auto* vc = app.add_subcommand("verify-concentration",
                                "Monte-Carlo audit of the moment and tail bounds");
  attach_common(vc, opts, kAuditSchema);
  vc->callback([&] { exit_code = run_verify_concentration(opts); });

  auto* st = app.add_subcommand("stability", "measure gradient stability against the budgets");
  attach_common(st, opts, kStabilitySchema);
  st->callback([&] { exit_code = run_stability(opts); });

  auto* sc = app.add_subcommand("scaling", "excess-risk scaling in n with a log-log slope fit");
  attach_common(sc, opts, kExperimentSchema);
  sc->callback([&] { exit_code = run_experiment_subcommand(opts, "scaling"); });

  auto* gg = app.add_subcommand("gradient-gap",
                                "population/empirical gradient gap against the tail bounds");
  attach_common(gg, opts, kExperimentSchema);
  gg->callback([&] { exit_code = run_experiment_subcommand(opts, "gradient-gap"); });

  auto* bt = app.add_subcommand("bounds-table", "evaluate the bound formulas at given constants");
  attach_common(bt, opts, kBoundsTableSchema);
  bt->callback([&] { exit_code = run_bounds_table(opts); });

  auto* rn = app.add_subcommand("run", "single algorithm run with trajectory export");
  attach_common(rn, opts, kRunSchema);
  rn->callback([&] { exit_code = run_single(opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const risklab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
