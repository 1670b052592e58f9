#pragma once

// Synthetic quadratic problem family. Per-sample loss
//   f(w; z) = 1/2 w'Aw - <b(z), w> + c(z),   c(z) = 1/2 b(z)'A^{-1}b(z),
// equivalently 1/2 (w - A^{-1}b(z))' A (w - A^{-1}b(z)) >= 0, so the loss is
// nonnegative, gamma-smooth, mu-strongly-convex, and Lipschitz on the ball W.
// b(z) is b_mean plus an isotropic Gaussian deviation hard-truncated at six
// standard deviations, which keeps gradients bounded and population moments
// in closed form. A is kept in eigendecomposition A = Q diag(lambda) Q'.

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "risklab/io.hpp"
#include "risklab/rand.hpp"

namespace risklab {

enum class NoiseRule { constant, inverse_n };

// value = sigma_b under constant, c under inverse_n (per-dataset sigma^2 = c/n)
struct NoiseSpec {
  NoiseRule rule = NoiseRule::constant;
  double value = 0.0;
};

struct ProblemSpec {
  int d = 0;
  Eigen::VectorXd eigenvalues;  // ascending; front() = mu, back() = gamma
  Eigen::MatrixXd basis;        // orthogonal Q with A = Q diag(eigenvalues) Q'
  Eigen::VectorXd b_mean;
  double noise_scale = 0.0;  // worst-case sigma_b (the n = 1 scale under inverse_n)
  NoiseRule noise_rule = NoiseRule::constant;
  double noise_c = 0.0;              // inverse_n parameter, 0 under constant
  double noise_support_radius = 0.0; // B_dev = 6 * noise_scale
  double domain_radius = 0.0;        // R, feasible set is the ball ||w|| <= R
  std::uint64_t seed = 0;

  double mu() const { return eigenvalues(0); }
  double gamma() const { return eigenvalues(d - 1); }

  // Deviation scale used when a dataset of size n is drawn.
  double sigma_eff(int n) const {
    if (noise_rule == NoiseRule::constant) return noise_scale;
    return std::sqrt(noise_c / static_cast<double>(n));
  }

  Eigen::VectorXd apply_A(const Eigen::VectorXd& w) const {
    return basis * (eigenvalues.cwiseProduct(basis.transpose() * w));
  }
  Eigen::VectorXd apply_A_inv(const Eigen::VectorXd& w) const {
    return basis * ((basis.transpose() * w).cwiseQuotient(eigenvalues));
  }
};

struct Dataset {
  std::vector<Eigen::VectorXd> samples;  // the vectors b(z_i)
  int n = 0;
  std::uint64_t seed = 0;
  std::uint64_t spec_fingerprint = 0;

  // Anchored at the first sample so a constant dataset averages to it
  // exactly; the noiseless ERM run then recovers w* bitwise.
  Eigen::VectorXd mean() const {
    const Eigen::VectorXd& anchor = samples.at(0);
    Eigen::VectorXd dev = Eigen::VectorXd::Zero(anchor.size());
    for (const auto& s : samples) dev += s - anchor;
    return anchor + dev / static_cast<double>(n);
  }
};

// ---- construction ----------------------------------------------------

namespace detail {

inline Eigen::MatrixXd random_orthogonal(int d, Rng& rng) {
  if (d == 1) return Eigen::MatrixXd::Ones(1, 1);
  Eigen::MatrixXd g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = rng.next_gaussian();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the column signs so the factorization is canonical.
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace detail

inline ProblemSpec make_quadratic_spec(int d, double kappa, NoiseSpec noise, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("make_quadratic_spec: d must be >= 1");
  if (!(kappa >= 1.0)) throw std::invalid_argument("make_quadratic_spec: kappa must be >= 1");
  if (d == 1 && kappa > 1.0)
    throw std::invalid_argument(
        "make_quadratic_spec: d = 1 cannot carry lambda_min = 1 and lambda_max = kappa > 1");
  if (noise.value < 0.0) throw std::invalid_argument("make_quadratic_spec: noise value must be >= 0");

  ProblemSpec spec;
  spec.d = d;
  spec.seed = seed;
  spec.eigenvalues.resize(d);
  if (d == 1) {
    spec.eigenvalues(0) = 1.0;
  } else {
    // Geometric grid with the endpoints pinned exactly.
    for (int j = 0; j < d; ++j)
      spec.eigenvalues(j) = std::pow(kappa, static_cast<double>(j) / static_cast<double>(d - 1));
    spec.eigenvalues(0) = 1.0;
    spec.eigenvalues(d - 1) = kappa;
  }
  Rng basis_rng(mix_seed({seed, 0xA1}));
  spec.basis = detail::random_orthogonal(d, basis_rng);
  Rng mean_rng(mix_seed({seed, 0xB2}));
  spec.b_mean.resize(d);
  for (int j = 0; j < d; ++j) spec.b_mean(j) = mean_rng.next_gaussian();

  spec.noise_rule = noise.rule;
  if (noise.rule == NoiseRule::constant) {
    spec.noise_scale = noise.value;
    spec.noise_c = 0.0;
  } else {
    spec.noise_c = noise.value;
    spec.noise_scale = std::sqrt(noise.value);
  }
  spec.noise_support_radius = 6.0 * spec.noise_scale;
  // ||A^{-1}|| = 1/mu = 1; twice the worst-case unconstrained minimizer norm.
  spec.domain_radius = 2.0 * (spec.b_mean.norm() + spec.noise_support_radius);
  return spec;
}

// ---- serialization ----------------------------------------------------

using json = nlohmann::ordered_json;

inline json spec_to_json(const ProblemSpec& spec) {
  json j;
  j["version"] = 1;
  j["d"] = spec.d;
  j["eigenvalues"] = std::vector<double>(spec.eigenvalues.data(), spec.eigenvalues.data() + spec.d);
  std::vector<std::vector<double>> rows(spec.d, std::vector<double>(spec.d));
  for (int r = 0; r < spec.d; ++r)
    for (int c = 0; c < spec.d; ++c) rows[r][c] = spec.basis(r, c);
  j["basis"] = rows;
  j["b_mean"] = std::vector<double>(spec.b_mean.data(), spec.b_mean.data() + spec.d);
  j["noise_scale"] = spec.noise_scale;
  j["noise_rule"] = spec.noise_rule == NoiseRule::constant ? "constant" : "inverse_n";
  j["noise_c"] = spec.noise_c;
  j["noise_support_radius"] = spec.noise_support_radius;
  j["domain_radius"] = spec.domain_radius;
  j["seed"] = spec.seed;
  return j;
}

inline ProblemSpec spec_from_json(const json& j) {
  ProblemSpec spec;
  spec.d = j.at("d").get<int>();
  auto eig = j.at("eigenvalues").get<std::vector<double>>();
  auto bm = j.at("b_mean").get<std::vector<double>>();
  auto rows = j.at("basis").get<std::vector<std::vector<double>>>();
  if (static_cast<int>(eig.size()) != spec.d || static_cast<int>(bm.size()) != spec.d ||
      static_cast<int>(rows.size()) != spec.d)
    throw std::invalid_argument("spec_from_json: inconsistent dimensions");
  spec.eigenvalues = Eigen::Map<Eigen::VectorXd>(eig.data(), spec.d);
  spec.b_mean = Eigen::Map<Eigen::VectorXd>(bm.data(), spec.d);
  spec.basis.resize(spec.d, spec.d);
  for (int r = 0; r < spec.d; ++r) {
    if (static_cast<int>(rows[r].size()) != spec.d)
      throw std::invalid_argument("spec_from_json: ragged basis");
    for (int c = 0; c < spec.d; ++c) spec.basis(r, c) = rows[r][c];
  }
  std::string rule = j.at("noise_rule").get<std::string>();
  if (rule == "constant")
    spec.noise_rule = NoiseRule::constant;
  else if (rule == "inverse_n")
    spec.noise_rule = NoiseRule::inverse_n;
  else
    throw std::invalid_argument("spec_from_json: unknown noise_rule '" + rule + "'");
  spec.noise_scale = j.at("noise_scale").get<double>();
  spec.noise_c = j.at("noise_c").get<double>();
  spec.noise_support_radius = j.at("noise_support_radius").get<double>();
  spec.domain_radius = j.at("domain_radius").get<double>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  return spec;
}

inline std::uint64_t spec_fingerprint(const ProblemSpec& spec) {
  return fnv1a64(spec_to_json(spec).dump());
}

// ---- sampling ----------------------------------------------------------

namespace detail {

// Gaussian deviation resampled until it lands inside the 6-sigma ball.
inline Eigen::VectorXd truncated_gaussian(int d, double sigma, Rng& rng) {
  Eigen::VectorXd g(d);
  if (sigma == 0.0) {
    g.setZero();
    return g;
  }
  do {
    for (int j = 0; j < d; ++j) g(j) = rng.next_gaussian();
  } while (g.norm() > 6.0);
  return sigma * g;
}

}  // namespace detail

inline Dataset sample_dataset(const ProblemSpec& spec, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_dataset: n must be >= 1");
  Dataset ds;
  ds.n = n;
  ds.seed = seed;
  ds.spec_fingerprint = spec_fingerprint(spec);
  ds.samples.reserve(static_cast<std::size_t>(n));
  double sigma = spec.sigma_eff(n);
  Rng rng(mix_seed({seed, static_cast<std::uint64_t>(n), 0xD5}));
  for (int i = 0; i < n; ++i)
    ds.samples.push_back(spec.b_mean + detail::truncated_gaussian(spec.d, sigma, rng));
  return ds;
}

// One replacement sample z', drawn at the deviation scale of size-n datasets.
inline Eigen::VectorXd draw_replacement_sample(const ProblemSpec& spec, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("draw_replacement_sample: n must be >= 1");
  Rng rng(mix_seed({seed, static_cast<std::uint64_t>(n), 0xE7}));
  return spec.b_mean + detail::truncated_gaussian(spec.d, spec.sigma_eff(n), rng);
}

// S^(i): S with the i-th sample (1-based) replaced by z'.
inline Dataset make_neighbor(const Dataset& ds, int i, const Eigen::VectorXd& replacement) {
  if (i < 1 || i > ds.n) throw std::invalid_argument("make_neighbor: index out of range");
  Dataset out = ds;
  out.samples[static_cast<std::size_t>(i - 1)] = replacement;
  return out;
}

inline json dataset_to_json(const Dataset& ds, bool include_samples = true) {
  json j;
  j["version"] = 1;
  j["spec_fingerprint"] = hex_u64(ds.spec_fingerprint);
  j["n"] = ds.n;
  j["seed"] = ds.seed;
  if (include_samples) {
    std::vector<std::vector<double>> rows;
    rows.reserve(ds.samples.size());
    for (const auto& s : ds.samples)
      rows.emplace_back(s.data(), s.data() + s.size());
    j["samples"] = rows;
  }
  return j;
}

inline Dataset dataset_from_json(const json& j, const ProblemSpec& spec) {
  std::string fp = j.at("spec_fingerprint").get<std::string>();
  if (fp != hex_u64(spec_fingerprint(spec)))
    throw std::invalid_argument("dataset_from_json: spec fingerprint mismatch");
  int n = j.at("n").get<int>();
  std::uint64_t seed = j.at("seed").get<std::uint64_t>();
  if (!j.contains("samples")) return sample_dataset(spec, n, seed);
  Dataset ds;
  ds.n = n;
  ds.seed = seed;
  ds.spec_fingerprint = spec_fingerprint(spec);
  for (const auto& row : j.at("samples")) {
    auto vals = row.get<std::vector<double>>();
    if (static_cast<int>(vals.size()) != spec.d)
      throw std::invalid_argument("dataset_from_json: sample dimension mismatch");
    ds.samples.push_back(Eigen::Map<Eigen::VectorXd>(vals.data(), spec.d));
  }
  if (static_cast<int>(ds.samples.size()) != n)
    throw std::invalid_argument("dataset_from_json: sample count mismatch");
  return ds;
}

// ---- loss, risk, projection -------------------------------------------

// Returns (f(w; z), grad f(w; z)). The loss is evaluated in the eigenbasis
// as a sum of squares, which keeps it exactly nonnegative.
inline std::pair<double, Eigen::VectorXd> loss_and_grad(const ProblemSpec& spec,
                                                        const Eigen::VectorXd& w,
                                                        const Eigen::VectorXd& z) {
  if (w.size() != spec.d || z.size() != spec.d)
    throw std::invalid_argument("loss_and_grad: dimension mismatch");
  Eigen::VectorXd y = spec.basis.transpose() * w;
  Eigen::VectorXd bz = spec.basis.transpose() * z;
  double loss = 0.0;
  for (int jdx = 0; jdx < spec.d; ++jdx) {
    double lam = spec.eigenvalues(jdx);
    double r = y(jdx) - bz(jdx) / lam;
    loss += 0.5 * lam * r * r;
  }
  Eigen::VectorXd grad = spec.basis * (spec.eigenvalues.cwiseProduct(y) - bz);
  return {loss, grad};
}

inline Eigen::VectorXd project(const ProblemSpec& spec, const Eigen::VectorXd& w) {
  double norm = w.norm();
  if (norm <= spec.domain_radius) return w;
  if (spec.domain_radius == 0.0) return Eigen::VectorXd::Zero(w.size());
  return w * (spec.domain_radius / norm);
}

// ---- population quantities ---------------------------------------------

// Per-coordinate variance of an isotropic Gaussian truncated at radius
// 6*sigma. With u = 36, E||x||^2 = sigma^2 d F_{chi2,d+2}(u)/F_{chi2,d}(u)
// (the chi-squared identity x f_d(x) = d f_{d+2}(x)), and isotropy divides
// the second moment evenly across coordinates.
inline double truncated_coord_variance(double sigma, int d) {
  if (sigma == 0.0) return 0.0;
  double half_u = 18.0;  // u/2 with u = 6^2
  double num = boost::math::gamma_p((d + 2) / 2.0, half_u);
  double den = boost::math::gamma_p(d / 2.0, half_u);
  return sigma * sigma * num / den;
}

struct PopulationOracle {
  ProblemSpec spec;
  Eigen::VectorXd w_star;
  double F_star = 0.0;
  double coord_var = 0.0;  // exact per-coordinate variance of b(z) - b_mean

  double F(const Eigen::VectorXd& w) const {
    Eigen::VectorXd delta = spec.basis.transpose() * (w - w_star);
    double v = 0.0;
    for (int j = 0; j < spec.d; ++j) v += 0.5 * spec.eigenvalues(j) * delta(j) * delta(j);
    return v + F_star;
  }
  Eigen::VectorXd grad(const Eigen::VectorXd& w) const {
    return spec.apply_A(w - w_star);
  }
  // E_Z ||grad f(w; Z)||^2 = ||Aw - b_mean||^2 + tr(Sigma_b)
  double V(const Eigen::VectorXd& w) const {
    return grad(w).squaredNorm() + spec.d * coord_var;
  }
};

// The population is indexed by the dataset size under the inverse_n rule;
// n is inert under the constant rule.
inline PopulationOracle population_oracle(const ProblemSpec& spec, int n = 1) {
  PopulationOracle oracle;
  oracle.spec = spec;
  oracle.w_star = spec.apply_A_inv(spec.b_mean);
  oracle.coord_var = truncated_coord_variance(spec.sigma_eff(n), spec.d);
  // F* = 1/2 tr(A^{-1} Sigma_b) with Sigma_b = coord_var * I
  double tr_a_inv = spec.eigenvalues.cwiseInverse().sum();
  oracle.F_star = 0.5 * oracle.coord_var * tr_a_inv;
  return oracle;
}

struct Constants {
  double mu = 0.0;
  double gamma = 0.0;
  double M = 0.0;
  double B_dev = 0.0;
  double R = 0.0;
  double sigma_b_sq = 0.0;  // nominal sigma^2 at the given dataset size
  PopulationOracle oracle;

  double V_at(const Eigen::VectorXd& w) const { return oracle.V(w); }
};

inline Constants constants_for(const ProblemSpec& spec, int n = 1) {
  Constants c;
  c.mu = spec.mu();
  c.gamma = spec.gamma();
  c.B_dev = spec.noise_support_radius;
  c.R = spec.domain_radius;
  double sigma = spec.sigma_eff(n);
  c.sigma_b_sq = sigma * sigma;
  c.M = c.gamma * c.R + spec.b_mean.norm() + c.B_dev;
  c.oracle = population_oracle(spec, n);
  return c;
}

// ---- per-dataset quantities ---------------------------------------------

// (1/n) sum ||b_i - mean||^2; equals E_i ||grad f(w; z_i) - grad F_S(w)||^2
// at every w for this family, hence a valid sigma^2 for the SGD analysis.
inline double sgd_noise_variance(const ProblemSpec& spec, const Dataset& ds,
                                 const Eigen::VectorXd& w) {
  (void)spec;
  (void)w;  // the gradient spread does not depend on w here
  if (ds.samples.empty()) throw std::invalid_argument("sgd_noise_variance: empty dataset");
  Eigen::VectorXd mean = ds.mean();
  double acc = 0.0;
  for (const auto& s : ds.samples) acc += (s - mean).squaredNorm();
  return acc / static_cast<double>(ds.n);
}

// Max over probes of V(w)/||grad F(w)||^2 among probes with gradient mass
// >= floor. Returns nullopt ("not applicable") when noise is present and a
// probe sits below the floor, or when no probe clears the floor.
inline std::optional<double> sgc_ratio_estimate(const ProblemSpec& spec,
                                                const std::vector<Eigen::VectorXd>& probes,
                                                double floor) {
  if (probes.empty()) throw std::invalid_argument("sgc_ratio_estimate: empty probe list");
  if (!(floor > 0.0)) throw std::invalid_argument("sgc_ratio_estimate: floor must be > 0");
  PopulationOracle oracle = population_oracle(spec);
  bool measured = false;
  double best = 0.0;
  for (const auto& w : probes) {
    double g2 = oracle.grad(w).squaredNorm();
    if (g2 < floor) {
      if (spec.noise_scale > 0.0) return std::nullopt;
      continue;
    }
    best = std::max(best, oracle.V(w) / g2);
    measured = true;
  }
  if (!measured) return std::nullopt;
  return best;
}

}  // namespace risklab
