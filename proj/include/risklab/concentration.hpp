#pragma once

// Closed-form evaluators for the moment and tail inequalities used by the
// generalization analysis, plus Monte-Carlo machinery that checks them
// empirically on constructed function families.

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "risklab/rand.hpp"

namespace risklab {

// ceil(log2 n); 0 at n = 1 (a single summand needs no dyadic partition).
inline int ceil_log2(long long n) {
  if (n < 1) throw std::invalid_argument("ceil_log2: n must be >= 1");
  if (n == 1) return 0;
  return std::bit_width(static_cast<std::uint64_t>(n - 1));
}

inline constexpr double kE = 2.718281828459045235360287471352662498;

// C_p = sqrt(2) (Gamma((p+1)/2)/sqrt(pi))^{1/p}, the optimal Khintchine
// constant for p >= 2.
inline double khintchine_constant(double p) {
  if (!(p >= 2.0)) throw std::invalid_argument("khintchine_constant: p must be >= 2");
  double log_ratio = std::lgamma((p + 1.0) / 2.0) - 0.5 * std::log(3.14159265358979323846);
  return std::sqrt(2.0) * std::exp(log_ratio / p);
}

// Marcinkiewicz-Zygmund coefficient 2 * 2^{1/(2p)} * sqrt(np/e) for the
// p-norm of a sum of n i.i.d. centered terms, in units of the per-term p-norm.
inline double mz_coefficient(long long n, double p) {
  if (n < 1) throw std::invalid_argument("mz_coefficient: n must be >= 1");
  if (!(p >= 2.0)) throw std::invalid_argument("mz_coefficient: p must be >= 2");
  return 2.0 * std::pow(2.0, 1.0 / (2.0 * p)) * std::sqrt(static_cast<double>(n) * p / kE);
}

enum class McDiarmidVariant { real_valued, vector_valued, expectation_only };

// p-norm bounds for a function of n independent variables with bounded
// differences beta: sqrt(2pn) beta (real-valued), (sqrt(2p)+1) sqrt(n) beta
// (vector-valued), sqrt(n) beta (deviation of the mean only).
inline double mcdiarmid_pnorm_bound(long long n, double p, double beta, McDiarmidVariant variant) {
  if (n < 1) throw std::invalid_argument("mcdiarmid_pnorm_bound: n must be >= 1");
  if (beta < 0.0) throw std::invalid_argument("mcdiarmid_pnorm_bound: beta must be >= 0");
  if (variant != McDiarmidVariant::expectation_only && !(p >= 2.0))
    throw std::invalid_argument("mcdiarmid_pnorm_bound: p must be >= 2");
  double nn = static_cast<double>(n);
  switch (variant) {
    case McDiarmidVariant::real_valued:
      return std::sqrt(2.0 * p * nn) * beta;
    case McDiarmidVariant::vector_valued:
      return (std::sqrt(2.0 * p) + 1.0) * std::sqrt(nn) * beta;
    case McDiarmidVariant::expectation_only:
      return std::sqrt(nn) * beta;
  }
  throw std::invalid_argument("mcdiarmid_pnorm_bound: unknown variant");
}

struct MomentBoundInputs {
  long long n = 1;
  double p = 2.0;
  double G = 0.0;     // bound on ||E[g_i | Z_i]||
  double beta = 0.0;  // bounded-difference constant

  void validate() const {
    if (n < 1) throw std::invalid_argument("MomentBoundInputs: n must be >= 1");
    if (!(p >= 2.0)) throw std::invalid_argument("MomentBoundInputs: p must be >= 2");
    if (G < 0.0 || beta < 0.0)
      throw std::invalid_argument("MomentBoundInputs: G and beta must be >= 0");
  }
};

// The sharpened moment bound for || sum g_i ||:
//   2 (sqrt(2p)+1) sqrt(n) G  +  4 * 2^{1/(2p)} sqrt(p/e) (sqrt(2p)+1) n beta ceil(log2 n).
inline std::pair<double, double> theorem1_terms(const MomentBoundInputs& in) {
  in.validate();
  double nn = static_cast<double>(in.n);
  double root = std::sqrt(2.0 * in.p) + 1.0;
  double first = 2.0 * root * std::sqrt(nn) * in.G;
  double second = 4.0 * std::pow(2.0, 1.0 / (2.0 * in.p)) * std::sqrt(in.p / kE) * root * nn *
                  in.beta * static_cast<double>(ceil_log2(in.n));
  return {first, second};
}

inline double theorem1_moment_bound(const MomentBoundInputs& in) {
  auto [first, second] = theorem1_terms(in);
  return first + second;
}

// The baseline it improves on:
//   2 (sqrt(2)+1) sqrt(np) G  +  4 (sqrt(2)+1) n p beta ceil(log2 n).
inline std::pair<double, double> eq2_terms(const MomentBoundInputs& in) {
  in.validate();
  double nn = static_cast<double>(in.n);
  double root = std::sqrt(2.0) + 1.0;
  double first = 2.0 * root * std::sqrt(nn * in.p) * in.G;
  double second = 4.0 * root * nn * in.p * in.beta * static_cast<double>(ceil_log2(in.n));
  return {first, second};
}

inline double eq2_moment_bound(const MomentBoundInputs& in) {
  auto [first, second] = eq2_terms(in);
  return first + second;
}

// Moment-to-tail conversion: a p-norm of a sqrt(p) + b p yields the
// high-probability bound e (a sqrt(log(e/delta)) + b log(e/delta)).
inline double tails_from_moments(double a, double b, double delta) {
  if (a < 0.0 || b < 0.0) throw std::invalid_argument("tails_from_moments: a, b must be >= 0");
  if (!(delta > 0.0 && delta <= 1.0))
    throw std::invalid_argument("tails_from_moments: delta must be in (0, 1]");
  double l = std::log(kE / delta);
  return kE * (a * std::sqrt(l) + b * l);
}

// Bernstein deviation of a mean of n i.i.d. centered vectors with
// E||X||^2 <= sigma^2 and ||X|| <= M:
//   sqrt(2 sigma^2 log(2/delta)/n) + M log(2/delta)/n.
inline double vector_bernstein_tail(long long n, double sigma_sq, double M_bound, double delta) {
  if (n < 1) throw std::invalid_argument("vector_bernstein_tail: n must be >= 1");
  if (sigma_sq < 0.0 || M_bound < 0.0)
    throw std::invalid_argument("vector_bernstein_tail: sigma_sq, M must be >= 0");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("vector_bernstein_tail: delta must be in (0, 1)");
  double nn = static_cast<double>(n);
  double l = std::log(2.0 / delta);
  return std::sqrt(2.0 * sigma_sq * l / nn) + M_bound * l / nn;
}

// ---- constructed families and Monte-Carlo p-norms ------------------------

// g_i(Z) = r(Z_i) s(Z_{i+1 mod n}) u with r, s independent centered signs
// scaled by c. Each conditional mean vanishes (so G = 0), changing one
// coordinate moves at most two summands by at most 2c^2 each (beta = 2c^2),
// and for c = 1 the 2-norm of the sum is exactly sqrt(n).
struct CenteredProductFamily {
  long long n = 0;
  double c = 1.0;
  Eigen::VectorXd u;
  std::uint64_t seed = 0;

  struct Draw {
    std::vector<Eigen::VectorXd> values;
    Eigen::VectorXd sum;
  };

  Draw draw_at(std::uint64_t stream) const {
    Rng rng(mix_seed({seed, stream, 0xC3}));
    std::vector<double> r(static_cast<std::size_t>(n)), s(static_cast<std::size_t>(n));
    for (auto& x : r) x = c * rng.next_sign();
    for (auto& x : s) x = c * rng.next_sign();
    Draw d;
    d.values.reserve(static_cast<std::size_t>(n));
    double coeff_sum = 0.0;
    for (long long i = 0; i < n; ++i) {
      double coeff = r[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>((i + 1) % n)];
      coeff_sum += coeff;
      d.values.push_back(coeff * u);
    }
    d.sum = coeff_sum * u;
    return d;
  }

  double beta() const { return 2.0 * c * c; }
};

inline CenteredProductFamily centered_product_family(long long n, double c,
                                                     const Eigen::VectorXd& u,
                                                     std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("centered_product_family: n must be >= 2");
  if (std::abs(u.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("centered_product_family: u must be a unit vector");
  CenteredProductFamily fam;
  fam.n = n;
  fam.c = c;
  fam.u = u;
  fam.seed = seed;
  return fam;
}

struct PNormEstimate {
  double p = 2.0;
  double point_estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  long long trials = 0;
};

// A sampler maps a derived stream id to one realization of the random vector.
using VectorSampler = std::function<Eigen::VectorXd(std::uint64_t stream)>;

// (E ||X||^p)^{1/p} by Monte Carlo with a 95% percentile-bootstrap interval
// (1000 resamples). The interval is widened, if needed, to contain the point
// estimate so downstream dominance checks stay conservative.
inline PNormEstimate mc_pnorm(const VectorSampler& sampler, double p, long long trials,
                              std::uint64_t seed) {
  if (trials < 100) throw std::invalid_argument("mc_pnorm: trials must be >= 100");
  if (!(p >= 1.0)) throw std::invalid_argument("mc_pnorm: p must be >= 1");
  std::vector<double> powered(static_cast<std::size_t>(trials));
  double acc = 0.0;
  for (long long t = 0; t < trials; ++t) {
    Eigen::VectorXd x = sampler(mix_seed({seed, static_cast<std::uint64_t>(t), 0x7A}));
    double norm = x.norm();
    double v = std::pow(norm, p);
    if (!std::isfinite(v)) throw std::runtime_error("mc_pnorm: nonfinite sample");
    powered[static_cast<std::size_t>(t)] = v;
    acc += v;
  }
  PNormEstimate est;
  est.p = p;
  est.trials = trials;
  est.point_estimate = std::pow(acc / static_cast<double>(trials), 1.0 / p);

  constexpr int kResamples = 1000;
  std::vector<double> stats(kResamples);
  Rng boot(mix_seed({seed, 0xB007}));
  for (int b = 0; b < kResamples; ++b) {
    double sum = 0.0;
    for (long long t = 0; t < trials; ++t)
      sum += powered[static_cast<std::size_t>(boot.next_below(static_cast<std::uint64_t>(trials)))];
    stats[static_cast<std::size_t>(b)] = std::pow(sum / static_cast<double>(trials), 1.0 / p);
  }
  std::sort(stats.begin(), stats.end());
  est.ci_low = stats[24];    // 2.5th percentile, nearest rank
  est.ci_high = stats[974];  // 97.5th percentile
  est.ci_low = std::min(est.ci_low, est.point_estimate);
  est.ci_high = std::max(est.ci_high, est.point_estimate);
  return est;
}

}  // namespace risklab
