#pragma once

// Evaluators for the explicit-constant generalization bounds and for the
// order-level excess-risk report (unit constants, slope-testable only).

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "risklab/concentration.hpp"
#include "risklab/io.hpp"

namespace risklab {

struct BoundTerm {
  std::string name;
  double value = 0.0;
};

struct BoundReport {
  std::string name;
  std::vector<std::pair<std::string, double>> inputs;
  std::vector<BoundTerm> terms;
  double total = 0.0;
  bool constants_explicit = true;

  void finalize() {
    total = 0.0;
    for (const auto& t : terms) {
      if (t.value < 0.0) throw std::invalid_argument("BoundReport: negative term " + t.name);
      total += t.value;
    }
  }
};

// Gradient-gap bound 2 beta + 4M(1 + e sqrt(2 log(e/delta)))/sqrt(n)
//                    + 8 * 2^{1/4} (sqrt(2)+1) sqrt(e) beta ceil(log2 n) log(e/delta).
inline BoundReport thm2_bound(double M, double beta, long long n, double delta) {
  if (n < 1) throw std::invalid_argument("thm2_bound: n must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("thm2_bound: delta in (0,1)");
  if (M < 0.0 || beta < 0.0) throw std::invalid_argument("thm2_bound: M, beta must be >= 0");
  BoundReport r;
  r.name = "gradient_gap_explicit";
  r.inputs = {{"M", M}, {"beta", beta}, {"n", static_cast<double>(n)}, {"delta", delta}};
  double nn = static_cast<double>(n);
  double log_ed = std::log(kE / delta);
  double l2n = static_cast<double>(ceil_log2(n));
  r.terms.push_back({"stability", 2.0 * beta});
  r.terms.push_back({"sampling", 4.0 * M * (1.0 + kE * std::sqrt(2.0 * log_ed)) / std::sqrt(nn)});
  r.terms.push_back({"moment_tail", 8.0 * std::pow(2.0, 0.25) * (std::sqrt(2.0) + 1.0) *
                                        std::sqrt(kE) * beta * l2n * log_ed});
  r.finalize();
  return r;
}

// Variance-sensitive gradient-gap bound
//   sqrt(4 V log(6/delta)/n) + sqrt((beta^2/2 + 32 n beta^2 log(3/delta)) log(6/delta)/n)
//   + M log(6/delta)/n + 16 * 2^{3/4} sqrt(e) beta ceil(log2 n) log(3e/delta)
//   + 32 sqrt(e) beta ceil(log2 n) sqrt(log(3e/delta)).
inline BoundReport thm3_bound(double V, double beta, double M, long long n, double delta) {
  if (n < 1) throw std::invalid_argument("thm3_bound: n must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("thm3_bound: delta in (0,1)");
  if (V < 0.0 || M < 0.0 || beta < 0.0)
    throw std::invalid_argument("thm3_bound: V, M, beta must be >= 0");
  BoundReport r;
  r.name = "gradient_gap_variance";
  r.inputs = {{"V", V}, {"beta", beta}, {"M", M}, {"n", static_cast<double>(n)}, {"delta", delta}};
  double nn = static_cast<double>(n);
  double log6 = std::log(6.0 / delta);
  double log3 = std::log(3.0 / delta);
  double log3e = std::log(3.0 * kE / delta);
  double l2n = static_cast<double>(ceil_log2(n));
  r.terms.push_back({"variance", std::sqrt(4.0 * V * log6 / nn)});
  r.terms.push_back(
      {"stability_bernstein",
       std::sqrt((0.5 * beta * beta + 32.0 * nn * beta * beta * log3) * log6 / nn)});
  r.terms.push_back({"range", M * log6 / nn});
  r.terms.push_back({"moment_tail",
                     16.0 * std::pow(2.0, 0.75) * std::sqrt(kE) * beta * l2n * log3e});
  r.terms.push_back({"moment_tail_sqrt", 32.0 * std::sqrt(kE) * beta * l2n * std::sqrt(log3e)});
  r.finalize();
  return r;
}

// Order-level excess-risk report. Each addend carries a unit constant; the
// report exists so experiments can test slopes, never magnitudes.
inline BoundReport excess_order_bound(double opt_grad_sq, double F_star, double beta, long long n,
                                      double delta) {
  if (n < 1) throw std::invalid_argument("excess_order_bound: n must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("excess_order_bound: delta in (0,1)");
  if (opt_grad_sq < 0.0 || F_star < 0.0 || beta < 0.0)
    throw std::invalid_argument("excess_order_bound: inputs must be >= 0");
  BoundReport r;
  r.name = "excess_risk_order";
  r.constants_explicit = false;
  r.inputs = {{"opt_grad_sq", opt_grad_sq},
              {"F_star", F_star},
              {"beta", beta},
              {"n", static_cast<double>(n)},
              {"delta", delta}};
  double nn = static_cast<double>(n);
  double l = std::log(1.0 / delta);
  double ln_n = std::log(nn);
  r.terms.push_back({"optimization", opt_grad_sq});
  r.terms.push_back({"risk_sampling", F_star * l / nn});
  r.terms.push_back({"tail", l * l / (nn * nn)});
  r.terms.push_back({"stability", beta * beta * ln_n * ln_n * l * l});
  r.finalize();
  return r;
}

// n >= 16 gamma^2 log(6/delta) / mu^2 gates the fast-rate statements.
inline double sample_size_threshold(double gamma, double mu, double delta) {
  if (!(mu > 0.0) || gamma < mu)
    throw std::invalid_argument("sample_size_threshold: need gamma >= mu > 0");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("sample_size_threshold: delta in (0,1)");
  return 16.0 * gamma * gamma * std::log(6.0 / delta) / (mu * mu);
}

}  // namespace risklab
