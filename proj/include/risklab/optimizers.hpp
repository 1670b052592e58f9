#pragma once

// Exact ERM plus projected (stochastic) gradient descent on the quadratic
// family. The iteration runs in the eigenbasis of A, where the update,
// projection (orthogonal basis preserves norms), empirical risk, and
// population quantities are all O(d) per step.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "risklab/problems.hpp"
#include "risklab/rand.hpp"

namespace risklab {

enum class AlgoKind { erm, pgd, sgd };
enum class StepRule { constant, polynomial, strongly_convex };

struct AlgorithmConfig {
  AlgoKind kind = AlgoKind::erm;
  long long T = 0;
  StepRule step_rule = StepRule::constant;
  double eta = 0.0;    // constant rule; 0 selects the default 1/gamma for PGD
  double eta1 = 0.0;   // polynomial rule eta_t = eta1 * t^-theta
  double theta = 0.0;
  double t0 = 0.0;     // strongly_convex rule eta_t = 2/(mu (t + t0)); 0 selects max(4 gamma/mu, 1)
  std::uint64_t algo_seed = 0;
  double erm_tolerance = 1e-12;
  bool track_population = false;
  bool store_iterates = false;
  long long stride = 0;  // 0: every step for T <= 1e4, ceil(T/1e4) beyond
};

struct Trajectory {
  std::vector<long long> steps;  // t values of the recorded rows, ending at T+1
  std::vector<double> eta;       // step used from w_t; NaN on the terminal row
  std::vector<double> F_S;
  std::vector<double> grad_norm_S;
  std::vector<double> F_pop;        // filled when track_population
  std::vector<double> grad_norm_pop;
  std::vector<Eigen::VectorXd> iterates;  // filled when store_iterates
  std::vector<long long> iterate_steps;
  Eigen::VectorXd final_w;
  double final_F_S = 0.0;
  double final_grad_norm_S = 0.0;
  double F_S_min = 0.0;  // empirical risk at the exact empirical minimizer
  double weighted_grad_avg = std::numeric_limits<double>::quiet_NaN();
  long long T = 0;
};

struct Solution {
  Eigen::VectorXd w_hat;
  double F_S = 0.0;
  double grad_norm = 0.0;
  bool closed_form = true;
};

inline long long resolve_stride(long long T, long long requested) {
  if (requested > 0) return requested;
  if (T <= 10000) return 1;
  return (T + 9999) / 10000;
}

// F_S(w) = (1/n) sum f(w; z_i), gradient A w - mean(b). Definitional
// per-sample averaging; the iterative solvers use an algebraically equal
// O(d) form internally.
inline std::pair<double, Eigen::VectorXd> empirical_risk_and_grad(const ProblemSpec& spec,
                                                                  const Dataset& ds,
                                                                  const Eigen::VectorXd& w) {
  if (ds.samples.empty()) throw std::invalid_argument("empirical_risk_and_grad: empty dataset");
  double risk = 0.0;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(spec.d);
  for (const auto& z : ds.samples) {
    auto [value, g] = loss_and_grad(spec, w, z);
    risk += value;
    grad += g;
  }
  double inv_n = 1.0 / static_cast<double>(ds.n);
  return {risk * inv_n, grad * inv_n};
}

namespace detail {

// Everything the iteration needs, rotated into the eigenbasis once.
struct EmpiricalView {
  Eigen::VectorXd lambda;
  std::vector<Eigen::VectorXd> b_rot;  // Q' b_i
  Eigen::VectorXd b_bar_rot;           // Q' mean(b)
  Eigen::VectorXd y_hat;               // rotated empirical minimizer
  double F_min = 0.0;                  // F_S at the minimizer
  Eigen::VectorXd y_star;              // rotated population minimizer
  double F_star = 0.0;
  Eigen::VectorXd b_mean_rot;

  static EmpiricalView build(const ProblemSpec& spec, const Dataset& ds, bool with_population) {
    if (ds.samples.empty() || ds.samples.front().size() != spec.d)
      throw std::invalid_argument("dataset does not match spec (dimension)");
    EmpiricalView v;
    v.lambda = spec.eigenvalues;
    v.b_rot.reserve(ds.samples.size());
    Eigen::MatrixXd qt = spec.basis.transpose();
    for (const auto& b : ds.samples) v.b_rot.push_back(qt * b);
    v.b_bar_rot = Eigen::VectorXd::Zero(spec.d);
    for (const auto& b : v.b_rot) v.b_bar_rot += b;
    v.b_bar_rot /= static_cast<double>(ds.n);
    v.y_hat = v.b_bar_rot.cwiseQuotient(v.lambda);
    // F_S(y_hat) as the average of per-sample losses, each a sum of squares.
    double acc = 0.0;
    for (const auto& b : v.b_rot)
      for (int j = 0; j < spec.d; ++j) {
        double r = v.y_hat(j) - b(j) / v.lambda(j);
        acc += 0.5 * v.lambda(j) * r * r;
      }
    v.F_min = acc / static_cast<double>(ds.n);
    if (with_population) {
      PopulationOracle oracle = population_oracle(spec, ds.n);
      v.y_star = qt * oracle.w_star;
      v.F_star = oracle.F_star;
    }
    v.b_mean_rot = qt * spec.b_mean;
    return v;
  }

  double F_S(const Eigen::VectorXd& y) const {
    double acc = 0.0;
    for (int j = 0; j < y.size(); ++j) {
      double r = y(j) - y_hat(j);
      acc += 0.5 * lambda(j) * r * r;
    }
    return acc + F_min;
  }
  double grad_norm_S(const Eigen::VectorXd& y) const {
    return (lambda.cwiseProduct(y) - b_bar_rot).norm();
  }
  double F_pop(const Eigen::VectorXd& y) const {
    double acc = 0.0;
    for (int j = 0; j < y.size(); ++j) {
      double r = y(j) - y_star(j);
      acc += 0.5 * lambda(j) * r * r;
    }
    return acc + F_star;
  }
  double grad_norm_pop_sq(const Eigen::VectorXd& y) const {
    return (lambda.cwiseProduct(y) - b_mean_rot).squaredNorm();
  }
};

inline void record_row(Trajectory& traj, const EmpiricalView& view, const ProblemSpec& spec,
                       const AlgorithmConfig& config, long long t, double eta,
                       const Eigen::VectorXd& y) {
  traj.steps.push_back(t);
  traj.eta.push_back(eta);
  traj.F_S.push_back(view.F_S(y));
  traj.grad_norm_S.push_back(view.grad_norm_S(y));
  if (config.track_population) {
    traj.F_pop.push_back(view.F_pop(y));
    traj.grad_norm_pop.push_back(std::sqrt(view.grad_norm_pop_sq(y)));
  }
  if (config.store_iterates) {
    traj.iterates.push_back(spec.basis * y);
    traj.iterate_steps.push_back(t);
  }
}

inline Trajectory run_projected(const ProblemSpec& spec, const Dataset& ds,
                                const AlgorithmConfig& config, bool stochastic) {
  if (config.T < 0) throw std::invalid_argument("iteration budget T must be >= 0");
  EmpiricalView view = EmpiricalView::build(spec, ds, config.track_population);
  long long stride = resolve_stride(config.T, config.stride);

  double gamma = spec.gamma();
  double mu = spec.mu();
  double eta_const = config.eta;
  double t0 = config.t0;
  if (!stochastic) {
    if (config.step_rule != StepRule::constant)
      throw std::invalid_argument("run_pgd: only the constant rule eta = 1/gamma is defined");
    if (eta_const == 0.0) eta_const = 1.0 / gamma;
    if (std::abs(eta_const * gamma - 1.0) > 1e-12)
      throw std::invalid_argument("run_pgd: constant rule requires eta = 1/gamma");
  } else {
    switch (config.step_rule) {
      case StepRule::constant:
        if (!(eta_const > 0.0)) throw std::invalid_argument("run_sgd: eta must be > 0");
        if (eta_const > 1.0 / (2.0 * gamma))
          throw std::invalid_argument("run_sgd: constant rule requires eta <= 1/(2*gamma)");
        break;
      case StepRule::polynomial:
        if (!(config.theta > 0.0 && config.theta < 1.0))
          throw std::invalid_argument("run_sgd: polynomial rule requires theta in (0,1)");
        if (!(config.eta1 > 0.0) || config.eta1 >= 1.0 / (2.0 * gamma))
          throw std::invalid_argument("run_sgd: polynomial rule requires 0 < eta1 < 1/(2*gamma)");
        break;
      case StepRule::strongly_convex:
        if (t0 == 0.0) t0 = std::max(4.0 * gamma / mu, 1.0);
        if (t0 < std::max(4.0 * gamma / mu, 1.0))
          throw std::invalid_argument("run_sgd: strongly_convex rule requires t0 >= max(4*gamma/mu, 1)");
        break;
    }
  }

  auto step_size = [&](long long t) -> double {
    switch (config.step_rule) {
      case StepRule::polynomial:
        return config.eta1 * std::pow(static_cast<double>(t), -config.theta);
      case StepRule::strongly_convex:
        return 2.0 / (mu * (static_cast<double>(t) + t0));
      case StepRule::constant:
      default:
        return eta_const;
    }
  };

  // Index stream is a function of (algo_seed, n) only, never of sample
  // values; neighboring-dataset runs with a shared algo_seed are coupled.
  Rng index_rng(mix_seed({config.algo_seed, static_cast<std::uint64_t>(ds.n), 0x51}));

  Trajectory traj;
  traj.T = config.T;
  traj.F_S_min = view.F_min;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(spec.d);  // w_1 = 0
  double weight_sum = 0.0;
  double weighted_sq_sum = 0.0;

  for (long long t = 1; t <= config.T; ++t) {
    double eta = step_size(t);
    if ((t - 1) % stride == 0) record_row(traj, view, spec, config, t, eta, y);
    if (config.track_population) {
      weight_sum += eta;
      weighted_sq_sum += eta * view.grad_norm_pop_sq(y);
    }
    const Eigen::VectorXd& b_t =
        stochastic ? view.b_rot[static_cast<std::size_t>(index_rng.next_below(
                         static_cast<std::uint64_t>(ds.n)))]
                   : view.b_bar_rot;
    y -= eta * (view.lambda.cwiseProduct(y) - b_t);
    double norm = y.norm();
    if (!std::isfinite(norm))
      throw std::runtime_error((stochastic ? std::string("run_sgd") : std::string("run_pgd")) +
                               ": numeric failure at step " + std::to_string(t));
    if (norm > spec.domain_radius)
      y *= (spec.domain_radius == 0.0 ? 0.0 : spec.domain_radius / norm);
  }
  record_row(traj, view, spec, config, config.T + 1,
             std::numeric_limits<double>::quiet_NaN(), y);
  traj.final_w = spec.basis * y;
  traj.final_F_S = traj.F_S.back();
  traj.final_grad_norm_S = traj.grad_norm_S.back();
  if (config.track_population && weight_sum > 0.0)
    traj.weighted_grad_avg = weighted_sq_sum / weight_sum;
  return traj;
}

}  // namespace detail

inline Trajectory run_pgd(const ProblemSpec& spec, const Dataset& ds, const AlgorithmConfig& config) {
  if (config.kind != AlgoKind::pgd) throw std::invalid_argument("run_pgd: config.kind must be PGD");
  return detail::run_projected(spec, ds, config, false);
}

inline Trajectory run_sgd(const ProblemSpec& spec, const Dataset& ds, const AlgorithmConfig& config) {
  if (config.kind != AlgoKind::sgd) throw std::invalid_argument("run_sgd: config.kind must be SGD");
  return detail::run_projected(spec, ds, config, true);
}

// Closed-form empirical minimizer A^{-1} mean(b); feasibility is guaranteed
// by the domain-radius invariant, with an iterative fallback kept as a guard.
inline Solution solve_erm(const ProblemSpec& spec, const Dataset& ds,
                          double erm_tolerance = 1e-12) {
  if (ds.samples.empty()) throw std::invalid_argument("solve_erm: empty dataset");
  Eigen::VectorXd b_bar = ds.mean();
  Eigen::VectorXd w_hat = spec.apply_A_inv(b_bar);
  Solution sol;
  if (w_hat.norm() <= spec.domain_radius) {
    sol.w_hat = w_hat;
    sol.closed_form = true;
  } else {
    AlgorithmConfig fallback;
    fallback.kind = AlgoKind::pgd;
    fallback.step_rule = StepRule::constant;
    fallback.T = 1;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(spec.d);
    double eta = 1.0 / spec.gamma();
    long long t = 0;
    while (true) {
      Eigen::VectorXd grad = spec.apply_A(w) - b_bar;
      if (grad.norm() <= erm_tolerance || t >= 1000000) break;
      w = project(spec, w - eta * grad);
      ++t;
    }
    sol.w_hat = w;
    sol.closed_form = false;
  }
  auto [risk, grad] = empirical_risk_and_grad(spec, ds, sol.w_hat);
  sol.F_S = risk;
  sol.grad_norm = grad.norm();
  return sol;
}

// ---- trajectory export ---------------------------------------------------

inline std::string trajectory_to_csv(const Trajectory& traj, bool with_population) {
  std::string out = "t,eta_t,F_S,grad_norm_S";
  if (with_population) out += ",F_pop,grad_norm_pop";
  out += "\n";
  for (std::size_t r = 0; r < traj.steps.size(); ++r) {
    out += std::to_string(traj.steps[r]);
    out += ",";
    if (std::isfinite(traj.eta[r])) out += fmt_double(traj.eta[r]);  // terminal row has no step
    out += ",";
    out += fmt_double(traj.F_S[r]);
    out += ",";
    out += fmt_double(traj.grad_norm_S[r]);
    if (with_population) {
      out += ",";
      out += fmt_double(traj.F_pop[r]);
      out += ",";
      out += fmt_double(traj.grad_norm_pop[r]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace risklab
