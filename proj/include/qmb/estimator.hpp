#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmb/mnl.hpp"

namespace qmb {

// Per-arm online Newton state. v accumulates the regularized, kappa-scaled
// design matrix; theta_hat stays inside the unit ball by construction.
struct EstimatorState {
  Eigen::VectorXd theta_hat;
  Eigen::MatrixXd v;
  std::int64_t updates = 0;
};

// One round of preference feedback for a single arm: the offered assortment
// and which agent (if any) the arm accepted.
struct Feedback {
  Assortment assortment;
  int accepted = null_agent;

  double outcome(int agent) const { return agent == accepted ? 1.0 : 0.0; }
};

inline EstimatorState init_estimator(int dim, double lambda_reg) {
  if (dim < 1) throw std::invalid_argument("init_estimator: dim must be >= 1");
  if (!(lambda_reg > 0.0)) throw std::invalid_argument("init_estimator: lambda_reg must be > 0");
  EstimatorState state;
  state.theta_hat = Eigen::VectorXd::Zero(dim);
  state.v = lambda_reg * Eigen::MatrixXd::Identity(dim, dim);
  return state;
}

// Gradient of the round's negative log-likelihood at theta:
// sum over offered agents of (choice probability - observed outcome) * x.
inline Eigen::VectorXd gradient(const Eigen::VectorXd& theta, const Feedback& feedback,
                                const std::vector<Eigen::VectorXd>& features) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
  if (feedback.assortment.empty()) return g;
  std::vector<double> utilities(features.size(), 0.0);
  for (int agent : feedback.assortment) utilities[agent] = features[agent].dot(theta);
  for (int agent : feedback.assortment) {
    const double mu = choice_probability(agent, feedback.assortment, utilities);
    g += (mu - feedback.outcome(agent)) * features[agent];
  }
  return g;
}

namespace detail {

inline Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& v, const char* who) {
  Eigen::LLT<Eigen::MatrixXd> llt(v);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(std::string(who) + ": matrix is not symmetric positive definite");
  }
  return llt;
}

}  // namespace detail

// Projection of `target` onto the Euclidean unit ball under the metric
// induced by SPD matrix v. Inside the ball the target is returned untouched;
// otherwise the dual multiplier eta solving |(v + eta I)^-1 v target| = 1 is
// bracketed and bisected to 1e-10.
inline Eigen::VectorXd project_ball_vnorm(const Eigen::VectorXd& target,
                                          const Eigen::MatrixXd& v) {
  detail::checked_llt(v, "project_ball_vnorm");
  if (target.norm() <= 1.0) return target;

  const Eigen::MatrixXd identity =
      Eigen::MatrixXd::Identity(v.rows(), v.cols());
  const Eigen::VectorXd vt = v * target;
  auto point_at = [&](double eta) -> Eigen::VectorXd {
    return (v + eta * identity).llt().solve(vt);
  };

  double lo = 0.0;     // norm > 1 here (the target itself)
  double hi = 1.0;
  while (point_at(hi).norm() >= 1.0) {
    hi *= 2.0;
    if (hi > 1e18) throw std::runtime_error("project_ball_vnorm: failed to bracket multiplier");
  }

  constexpr double norm_tol = 1e-10;
  double residual = std::abs(target.norm() - 1.0);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const Eigen::VectorXd candidate = point_at(mid);
    const double norm = candidate.norm();
    residual = std::abs(norm - 1.0);
    if (residual <= norm_tol) return candidate;
    if (norm > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw std::runtime_error("project_ball_vnorm: bisection did not converge, residual = " +
                           std::to_string(residual));
}

// Absorbs one round of feedback: grow the design matrix first, then take the
// constrained Newton step under the grown metric.
inline void absorb_round(EstimatorState& state, const Feedback& feedback,
                         const std::vector<Eigen::VectorXd>& features, double kappa) {
  for (int agent : feedback.assortment) {
    state.v.noalias() += (kappa / 2.0) * features[agent] * features[agent].transpose();
  }
  const Eigen::VectorXd g = gradient(state.theta_hat, feedback, features);
  const Eigen::VectorXd unconstrained = state.theta_hat - state.v.llt().solve(g);
  state.theta_hat = project_ball_vnorm(unconstrained, state.v);
  ++state.updates;
}

// Confidence radius c1 * sqrt(lambda + (d/kappa) * log(1 + t*L*K/(d*lambda))).
inline double confidence_radius(std::int64_t t, int dim, double kappa, double lambda_reg,
                                int capacity, int n_arms, double c1) {
  const double ratio = (static_cast<double>(t) * capacity * n_arms) / (dim * lambda_reg);
  return c1 * std::sqrt(lambda_reg + (dim / kappa) * std::log1p(ratio));
}

// Exploration width sqrt(x^T v^-1 x), via a solve rather than an inverse.
inline double bonus(const Eigen::VectorXd& x, const Eigen::MatrixXd& v) {
  auto llt = detail::checked_llt(v, "bonus");
  const double q = x.dot(llt.solve(x));
  return std::sqrt(std::max(q, 0.0));
}

}  // namespace qmb
