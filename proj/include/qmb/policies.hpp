#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmb/estimator.hpp"
#include "qmb/instance.hpp"
#include "qmb/optimizer.hpp"
#include "qmb/rng.hpp"

namespace qmb {

enum class PolicyKind { Oracle, Ucb, Ts, Random };

inline std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Oracle: return "oracle";
    case PolicyKind::Ucb: return "ucb";
    case PolicyKind::Ts: return "ts";
    case PolicyKind::Random: return "random";
  }
  throw std::logic_error("unknown policy kind");
}

inline PolicyKind policy_from_string(const std::string& name) {
  if (name == "oracle") return PolicyKind::Oracle;
  if (name == "ucb") return PolicyKind::Ucb;
  if (name == "ts") return PolicyKind::Ts;
  if (name == "random") return PolicyKind::Random;
  throw std::invalid_argument("unknown policy name: " + name);
}

struct PolicyParams {
  double c1 = 1.0;                        // confidence-width scale
  double lambda_reg = 1.0;                // design-matrix regularizer
  int ts_samples_override = 0;            // 0 = use ts_sample_count
  std::uint64_t exact_cap = 1'000'000;    // enumeration budget before greedy
};

// Number of posterior perturbations per arm so the maximum has enough
// optimistic mass: ceil(1 - log(K*L) / log(1 - 1/(4*sqrt(e*pi)))).
inline int ts_sample_count(int n_arms, int capacity) {
  const long long kl = static_cast<long long>(n_arms) * capacity;
  if (kl < 1) throw std::invalid_argument("ts_sample_count: n_arms * capacity must be >= 1");
  const double p = 1.0 / (4.0 * std::sqrt(std::exp(1.0) * 3.14159265358979323846));
  const double m = std::ceil(1.0 - std::log(static_cast<double>(kl)) / std::log(1.0 - p));
  return std::max(1, static_cast<int>(m));
}

struct PolicyState {
  PolicyKind kind = PolicyKind::Oracle;
  std::vector<EstimatorState> estimators;  // one per arm; empty unless learning
  int ts_samples = 1;
  PolicyParams params;

  bool learning() const { return kind == PolicyKind::Ucb || kind == PolicyKind::Ts; }
};

inline PolicyState make_policy(PolicyKind kind, const Instance& inst,
                               const PolicyParams& params = {}) {
  PolicyState state;
  state.kind = kind;
  state.params = params;
  if (state.learning()) {
    state.estimators.reserve(inst.n_arms);
    for (int k = 0; k < inst.n_arms; ++k) {
      state.estimators.push_back(init_estimator(inst.dim, params.lambda_reg));
    }
  }
  if (kind == PolicyKind::Ts) {
    state.ts_samples = params.ts_samples_override > 0
                           ? params.ts_samples_override
                           : ts_sample_count(inst.n_arms, inst.capacity);
  }
  return state;
}

// Ground-truth utilities x_n . theta_k.
inline UtilityMatrix oracle_utilities(const Instance& inst) {
  UtilityMatrix h(inst.n_agents, inst.n_arms);
  for (int k = 0; k < inst.n_arms; ++k) {
    for (int n = 0; n < inst.n_agents; ++n) {
      h.at(n, k) = inst.true_utility(n, k);
    }
  }
  return h;
}

// Optimistic utilities: plug-in estimate plus the confidence-scaled
// exploration width under each arm's current design matrix.
inline UtilityMatrix ucb_utilities(const PolicyState& state, const Instance& inst,
                                   std::int64_t t) {
  if (state.estimators.empty()) {
    throw std::logic_error("ucb_utilities: policy has no estimators");
  }
  UtilityMatrix h(inst.n_agents, inst.n_arms);
  const double radius = confidence_radius(t, inst.dim, inst.kappa, state.params.lambda_reg,
                                          inst.capacity, inst.n_arms, state.params.c1);
  for (int k = 0; k < inst.n_arms; ++k) {
    const auto& est = state.estimators[k];
    Eigen::LLT<Eigen::MatrixXd> llt(est.v);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("ucb_utilities: design matrix lost positive definiteness");
    }
    for (int n = 0; n < inst.n_agents; ++n) {
      const Eigen::VectorXd& x = inst.features[n];
      const double width = std::sqrt(std::max(x.dot(llt.solve(x)), 0.0));
      h.at(n, k) = x.dot(est.theta_hat) + radius * width;
    }
  }
  return h;
}

// Perturbed utilities: per arm, draw ts_samples Gaussian parameter vectors
// centered at the estimate with covariance radius^2 * v^-1 and keep the most
// optimistic utility per agent. Consumes exactly ts_samples * dim Gaussian
// variates per arm, in arm order.
inline UtilityMatrix ts_utilities(const PolicyState& state, const Instance& inst,
                                  std::int64_t t, RngStream& rng) {
  if (state.estimators.empty()) {
    throw std::logic_error("ts_utilities: policy has no estimators");
  }
  if (state.ts_samples < 1) throw std::logic_error("ts_utilities: sample count must be >= 1");
  UtilityMatrix h(inst.n_agents, inst.n_arms);
  const double radius = confidence_radius(t, inst.dim, inst.kappa, state.params.lambda_reg,
                                          inst.capacity, inst.n_arms, state.params.c1);
  Eigen::VectorXd z(inst.dim);
  for (int k = 0; k < inst.n_arms; ++k) {
    const auto& est = state.estimators[k];
    Eigen::LLT<Eigen::MatrixXd> llt(est.v);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("ts_utilities: design matrix lost positive definiteness");
    }
    for (int n = 0; n < inst.n_agents; ++n) {
      h.at(n, k) = -std::numeric_limits<double>::infinity();
    }
    for (int i = 0; i < state.ts_samples; ++i) {
      for (int j = 0; j < inst.dim; ++j) z[j] = rng.gaussian();
      // v = U^T U, so U^-1 z has covariance v^-1.
      const Eigen::VectorXd sample =
          est.theta_hat + radius * llt.matrixU().solve(z);
      for (int n = 0; n < inst.n_agents; ++n) {
        h.at(n, k) = std::max(h.at(n, k), inst.features[n].dot(sample));
      }
    }
  }
  return h;
}

// One round's assignment for the policy's kind, driven by the nonempty-queue
// agents and queue-length weights. The TS index is sampled every round, even
// when no agent is active, so stream consumption depends only on the kind and
// the active-set size.
inline Assignment schedule(PolicyState& state, const Instance& inst,
                           const std::vector<std::int64_t>& queue_lengths, std::int64_t t,
                           RngStream& rng) {
  std::vector<int> active;
  for (int n = 0; n < inst.n_agents; ++n) {
    if (queue_lengths[n] > 0) active.push_back(n);
  }

  if (state.kind == PolicyKind::Random) {
    Assignment assignment;
    std::vector<int> loads(inst.n_arms, 0);
    for (int agent : active) {
      std::vector<int> open;
      for (int k = 0; k < inst.n_arms; ++k) {
        if (loads[k] < inst.capacity) open.push_back(k);
      }
      const int arm = open[rng.next_below(open.size())];
      ++loads[arm];
      assignment.agent_arm.emplace_back(agent, arm);
    }
    return assignment;
  }

  UtilityMatrix h;
  switch (state.kind) {
    case PolicyKind::Oracle: h = oracle_utilities(inst); break;
    case PolicyKind::Ucb: h = ucb_utilities(state, inst, t); break;
    case PolicyKind::Ts: h = ts_utilities(state, inst, t, rng); break;
    case PolicyKind::Random: break;  // handled above
  }
  if (active.empty()) return {};

  std::vector<double> weights(inst.n_agents, 0.0);
  for (int agent : active) weights[agent] = static_cast<double>(queue_lengths[agent]);
  return solve(weights, h, active, inst.n_arms, inst.capacity, state.params.exact_cap)
      .assignment;
}

// Feeds each arm's round feedback into its estimator. Arms that were offered
// nothing are skipped so the design matrix only absorbs real offers.
inline void absorb_feedback(PolicyState& state, const std::vector<Feedback>& per_arm,
                            const Instance& inst) {
  if (!state.learning()) return;
  for (int k = 0; k < inst.n_arms; ++k) {
    if (per_arm[k].assortment.empty()) continue;
    absorb_round(state.estimators[k], per_arm[k], inst.features, inst.kappa);
  }
}

}  // namespace qmb
