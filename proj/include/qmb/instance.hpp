#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmb/mnl.hpp"
#include "qmb/rng.hpp"

namespace qmb {

// Ground-truth world: dimensions, agent features, arm preference parameters,
// arrival rates, and the slack certificate used to build them.
struct Instance {
  int n_agents = 0;   // N
  int n_arms = 0;     // K
  int capacity = 0;   // L, per-arm assortment limit
  int dim = 0;        // feature dimension
  std::vector<Eigen::VectorXd> features;  // one per agent, norm <= 1
  std::vector<Eigen::VectorXd> theta;     // one per arm, norm <= 1
  std::vector<double> lambdas;            // Bernoulli arrival rates in [0,1]
  double epsilon = 0.0;                   // traffic slackness in (0,1)
  double kappa = 0.0;                     // lower bound on mu * mu_null
  // Partition of all agents across arms certifying that every arrival rate
  // leaves at least epsilon of service slack. Kept so the certificate stays
  // checkable after the fact.
  std::vector<std::vector<int>> witness;

  double true_utility(int agent, int arm) const {
    return features[agent].dot(theta[arm]);
  }
};

struct InstanceConfig {
  int n_agents = 0;
  int n_arms = 0;
  int capacity = 0;
  int dim = 0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  // Scale feature/parameter vectors to unit norm even when already inside
  // the unit ball (default only scales down vectors that exceed it).
  bool always_normalize = false;
};

inline void check_instance_config(const InstanceConfig& cfg) {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("instance config: " + what);
  };
  if (cfg.n_agents < 1) fail("n_agents must be >= 1");
  if (cfg.n_arms < 1) fail("n_arms must be >= 1");
  if (cfg.capacity < 1) fail("capacity must be >= 1");
  if (cfg.dim < 1) fail("dim must be >= 1");
  if (static_cast<long long>(cfg.n_agents) >
      static_cast<long long>(cfg.n_arms) * cfg.capacity) {
    fail("n_agents must be <= n_arms * capacity");
  }
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) fail("epsilon must lie in (0,1)");
}

// Worst-case lower bound on mu(n|S) * mu(null|S) over unit-norm features and
// parameters with |S| <= capacity: exp(-1) / (1 + capacity * e)^2. Loose but
// always valid; callers may override with instance-specific knowledge.
inline double compute_kappa_bound(int capacity) {
  if (capacity < 1) throw std::invalid_argument("compute_kappa_bound: capacity must be >= 1");
  const double e = std::exp(1.0);
  const double denom = 1.0 + capacity * e;
  return std::exp(-1.0) / (denom * denom);
}

// Deterministic synthetic instance: coordinates uniform on [0,1], vectors
// scaled into the unit ball, arrival rates backed off from a random feasible
// partition by the target slackness.
inline Instance generate_instance(const InstanceConfig& cfg) {
  check_instance_config(cfg);
  RngStream rng = RngStream::derive(cfg.seed, "instance");

  auto draw_vectors = [&](int count) {
    std::vector<Eigen::VectorXd> out(count);
    for (int i = 0; i < count; ++i) {
      Eigen::VectorXd v(cfg.dim);
      for (int j = 0; j < cfg.dim; ++j) v[j] = rng.uniform01();
      const double norm = v.norm();
      if (norm > 1.0 || (cfg.always_normalize && norm > 0.0)) v /= norm;
      out[i] = v;
    }
    return out;
  };

  Instance inst;
  inst.n_agents = cfg.n_agents;
  inst.n_arms = cfg.n_arms;
  inst.capacity = cfg.capacity;
  inst.dim = cfg.dim;
  inst.epsilon = cfg.epsilon;
  inst.features = draw_vectors(cfg.n_agents);
  inst.theta = draw_vectors(cfg.n_arms);

  // Random order, then round-robin over arms; loads stay within capacity
  // because n_agents <= n_arms * capacity.
  std::vector<int> order(cfg.n_agents);
  std::iota(order.begin(), order.end(), 0);
  for (int i = cfg.n_agents - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[i], order[j]);
  }
  inst.witness.assign(cfg.n_arms, {});
  for (int i = 0; i < cfg.n_agents; ++i) {
    inst.witness[i % cfg.n_arms].push_back(order[i]);
  }
  for (auto& group : inst.witness) std::sort(group.begin(), group.end());

  inst.lambdas.assign(cfg.n_agents, 0.0);
  std::vector<double> utilities(cfg.n_agents, 0.0);
  for (int k = 0; k < cfg.n_arms; ++k) {
    const auto& group = inst.witness[k];
    for (int agent : group) utilities[agent] = inst.true_utility(agent, k);
    for (int agent : group) {
      const double mu = choice_probability(agent, group, utilities);
      inst.lambdas[agent] = std::max(0.0, mu - cfg.epsilon);
    }
  }

  inst.kappa = compute_kappa_bound(cfg.capacity);
  return inst;
}

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Report-only check of every structural invariant, the witness slack
// certificate (tolerance 1e-12), and kappa against sampled choice products.
inline ValidationReport validate_instance(const Instance& inst) {
  ValidationReport report;
  auto flag = [&](const std::string& msg) { report.violations.push_back(msg); };
  constexpr double tol = 1e-12;

  if (inst.n_agents < 1 || inst.n_arms < 1 || inst.capacity < 1 || inst.dim < 1) {
    flag("dimensions must all be >= 1");
    return report;
  }
  if (static_cast<long long>(inst.n_agents) >
      static_cast<long long>(inst.n_arms) * inst.capacity) {
    flag("n_agents exceeds n_arms * capacity");
  }
  if (!(inst.epsilon > 0.0 && inst.epsilon < 1.0)) flag("epsilon outside (0,1)");

  for (int n = 0; n < inst.n_agents && n < static_cast<int>(inst.features.size()); ++n) {
    if (inst.features[n].norm() > 1.0 + tol) {
      flag("feature norm exceeds 1 for agent " + std::to_string(n));
    }
  }
  for (int k = 0; k < inst.n_arms && k < static_cast<int>(inst.theta.size()); ++k) {
    if (inst.theta[k].norm() > 1.0 + tol) {
      flag("theta norm exceeds 1 for arm " + std::to_string(k));
    }
  }
  if (static_cast<int>(inst.features.size()) != inst.n_agents) flag("feature count != n_agents");
  if (static_cast<int>(inst.theta.size()) != inst.n_arms) flag("theta count != n_arms");
  if (static_cast<int>(inst.lambdas.size()) != inst.n_agents) {
    flag("lambda count != n_agents");
    return report;
  }
  for (int n = 0; n < inst.n_agents; ++n) {
    if (inst.lambdas[n] < 0.0 || inst.lambdas[n] > 1.0) {
      flag("lambda outside [0,1] for agent " + std::to_string(n));
    }
  }

  // Witness must partition all agents with loads within capacity.
  std::vector<int> seen(inst.n_agents, 0);
  bool witness_shape_ok = static_cast<int>(inst.witness.size()) == inst.n_arms;
  if (!witness_shape_ok) flag("witness arm count != n_arms");
  if (witness_shape_ok) {
    for (int k = 0; k < inst.n_arms; ++k) {
      if (static_cast<int>(inst.witness[k].size()) > inst.capacity) {
        flag("witness load exceeds capacity at arm " + std::to_string(k));
      }
      for (int agent : inst.witness[k]) {
        if (agent < 0 || agent >= inst.n_agents) {
          flag("witness references unknown agent " + std::to_string(agent));
          witness_shape_ok = false;
        } else {
          ++seen[agent];
        }
      }
    }
    for (int n = 0; n < inst.n_agents; ++n) {
      if (seen[n] != 1) {
        flag("witness does not cover agent " + std::to_string(n) + " exactly once");
        witness_shape_ok = false;
      }
    }
  }

  if (witness_shape_ok) {
    std::vector<double> utilities(inst.n_agents, 0.0);
    for (int k = 0; k < inst.n_arms; ++k) {
      const auto& group = inst.witness[k];
      for (int agent : group) utilities[agent] = inst.true_utility(agent, k);
      for (int agent : group) {
        const double mu = choice_probability(agent, group, utilities);
        if (inst.lambdas[agent] + inst.epsilon > mu + tol) {
          flag("slackness violated at agent " + std::to_string(agent) + ": lambda + epsilon = " +
               std::to_string(inst.lambdas[agent] + inst.epsilon) + " > mu = " +
               std::to_string(mu));
        }
      }
    }
  }

  if (!(inst.kappa > 0.0 && inst.kappa <= 1.0)) {
    flag("kappa outside (0,1]");
  } else {
    // Sampled kappa audit against this instance's own parameters.
    RngStream rng = RngStream::derive(0, "validate-kappa");
    std::vector<double> utilities(inst.n_agents, 0.0);
    const int samples = 2000;
    for (int s = 0; s < samples; ++s) {
      const int k = static_cast<int>(rng.next_below(inst.n_arms));
      const int size =
          1 + static_cast<int>(rng.next_below(std::min(inst.capacity, inst.n_agents)));
      Assortment assortment;
      while (static_cast<int>(assortment.size()) < size) {
        const int agent = static_cast<int>(rng.next_below(inst.n_agents));
        if (!std::binary_search(assortment.begin(), assortment.end(), agent)) {
          assortment.insert(std::upper_bound(assortment.begin(), assortment.end(), agent),
                            agent);
        }
      }
      for (int agent : assortment) utilities[agent] = inst.true_utility(agent, k);
      const double p_null = null_probability(assortment, utilities);
      for (int agent : assortment) {
        const double product = choice_probability(agent, assortment, utilities) * p_null;
        if (inst.kappa > product + tol) {
          flag("kappa exceeds sampled choice product " + std::to_string(product));
          return report;
        }
      }
    }
  }

  return report;
}

}  // namespace qmb
