#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qmb/instance.hpp"
#include "qmb/mnl.hpp"
#include "qmb/optimizer.hpp"
#include "qmb/policies.hpp"
#include "qmb/rng.hpp"

namespace qmb {

struct QueueState {
  std::vector<std::int64_t> lengths;
  std::int64_t t = 1;  // next round to execute, 1-based
};

struct StepRecord {
  std::vector<std::uint8_t> arrivals;
  std::vector<std::uint8_t> services;
  Assignment assignment;
  double regret_increment = 0.0;  // clamped at zero; ties cost nothing
};

struct RunMetrics {
  std::vector<double> total_queue;  // sum of queue lengths at the start of each round
  std::vector<double> cum_regret;
  std::vector<double> est_error;    // mean parameter error; NaN between samples
  std::int64_t q_max = 0;           // max single-queue length over agents and rounds
};

// Per-run random streams. Arrivals and service stay untouched by the policy
// choice, so runs with the same seed are paired across policies.
struct SimStreams {
  RngStream arrivals;
  RngStream service;
  RngStream policy;

  static SimStreams derive(std::uint64_t seed) {
    return {RngStream::derive(seed, "arrivals"), RngStream::derive(seed, "service"),
            RngStream::derive(seed, "policy")};
  }
};

struct RunOptions {
  PolicyParams policy;
  // When true, jobs arriving in a round can be scheduled in that same round;
  // by default they only become visible the round after.
  bool arrivals_before_schedule = false;
};

// Queue-weighted gap between the best achievable expected service and the
// chosen assignment's expected service, both measured on the true utilities.
inline double instantaneous_regret(const Instance& inst,
                                   const std::vector<std::int64_t>& queue_lengths,
                                   const Assignment& chosen) {
  std::vector<int> active;
  for (int n = 0; n < inst.n_agents; ++n) {
    if (queue_lengths[n] > 0) active.push_back(n);
  }
  if (active.empty()) return 0.0;

  const UtilityMatrix truth = oracle_utilities(inst);
  std::vector<double> weights(inst.n_agents, 0.0);
  for (int agent : active) weights[agent] = static_cast<double>(queue_lengths[agent]);

  const SolveResult best = solve_exact(weights, truth, active, inst.n_arms, inst.capacity);
  // Both sides go through the same evaluator so an identical assignment
  // yields exactly zero.
  const double best_value = assignment_value(best.assignment, weights, truth);
  const double chosen_value = assignment_value(chosen, weights, truth);
  return best_value - chosen_value;
}

// Advances the system one round: arrivals, scheduling, stochastic service,
// queue update, estimator feedback, and the round's regret.
inline StepRecord step(const Instance& inst, QueueState& queue, PolicyState& policy,
                       SimStreams& streams, bool arrivals_before_schedule = false) {
  const int n = inst.n_agents;
  StepRecord record;
  record.arrivals.assign(n, 0);
  record.services.assign(n, 0);

  for (int agent = 0; agent < n; ++agent) {
    record.arrivals[agent] = streams.arrivals.bernoulli(inst.lambdas[agent]) ? 1 : 0;
  }
  if (arrivals_before_schedule) {
    for (int agent = 0; agent < n; ++agent) queue.lengths[agent] += record.arrivals[agent];
  }

  const std::vector<std::int64_t> sched_queue = queue.lengths;
  record.assignment = schedule(policy, inst, sched_queue, queue.t, streams.policy);

  std::vector<Feedback> per_arm(inst.n_arms);
  const std::vector<Assortment> offered = record.assignment.assortments(inst.n_arms);
  std::vector<double> utilities(n, 0.0);
  for (int arm = 0; arm < inst.n_arms; ++arm) {
    per_arm[arm].assortment = offered[arm];
    if (offered[arm].empty()) continue;
    for (int agent : offered[arm]) utilities[agent] = inst.true_utility(agent, arm);
    const int accepted = sample_choice(offered[arm], utilities, streams.service);
    per_arm[arm].accepted = accepted;
    if (accepted != null_agent) record.services[accepted] = 1;
  }

  for (int agent = 0; agent < n; ++agent) {
    const std::int64_t arrived = arrivals_before_schedule ? 0 : record.arrivals[agent];
    queue.lengths[agent] =
        std::max<std::int64_t>(0, queue.lengths[agent] + arrived - record.services[agent]);
  }

  absorb_feedback(policy, per_arm, inst);

  const double gap = instantaneous_regret(inst, sched_queue, record.assignment);
  if (gap < -1e-9) {
    throw std::logic_error("step: chosen assignment beat the exact maximizer");
  }
  record.regret_increment = std::max(gap, 0.0);

  ++queue.t;
  return record;
}

// Full trajectory for one (instance, policy, horizon, seed) tuple. Output is
// a pure function of those four values.
inline RunMetrics run(const Instance& inst, PolicyKind kind, std::int64_t horizon,
                      std::uint64_t seed, const RunOptions& options = {}) {
  if (horizon < 1) throw std::invalid_argument("run: horizon must be >= 1");

  SimStreams streams = SimStreams::derive(seed);
  QueueState queue;
  queue.lengths.assign(inst.n_agents, 0);
  PolicyState policy = make_policy(kind, inst, options.policy);

  RunMetrics metrics;
  metrics.total_queue.resize(horizon);
  metrics.cum_regret.resize(horizon);
  metrics.est_error.assign(horizon, std::numeric_limits<double>::quiet_NaN());
  const std::int64_t est_stride = std::max<std::int64_t>(1, (horizon + 199) / 200);

  double cum = 0.0;
  for (std::int64_t t = 1; t <= horizon; ++t) {
    std::int64_t total = 0;
    for (std::int64_t q : queue.lengths) {
      total += q;
      metrics.q_max = std::max(metrics.q_max, q);
    }
    metrics.total_queue[t - 1] = static_cast<double>(total);

    const StepRecord record = step(inst, queue, policy, streams, options.arrivals_before_schedule);
    cum += record.regret_increment;
    metrics.cum_regret[t - 1] = cum;

    if (policy.learning() && ((t - 1) % est_stride == 0 || t == horizon)) {
      double err = 0.0;
      for (int k = 0; k < inst.n_arms; ++k) {
        err += (policy.estimators[k].theta_hat - inst.theta[k]).norm();
      }
      metrics.est_error[t - 1] = err / inst.n_arms;
    }
  }
  return metrics;
}

// Mean of the recorded total queue length over rounds (t0, t1].
inline double average_queue_length(const RunMetrics& metrics, std::int64_t t0, std::int64_t t1) {
  const auto horizon = static_cast<std::int64_t>(metrics.total_queue.size());
  if (!(0 <= t0 && t0 < t1 && t1 <= horizon)) {
    throw std::invalid_argument("average_queue_length: window must satisfy 0 <= t0 < t1 <= T");
  }
  double sum = 0.0;
  for (std::int64_t t = t0; t < t1; ++t) sum += metrics.total_queue[t];
  return sum / static_cast<double>(t1 - t0);
}

}  // namespace qmb
