#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qmb/mnl.hpp"

namespace qmb {

// Disjoint assignment of the active agents to arms, stored as (agent, arm)
// pairs sorted by agent. Agents outside the active set simply do not appear.
struct Assignment {
  std::vector<std::pair<int, int>> agent_arm;

  bool empty() const { return agent_arm.empty(); }
  std::size_t size() const { return agent_arm.size(); }

  int arm_of(int agent) const {
    auto it = std::lower_bound(agent_arm.begin(), agent_arm.end(), agent,
                               [](const auto& p, int a) { return p.first < a; });
    if (it == agent_arm.end() || it->first != agent) return -1;
    return it->second;
  }

  std::vector<Assortment> assortments(int n_arms) const {
    std::vector<Assortment> sets(n_arms);
    for (const auto& [agent, arm] : agent_arm) sets[arm].push_back(agent);
    return sets;  // each set inherits agent order, hence stays sorted
  }

  bool operator==(const Assignment&) const = default;
};

// Effective per-(agent, arm) utilities driving the round's objective.
// Column-major so each arm's utility column can be viewed without copying.
struct UtilityMatrix {
  int n_agents = 0;
  int n_arms = 0;
  std::vector<double> values;

  UtilityMatrix() = default;
  UtilityMatrix(int agents, int arms)
      : n_agents(agents), n_arms(arms), values(static_cast<std::size_t>(agents) * arms, 0.0) {}

  double& at(int agent, int arm) {
    return values[static_cast<std::size_t>(arm) * n_agents + agent];
  }
  double at(int agent, int arm) const {
    return values[static_cast<std::size_t>(arm) * n_agents + agent];
  }
  std::span<const double> arm_utilities(int arm) const {
    return {values.data() + static_cast<std::size_t>(arm) * n_agents,
            static_cast<std::size_t>(n_agents)};
  }
};

enum class SolveMethod { Exact, Greedy };

struct SolveResult {
  Assignment assignment;
  double value = 0.0;
  SolveMethod method = SolveMethod::Exact;
};

namespace detail {

inline std::vector<int> sorted_active(const std::vector<int>& active) {
  std::vector<int> sorted = active;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  return sorted;
}

inline void check_feasible(std::size_t n_active, int n_arms, int capacity) {
  if (n_active > static_cast<std::size_t>(n_arms) * capacity) {
    throw std::invalid_argument("assignment infeasible: more active agents than total capacity");
  }
}

}  // namespace detail

// Number of maps from n_active agents to arms with per-arm load <= capacity,
// saturated at 2^62 so callers can compare against a cap without overflow.
inline std::uint64_t feasible_assignment_count(int n_active, int n_arms, int capacity) {
  constexpr std::uint64_t limit = std::uint64_t{1} << 62;
  // ways[m] = number of feasible maps of m distinguishable agents onto the
  // arms processed so far; binomials pick which agents an arm takes.
  std::vector<std::uint64_t> ways(n_active + 1, 0);
  ways[0] = 1;
  std::vector<std::vector<std::uint64_t>> binom(n_active + 1,
                                                std::vector<std::uint64_t>(n_active + 1, 0));
  for (int i = 0; i <= n_active; ++i) {
    binom[i][0] = 1;
    for (int j = 1; j <= i; ++j) {
      binom[i][j] = std::min(limit, binom[i - 1][j - 1] + binom[i - 1][j]);
    }
  }
  for (int arm = 0; arm < n_arms; ++arm) {
    std::vector<std::uint64_t> next(n_active + 1, 0);
    for (int m = 0; m <= n_active; ++m) {
      if (ways[m] == 0) continue;
      for (int take = 0; take <= std::min(capacity, n_active - m); ++take) {
        const __uint128_t add =
            static_cast<__uint128_t>(ways[m]) * binom[n_active - m][take];
        const __uint128_t total = static_cast<__uint128_t>(next[m + take]) + add;
        next[m + take] = total > limit ? limit : static_cast<std::uint64_t>(total);
      }
    }
    ways = std::move(next);
  }
  return ways[n_active];
}

// Visits every feasible map active -> arms exactly once, in lexicographic
// order of the arm tuple taken over the agent-sorted active set. The visited
// Assignment is reused between calls; copy it to keep it.
template <class Visitor>
void enumerate_feasible(const std::vector<int>& active, int n_arms, int capacity,
                        Visitor&& visit) {
  const std::vector<int> agents = detail::sorted_active(active);
  detail::check_feasible(agents.size(), n_arms, capacity);

  Assignment current;
  current.agent_arm.reserve(agents.size());
  std::vector<int> loads(n_arms, 0);

  auto recurse = [&](auto&& self, std::size_t idx) -> void {
    if (idx == agents.size()) {
      visit(std::as_const(current));
      return;
    }
    for (int arm = 0; arm < n_arms; ++arm) {
      if (loads[arm] >= capacity) continue;
      ++loads[arm];
      current.agent_arm.emplace_back(agents[idx], arm);
      self(self, idx + 1);
      current.agent_arm.pop_back();
      --loads[arm];
    }
  };
  recurse(recurse, 0);
}

// Total objective of an assignment: per arm, the weighted assortment value
// of the agents it received.
inline double assignment_value(const Assignment& assignment, std::span<const double> weights,
                               const UtilityMatrix& utilities) {
  double total = 0.0;
  std::vector<Assortment> sets = assignment.assortments(utilities.n_arms);
  for (int arm = 0; arm < utilities.n_arms; ++arm) {
    total += assortment_value(sets[arm], weights, utilities.arm_utilities(arm));
  }
  return total;
}

// Exhaustive maximization over every feasible map. Ties resolve to the
// lexicographically smallest arm tuple because enumeration emits that order
// first and only strict improvements replace the incumbent.
inline SolveResult solve_exact(std::span<const double> weights, const UtilityMatrix& utilities,
                               const std::vector<int>& active, int n_arms, int capacity,
                               std::uint64_t cap = 1'000'000) {
  const std::vector<int> agents = detail::sorted_active(active);
  detail::check_feasible(agents.size(), n_arms, capacity);
  if (feasible_assignment_count(static_cast<int>(agents.size()), n_arms, capacity) > cap) {
    throw std::runtime_error(
        "solve_exact: enumeration exceeds the configured cap; use solve_greedy");
  }

  SolveResult best;
  best.method = SolveMethod::Exact;
  best.value = -std::numeric_limits<double>::infinity();
  std::vector<Assortment> scratch(n_arms);
  enumerate_feasible(agents, n_arms, capacity, [&](const Assignment& candidate) {
    for (auto& s : scratch) s.clear();
    for (const auto& [agent, arm] : candidate.agent_arm) scratch[arm].push_back(agent);
    double value = 0.0;
    for (int arm = 0; arm < n_arms; ++arm) {
      value += assortment_value(scratch[arm], weights, utilities.arm_utilities(arm));
    }
    if (value > best.value) {
      best.value = value;
      best.assignment = candidate;
    }
  });
  if (best.value == -std::numeric_limits<double>::infinity()) best.value = 0.0;
  return best;
}

// Greedy construction: repeatedly place the (agent, arm) pair with the best
// marginal gain in total objective, re-evaluating incumbents on the arm each
// time. Coverage is mandatory, so the least-bad pair is taken even when every
// remaining gain is negative. Ties break toward the smallest (agent, arm).
inline SolveResult solve_greedy(std::span<const double> weights, const UtilityMatrix& utilities,
                                const std::vector<int>& active, int n_arms, int capacity) {
  const std::vector<int> agents = detail::sorted_active(active);
  detail::check_feasible(agents.size(), n_arms, capacity);

  std::vector<Assortment> sets(n_arms);
  std::vector<double> set_values(n_arms, 0.0);
  std::vector<bool> placed(agents.size(), false);
  Assortment candidate;

  for (std::size_t round = 0; round < agents.size(); ++round) {
    double best_gain = -std::numeric_limits<double>::infinity();
    int best_agent_idx = -1;
    int best_arm = -1;
    double best_new_value = 0.0;
    for (std::size_t i = 0; i < agents.size(); ++i) {
      if (placed[i]) continue;
      for (int arm = 0; arm < n_arms; ++arm) {
        if (static_cast<int>(sets[arm].size()) >= capacity) continue;
        candidate = sets[arm];
        candidate.insert(std::upper_bound(candidate.begin(), candidate.end(), agents[i]),
                         agents[i]);
        const double new_value =
            assortment_value(candidate, weights, utilities.arm_utilities(arm));
        const double gain = new_value - set_values[arm];
        if (gain > best_gain) {
          best_gain = gain;
          best_agent_idx = static_cast<int>(i);
          best_arm = arm;
          best_new_value = new_value;
        }
      }
    }
    placed[best_agent_idx] = true;
    auto& target = sets[best_arm];
    target.insert(std::upper_bound(target.begin(), target.end(), agents[best_agent_idx]),
                  agents[best_agent_idx]);
    set_values[best_arm] = best_new_value;
  }

  SolveResult result;
  result.method = SolveMethod::Greedy;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    result.assignment.agent_arm.emplace_back(agents[i], -1);
  }
  for (int arm = 0; arm < n_arms; ++arm) {
    for (int agent : sets[arm]) {
      auto it = std::lower_bound(result.assignment.agent_arm.begin(),
                                 result.assignment.agent_arm.end(), agent,
                                 [](const auto& p, int a) { return p.first < a; });
      it->second = arm;
    }
  }
  // Fresh evaluation so the reported value matches re-evaluation exactly.
  result.value = assignment_value(result.assignment, weights, utilities);
  return result;
}

// Dispatch: exhaustive search while the enumeration stays within cap,
// greedy beyond it.
inline SolveResult solve(std::span<const double> weights, const UtilityMatrix& utilities,
                         const std::vector<int>& active, int n_arms, int capacity,
                         std::uint64_t cap = 1'000'000) {
  const std::vector<int> agents = detail::sorted_active(active);
  detail::check_feasible(agents.size(), n_arms, capacity);
  const std::uint64_t count =
      feasible_assignment_count(static_cast<int>(agents.size()), n_arms, capacity);
  if (count <= cap) {
    return solve_exact(weights, utilities, agents, n_arms, capacity, cap);
  }
  return solve_greedy(weights, utilities, agents, n_arms, capacity);
}

}  // namespace qmb
