#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "qmb/rng.hpp"

namespace qmb {

// Agents offered to one arm in a round. Sorted ascending, no duplicates.
using Assortment = std::vector<int>;

// Token for "the arm served nobody this round".
inline constexpr int null_agent = -1;

namespace detail {

// Shift so that every exponential in the choice denominator is <= 1.
// Never negative, so the implicit exp(0) of the outside option stays bounded.
inline double utility_shift(const Assortment& s, std::span<const double> utilities) {
  double m = 0.0;
  for (int agent : s) m = std::max(m, utilities[agent]);
  return m;
}

inline double choice_denominator(const Assortment& s, std::span<const double> utilities,
                                 double shift) {
  double denom = std::exp(-shift);
  for (int agent : s) denom += std::exp(utilities[agent] - shift);
  return denom;
}

}  // namespace detail

// Probability that the arm picks `agent` out of assortment `s` under a
// multinomial-logit choice with the given per-agent utilities.
inline double choice_probability(int agent, const Assortment& s,
                                 std::span<const double> utilities) {
  if (!std::binary_search(s.begin(), s.end(), agent)) {
    throw std::invalid_argument("choice_probability: agent not in assortment");
  }
  const double shift = detail::utility_shift(s, utilities);
  const double denom = detail::choice_denominator(s, utilities, shift);
  return std::exp(utilities[agent] - shift) / denom;
}

// Probability that the arm serves nobody; 1 for an empty assortment.
inline double null_probability(const Assortment& s, std::span<const double> utilities) {
  const double shift = detail::utility_shift(s, utilities);
  const double denom = detail::choice_denominator(s, utilities, shift);
  return std::exp(-shift) / denom;
}

// Draws the accepted agent (or null_agent). Consumes exactly one uniform
// variate regardless of the assortment, so stream layouts stay auditable.
inline int sample_choice(const Assortment& s, std::span<const double> utilities,
                         RngStream& rng) {
  const double r = rng.uniform01();
  if (s.empty()) return null_agent;
  const double shift = detail::utility_shift(s, utilities);
  const double denom = detail::choice_denominator(s, utilities, shift);
  double acc = 0.0;
  for (int agent : s) {
    acc += std::exp(utilities[agent] - shift) / denom;
    if (r < acc) return agent;
  }
  return null_agent;
}

// Weighted assortment objective: sum of w_n * P(arm picks n | s).
inline double assortment_value(const Assortment& s, std::span<const double> weights,
                               std::span<const double> utilities) {
  if (s.empty()) return 0.0;
  const double shift = detail::utility_shift(s, utilities);
  const double denom = detail::choice_denominator(s, utilities, shift);
  double value = 0.0;
  for (int agent : s) {
    value += weights[agent] * (std::exp(utilities[agent] - shift) / denom);
  }
  return value;
}

}  // namespace qmb
