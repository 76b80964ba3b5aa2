// Shared helpers for the unit and acceptance suites.
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "qmb/rng.hpp"

namespace test_support {

// Upper critical value of the chi-square distribution at significance 0.001.
// Exact table values for small degrees of freedom, Wilson-Hilferty beyond.
inline double chi_square_critical_001(int df) {
  static const double table[] = {10.8276, 13.8155, 16.2662, 18.4668,
                                 20.5150, 22.4577, 24.3219, 26.1245};
  if (df >= 1 && df <= 8) return table[df - 1];
  const double z = 3.0902;  // standard normal quantile at 0.999
  const double a = 2.0 / (9.0 * df);
  const double c = 1.0 - a + z * std::sqrt(a);
  return df * c * c * c;
}

// Pearson statistic for observed counts against expected probabilities.
inline double chi_square_statistic(const std::vector<std::int64_t>& counts,
                                   const std::vector<double>& probabilities) {
  if (counts.size() != probabilities.size()) {
    throw std::invalid_argument("chi_square_statistic: size mismatch");
  }
  const double total =
      static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::int64_t{0}));
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = total * probabilities[i];
    const double diff = static_cast<double>(counts[i]) - expected;
    stat += diff * diff / expected;
  }
  return stat;
}

// |observed/n - p| within three binomial standard deviations.
inline bool within_3sigma_binomial(std::int64_t observed, std::int64_t n, double p) {
  const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return std::abs(static_cast<double>(observed) / static_cast<double>(n) - p) <= 3.0 * sigma;
}

inline double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

inline double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Uniform draw from the unit ball via a Gaussian direction and radius
// correction; used when sampling admissible feature/parameter vectors.
inline std::vector<double> random_unit_ball(qmb::RngStream& rng, int dim) {
  std::vector<double> v(dim);
  double norm2 = 0.0;
  for (int i = 0; i < dim; ++i) {
    v[i] = rng.gaussian();
    norm2 += v[i] * v[i];
  }
  const double norm = std::sqrt(norm2);
  const double radius = std::pow(rng.uniform01(), 1.0 / dim);
  for (int i = 0; i < dim; ++i) v[i] = norm > 0.0 ? v[i] / norm * radius : 0.0;
  return v;
}

}  // namespace test_support
