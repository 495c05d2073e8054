#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "nctails/matrix.hpp"

// Test-side randomness comes from the standard library so that oracles do
// not share a generator with the code under test.
namespace testing_support {

inline std::vector<double> abs_normal_sequence(std::mt19937_64& gen, std::size_t n) {
  std::normal_distribution<double> g;
  std::vector<double> out(n);
  for (double& v : out) v = std::abs(g(gen));
  return out;
}

inline nctails::Matrix normal_matrix(std::mt19937_64& gen, std::size_t d) {
  std::normal_distribution<double> g;
  nctails::Matrix m(d);
  for (double& v : m.data()) v = g(gen);
  return m;
}

// Orthogonal matrix by Gram-Schmidt on a Gaussian matrix; used where only
// orthogonality (not the Haar law) matters.
inline nctails::Matrix gram_schmidt_orthogonal(std::mt19937_64& gen, std::size_t d) {
  nctails::Matrix m = normal_matrix(gen, d);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) dot += m(i, j) * m(i, k);
      for (std::size_t i = 0; i < d; ++i) m(i, j) -= dot * m(i, k);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < d; ++i) norm += m(i, j) * m(i, j);
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < d; ++i) m(i, j) /= norm;
  }
  return m;
}

// min over per-coordinate fractions x_i in [0,1] of
// sum |x_i a_i| + t * sqrt(sum ((1 - x_i) a_i)^2). The objective is convex,
// so a coarse grid followed by a fine grid around the coarse optimum finds
// the global minimum to within the fine step.
inline double brute_force_k(const std::vector<double>& a, double t) {
  const std::size_t n = a.size();
  auto objective = [&](const std::array<double, 4>& x) {
    double l1 = 0.0;
    double l2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      l1 += std::abs(x[i] * a[i]);
      const double r = (1.0 - x[i]) * a[i];
      l2 += r * r;
    }
    return l1 + t * std::sqrt(l2);
  };
  auto search = [&](std::array<double, 4> lo, std::array<double, 4> hi, double step,
                    std::array<double, 4>& best_x) {
    double best = INFINITY;
    std::array<int, 4> counts{};
    for (std::size_t i = 0; i < 4; ++i) {
      counts[i] = i < n ? static_cast<int>(std::round((hi[i] - lo[i]) / step)) + 1 : 1;
    }
    std::array<int, 4> k{};
    for (k[0] = 0; k[0] < counts[0]; ++k[0])
      for (k[1] = 0; k[1] < counts[1]; ++k[1])
        for (k[2] = 0; k[2] < counts[2]; ++k[2])
          for (k[3] = 0; k[3] < counts[3]; ++k[3]) {
            std::array<double, 4> x{};
            for (std::size_t i = 0; i < n; ++i) x[i] = std::min(1.0, lo[i] + k[i] * step);
            const double v = objective(x);
            if (v < best) {
              best = v;
              best_x = x;
            }
          }
    return best;
  };
  std::array<double, 4> x{};
  search({0, 0, 0, 0}, {1, 1, 1, 1}, 0.02, x);
  std::array<double, 4> lo{};
  std::array<double, 4> hi{};
  for (std::size_t i = 0; i < 4; ++i) {
    lo[i] = std::max(0.0, x[i] - 0.02);
    hi[i] = std::min(1.0, x[i] + 0.02);
  }
  return search(lo, hi, 1e-3, x);
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace testing_support
