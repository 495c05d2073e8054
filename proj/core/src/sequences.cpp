#include "nctails/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace nctails {
namespace {

void require_nonnegative_t(double t) {
  if (!(t >= 0.0) || std::isinf(t)) {
    throw std::invalid_argument("K-functional parameter t must be finite and >= 0, got " +
                                std::to_string(t));
  }
}

// Value of ||a'||_1 + t ||a''||_2 for the split clipped at mu.
double split_cost(std::span<const double> sorted_abs, double t, double mu) {
  double head = 0.0;
  double tail_sq = 0.0;
  for (double b : sorted_abs) {
    if (b > mu) {
      head += b - mu;
      tail_sq += mu * mu;
    } else {
      tail_sq += b * b;
    }
  }
  return head + t * std::sqrt(tail_sq);
}

// ||min(|a|, mu)||_2 / mu, non-increasing in mu.
double clipped_ratio(std::span<const double> sorted_abs, double mu) {
  double sq = 0.0;
  for (double b : sorted_abs) {
    double c = std::min(b, mu);
    sq += c * c;
  }
  return std::sqrt(sq) / mu;
}

double bisect_level(std::span<const double> sorted_abs, std::size_t nonzero, double t) {
  double lo = 0.5 * sorted_abs[nonzero - 1];
  double hi = std::max(sorted_abs[0], std::sqrt(std::transform_reduce(
                                          sorted_abs.begin(), sorted_abs.end(), 0.0,
                                          std::plus<>{}, [](double b) { return b * b; })) /
                                          t);
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-12 * hi; ++iter) {
    double mid = 0.5 * (lo + hi);
    if (clipped_ratio(sorted_abs, mid) > t) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + ": entries must be finite");
    }
  }
}

RealSequence decreasing_rearrangement(std::span<const double> values) {
  require_finite(values, "decreasing_rearrangement");
  RealSequence out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [](double v) { return std::abs(v); });
  std::sort(out.begin(), out.end(), std::greater<>{});
  return out;
}

double lp_norm(std::span<const double> values, double p) {
  if (!(p > 0.0)) {
    throw std::invalid_argument("lp_norm: p must be > 0");
  }
  require_finite(values, "lp_norm");
  if (values.empty()) return 0.0;
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  if (p == 1.0) {
    double s = 0.0;
    for (double v : values) s += std::abs(v);
    return s;
  }
  if (p == 2.0) {
    // Scale by the maximum so large entries do not overflow the squares.
    double m = lp_norm(values, kInfinity);
    if (m == 0.0) return 0.0;
    double s = 0.0;
    for (double v : values) s += (v / m) * (v / m);
    return m * std::sqrt(s);
  }
  double m = lp_norm(values, kInfinity);
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double v : values) s += std::pow(std::abs(v) / m, p);
  return m * std::pow(s, 1.0 / p);
}

double lorentz_norm(std::span<const double> values, double q, double r) {
  if (!(q > 0.0) || std::isinf(q)) {
    throw std::invalid_argument("lorentz_norm: q must be finite and > 0");
  }
  if (!(r > 0.0)) {
    throw std::invalid_argument("lorentz_norm: r must be > 0");
  }
  const RealSequence a = decreasing_rearrangement(values);
  if (a.empty()) return 0.0;
  if (std::isinf(r)) {
    double sup = 0.0;
    for (std::size_t n = 1; n <= a.size(); ++n) {
      sup = std::max(sup, std::pow(static_cast<double>(n), 1.0 / q) * a[n - 1]);
    }
    return sup;
  }
  const double m = a.front();
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t n = 1; n <= a.size(); ++n) {
    s += std::pow(static_cast<double>(n), r / q - 1.0) * std::pow(a[n - 1] / m, r);
  }
  return m * std::pow(s, 1.0 / r);
}

double k12_split_level(std::span<const double> values, double t) {
  require_nonnegative_t(t);
  const RealSequence b = decreasing_rearrangement(values);
  const auto nonzero =
      static_cast<std::size_t>(std::count_if(b.begin(), b.end(), [](double v) { return v > 0.0; }));
  if (nonzero == 0) return 0.0;
  if (t == 0.0) return kInfinity;
  const double t2 = t * t;
  // The ratio ||min(|a|, mu)||_2 / mu never exceeds sqrt(#nonzero).
  if (t2 >= static_cast<double>(nonzero)) return 0.0;

  // tail_sq[k] = sum_{i >= k} b_i^2
  std::vector<double> tail_sq(nonzero + 1, 0.0);
  for (std::size_t i = nonzero; i-- > 0;) tail_sq[i] = tail_sq[i + 1] + b[i] * b[i];

  // k entries strictly above mu: k mu^2 + tail_sq[k] = t^2 mu^2.
  for (std::size_t k = 0; k < nonzero && static_cast<double>(k) < t2; ++k) {
    const double mu = std::sqrt(tail_sq[k] / (t2 - static_cast<double>(k)));
    const double upper = (k == 0) ? kInfinity : b[k - 1];
    const double slack = 1e-14 * b[0];
    if (mu >= b[k] - slack && mu <= upper + slack) return mu;
  }
  return bisect_level(std::span<const double>(b.data(), nonzero), nonzero, t);
}

double k12_exact(std::span<const double> values, double t) {
  require_nonnegative_t(t);
  if (t == 0.0) return 0.0;
  const RealSequence b = decreasing_rearrangement(values);
  if (b.empty()) return 0.0;
  const double mu = k12_split_level(values, t);
  if (mu == 0.0) return lp_norm(b, 1.0);
  return split_cost(b, t, mu);
}

double k12_holmstedt(std::span<const double> values, double t) {
  require_nonnegative_t(t);
  const RealSequence b = decreasing_rearrangement(values);
  const auto head = static_cast<std::size_t>(
      std::min(std::floor(t * t), static_cast<double>(b.size())));
  const double head_sum = std::accumulate(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(head), 0.0);
  const double tail =
      lp_norm(std::span<const double>(b.data() + head, b.size() - head), 2.0);
  return head_sum + t * tail;
}

KProfile k_profile(std::span<const double> values, std::span<const double> t_grid) {
  KProfile out;
  out.t_grid.assign(t_grid.begin(), t_grid.end());
  out.k_exact.reserve(t_grid.size());
  out.k_holmstedt.reserve(t_grid.size());
  for (double t : t_grid) {
    out.k_exact.push_back(k12_exact(values, t));
    out.k_holmstedt.push_back(k12_holmstedt(values, t));
  }
  return out;
}

}  // namespace nctails
