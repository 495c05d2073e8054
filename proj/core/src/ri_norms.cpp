#include "nctails/ri_norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <stdexcept>

namespace nctails {
namespace {

constexpr int kQuadratureNodes = 2048;
constexpr int kBracketExpansions = 6;
// exp(-kMaxLogDepth) is the deepest t reached when no truncation is given.
constexpr double kMaxLogDepth = 700.0;

double orlicz_mean(std::span<const double> x, double p, double lambda) {
  double s = 0.0;
  for (double v : x) s += std::exp(std::pow(std::abs(v) / lambda, p));
  return s / static_cast<double>(x.size());
}

void require_params(const OrliczParams& params) {
  if (!(params.p > 0.0) || std::isinf(params.p)) {
    throw std::invalid_argument("orlicz_lorentz_norm: p must be finite and > 0");
  }
  if (!params.r) throw std::invalid_argument("orlicz_lorentz_norm: r is required");
  if (!(*params.r > 0.0) || std::isinf(*params.r)) {
    throw std::invalid_argument("orlicz_lorentz_norm: r must be finite and > 0");
  }
}

double midpoint(const std::function<double(double)>& g, double a, double b) {
  const double h = (b - a) / kQuadratureNodes;
  double s = 0.0;
  for (int k = 0; k < kQuadratureNodes; ++k) s += g(a + (k + 0.5) * h);
  return s * h;
}

}  // namespace

double orlicz_exp_norm(std::span<const double> samples, double p, double rel_tol) {
  if (samples.empty()) throw std::invalid_argument("orlicz_exp_norm: empty sample");
  if (!(p > 0.0) || std::isinf(p)) throw std::invalid_argument("orlicz_exp_norm: p must be finite and > 0");
  require_finite(samples, "orlicz_exp_norm");
  double max_abs = 0.0;
  for (double v : samples) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs == 0.0) return 0.0;

  double lo = max_abs / 50.0;
  double hi = 50.0 * max_abs;
  for (int i = 0; orlicz_mean(samples, p, lo) <= 2.0; ++i) {
    if (i == kBracketExpansions) throw std::runtime_error("orlicz_exp_norm: lower bracket not found");
    lo /= 10.0;
  }
  for (int i = 0; orlicz_mean(samples, p, hi) > 2.0; ++i) {
    if (i == kBracketExpansions) throw std::runtime_error("orlicz_exp_norm: upper bracket not found");
    hi *= 10.0;
  }
  // mean(exp(|x/lambda|^p)) is decreasing in lambda: lo fails, hi satisfies.
  while (hi / lo - 1.0 > rel_tol) {
    const double mid = std::sqrt(lo * hi);
    if (orlicz_mean(samples, p, mid) > 2.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

double orlicz_exp_norm(const SampleSet& set, double p, double rel_tol) {
  return orlicz_exp_norm(set.samples, p, rel_tol);
}

OrliczLorentzResult orlicz_lorentz_norm(const QuantileFunction& f_star, const OrliczParams& params,
                                        double truncation_t) {
  require_params(params);
  if (!(truncation_t >= 0.0 && truncation_t < 1.0)) {
    throw std::invalid_argument("orlicz_lorentz_norm: truncation must lie in [0, 1)");
  }
  const double p = params.p;
  const double r = *params.r;
  OrliczLorentzResult out;
  out.mode = params.weight_mode;
  out.truncation_t = truncation_t;
  const double depth = truncation_t > 0.0 ? -std::log(truncation_t) : kMaxLogDepth;

  if (params.weight_mode == WeightMode::Integrable) {
    // w = log(e/t), then u = w^(-r/p):  weight dt/t = (p/r) du on u in (0, 1].
    const double u_min = std::pow(1.0 + depth, -r / p);
    const auto g = [&](double u) {
      // Deep nodes underflow t; clamping only touches the first few nodes.
      const double t = std::max(std::exp(1.0 - std::pow(u, -p / r)), std::numeric_limits<double>::min());
      return std::pow(f_star(t), r);
    };
    const double integral = (p / r) * midpoint(g, truncation_t > 0.0 ? u_min : 0.0, 1.0);
    out.value = std::pow(integral, 1.0 / r);
    return out;
  }

  // v = log(1/t), then y = v^(r/p):  weight dt/t = (p/r) dy on y in [0, depth^(r/p)].
  const auto partial = [&](double v_max) {
    const auto g = [&](double y) { return std::pow(f_star(std::exp(-std::pow(y, p / r))), r); };
    return (p / r) * midpoint(g, 0.0, std::pow(v_max, r / p));
  };
  const double full = partial(depth);
  const double half = partial(0.5 * depth);
  out.value = std::pow(full, 1.0 / r);
  out.diverged = full > 0.0 && (full - half) > 1e-6 * full;
  return out;
}

OrliczLorentzResult orlicz_lorentz_norm(std::span<const double> samples, const OrliczParams& params) {
  if (samples.empty()) throw std::invalid_argument("orlicz_lorentz_norm: empty sample");
  const RealSequence desc = decreasing_rearrangement(samples);
  const double n = static_cast<double>(desc.size());
  const QuantileFunction f_star = [&](double t) {
    const auto idx = static_cast<std::size_t>(std::clamp(std::floor(t * n), 0.0, n - 1.0));
    return desc[idx];
  };
  return orlicz_lorentz_norm(f_star, params, 1.0 / n);
}

OrliczLorentzResult orlicz_lorentz_norm(const SampleSet& set, const OrliczParams& params) {
  return orlicz_lorentz_norm(std::span<const double>(set.samples), params);
}

std::vector<PNormEntry> pnorm_profile(std::span<const double> samples, std::span<const double> p_grid) {
  if (samples.empty()) throw std::invalid_argument("pnorm_profile: empty sample");
  double scale = 0.0;
  for (double v : samples) scale = std::max(scale, std::abs(v));
  const double n = static_cast<double>(samples.size());
  std::vector<PNormEntry> out;
  out.reserve(p_grid.size());
  for (double p : p_grid) {
    if (!(p >= 1.0) || std::isinf(p)) throw std::invalid_argument("pnorm_profile: p must be finite and >= 1");
    double norm = 0.0;
    if (scale > 0.0) {
      double s = 0.0;
      for (double v : samples) s += std::pow(std::abs(v) / scale, p);
      norm = scale * std::pow(s / n, 1.0 / p);
    }
    out.push_back({p, norm, p <= std::log(n) && n >= 100.0 * p});
  }
  return out;
}

std::vector<PNormEntry> pnorm_profile(const SampleSet& set, std::span<const double> p_grid) {
  return pnorm_profile(std::span<const double>(set.samples), p_grid);
}

}  // namespace nctails
