#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nctails/series.hpp"

namespace nctails {

/// Weight used by the Orlicz-Lorentz norm exp(t^p), r.
enum class WeightMode {
  /// (log(e/t))^(-(r/p) - 1) dt/t, finite for bounded f.
  Integrable,
  /// (log(1/t))^((r/p) - 1) dt/t, infinite for every bounded nonzero f.
  AsPrinted,
};

struct OrliczParams {
  double p = 2.0;
  std::optional<double> r;
  WeightMode weight_mode = WeightMode::Integrable;
};

/// inf { lambda : mean(exp(|x / lambda|^p)) <= 2 }, found by bisection on
/// log(lambda). Zero for all-zero samples.
double orlicz_exp_norm(std::span<const double> samples, double p, double rel_tol = 1e-12);
double orlicz_exp_norm(const SampleSet& set, double p, double rel_tol = 1e-12);

/// Decreasing rearrangement f*(t) of |f| on [0, 1].
using QuantileFunction = std::function<double(double)>;

struct OrliczLorentzResult {
  double value = 0.0;
  bool diverged = false;        ///< AsPrinted only: the partial integrals failed a Cauchy check
  double truncation_t = 0.0;    ///< integration domain is [truncation_t, 1]
  WeightMode mode = WeightMode::Integrable;
};

/// (integral_0^1 weight(t) f*(t)^r dt / t)^(1/r) by 2048-node composite
/// midpoint quadrature after a change of variables that makes the weighted
/// integrand bounded. `truncation_t` cuts the domain at [truncation_t, 1];
/// without it, f* is never evaluated below the smallest normal double.
OrliczLorentzResult orlicz_lorentz_norm(const QuantileFunction& f_star, const OrliczParams& params,
                                        double truncation_t = 0.0);

/// Sample version: f* is the empirical decreasing rearrangement of |x| and
/// the domain is truncated at 1 / trials.
OrliczLorentzResult orlicz_lorentz_norm(std::span<const double> samples, const OrliczParams& params);
OrliczLorentzResult orlicz_lorentz_norm(const SampleSet& set, const OrliczParams& params);

struct PNormEntry {
  double p = 1.0;
  double norm = 0.0;
  bool reliable = true;  ///< false when p > ln(trials) or trials < 100 p
};

std::vector<PNormEntry> pnorm_profile(const SampleSet& set, std::span<const double> p_grid);
std::vector<PNormEntry> pnorm_profile(std::span<const double> samples, std::span<const double> p_grid);

}  // namespace nctails
