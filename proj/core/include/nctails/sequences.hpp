#pragma once

#include <limits>
#include <span>
#include <vector>

namespace nctails {

using RealSequence = std::vector<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Throws std::invalid_argument if any entry is NaN or infinite.
void require_finite(std::span<const double> values, const char* what);

/// |values| sorted non-increasingly.
RealSequence decreasing_rearrangement(std::span<const double> values);

/// (sum |a_n|^p)^(1/p), or max |a_n| for p = infinity. Zero for empty input.
double lp_norm(std::span<const double> values, double p);

/// Lorentz sequence norm of the decreasing rearrangement a*:
///   r = inf:  sup_n n^(1/q) a*_n
///   r < inf:  (sum_n n^(r/q - 1) (a*_n)^r)^(1/r)
double lorentz_norm(std::span<const double> values, double q, double r);

/// K-functional of the couple (l1, l2):
///   K(a, t) = inf { ||a'||_1 + t ||a''||_2 : a' + a'' = a }.
///
/// The optimal split clips every coordinate at a common level mu, i.e.
/// a''_n = sign(a_n) min(|a_n|, mu), where mu solves
/// ||min(|a|, mu)||_2 = t mu. The level is found in closed form on the
/// interval between consecutive sorted magnitudes; bisection is kept as a
/// fallback for rounding corner cases.
double k12_exact(std::span<const double> values, double t);

/// Clipping level mu of the optimal split. mu >= max|a_n| puts the whole
/// sequence in the l2 part, mu = 0 puts it all in the l1 part; t = 0 gives
/// +inf.
double k12_split_level(std::span<const double> values, double t);

/// Holmstedt's closed form: sum of the floor(t^2) largest |a_n| plus t times
/// the l2 norm of the rest.
double k12_holmstedt(std::span<const double> values, double t);

struct KProfile {
  std::vector<double> t_grid;
  std::vector<double> k_exact;
  std::vector<double> k_holmstedt;
};

KProfile k_profile(std::span<const double> values, std::span<const double> t_grid);

}  // namespace nctails
