#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string_view>
#include <vector>

#include "nctails/matrix.hpp"
#include "nctails/sequences.hpp"

namespace nctails {

/// 64-bit finaliser of SplitMix64.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream addressed by (master seed, path).
///
/// The key is a mixing hash of the seed and every path element; the n-th
/// output is mix64(key + n * golden). Two substreams with the same seed and
/// path produce the same values on every run and in any thread, and no state
/// is shared between substreams.
class RngSubstream {
 public:
  RngSubstream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path);
  RngSubstream(std::uint64_t master_seed, std::vector<std::uint64_t> path);

  /// Substream with `index` appended to the path; the counter starts at 0.
  RngSubstream child(std::uint64_t index) const;

  std::uint64_t master_seed() const noexcept { return seed_; }
  const std::vector<std::uint64_t>& path() const noexcept { return path_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double next_uniform() noexcept;
  /// Uniform on (-1, 1).
  double next_symmetric_uniform() noexcept;
  /// Standard normal via the Marsaglia polar method; the second value of
  /// each accepted pair is cached.
  double next_gaussian() noexcept;
  /// +1 or -1 with probability 1/2 each.
  double next_sign() noexcept;

 private:
  std::uint64_t seed_;
  std::vector<std::uint64_t> path_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_gaussian_;
};

/// Parses a decimal or 0x-prefixed hexadecimal 64-bit seed.
std::uint64_t parse_seed(std::string_view text);

/// d x d matrix with i.i.d. N(0, 1/d) entries.
Matrix gaussian_matrix(std::size_t d, RngSubstream& stream);

/// Haar-distributed element of O(d): Householder QR of a standard Gaussian
/// matrix with each column of Q multiplied by the sign of the matching
/// diagonal entry of R.
Matrix haar_orthogonal(std::size_t d, RngSubstream& stream);

RealSequence rademacher_signs(std::size_t n, RngSubstream& stream);

enum class TruncationMode {
  Whole,        ///< zero G when ||G||_inf > lambda
  DiagOffdiag,  ///< zero G when ||G^d||_inf > lambda or ||G^ad||_inf > lambda
};

struct TruncationPolicy {
  double lambda = 4.0;
  TruncationMode mode = TruncationMode::Whole;
};

/// True when the policy would zero `g`.
bool truncation_fires(const Matrix& g, const TruncationPolicy& policy);

Matrix apply_truncation(const Matrix& g, const TruncationPolicy& policy);

}  // namespace nctails
