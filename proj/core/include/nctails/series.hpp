#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nctails/matrix.hpp"
#include "nctails/sampling.hpp"
#include "nctails/sequences.hpp"

namespace nctails {

enum class SeriesTag : std::uint64_t {
  Epsilon = 1,      ///< sum d_n tr(eps_n A_n), eps_n Haar on O(d_n)
  Gauss = 2,        ///< sum d_n tr(G_n A_n)
  GaussTrunc = 3,   ///< G_n zeroed when ||G_n||_inf > lambda
  GaussStar = 4,    ///< G_n zeroed when its diagonal or off-diagonal part exceeds lambda
  Commutative = 5,  ///< sum_m s_m r_m over the s-sequence
};

class SeriesKind {
 public:
  static SeriesKind epsilon() { return SeriesKind(SeriesTag::Epsilon, std::nullopt); }
  static SeriesKind gauss() { return SeriesKind(SeriesTag::Gauss, std::nullopt); }
  static SeriesKind gauss_trunc(double lambda) {
    return SeriesKind(SeriesTag::GaussTrunc, TruncationPolicy{lambda, TruncationMode::Whole});
  }
  static SeriesKind gauss_star(double lambda) {
    return SeriesKind(SeriesTag::GaussStar, TruncationPolicy{lambda, TruncationMode::DiagOffdiag});
  }
  static SeriesKind commutative() { return SeriesKind(SeriesTag::Commutative, std::nullopt); }

  /// Accepts epsilon, gauss, gauss_trunc, gauss_star, commutative.
  static SeriesKind parse(std::string_view name, double lambda);

  SeriesTag tag() const noexcept { return tag_; }
  const std::optional<TruncationPolicy>& truncation() const noexcept { return truncation_; }
  std::string name() const;

  friend bool operator==(const SeriesKind& a, const SeriesKind& b) {
    return a.tag_ == b.tag_ && a.truncation_.has_value() == b.truncation_.has_value() &&
           (!a.truncation_ || (a.truncation_->lambda == b.truncation_->lambda &&
                               a.truncation_->mode == b.truncation_->mode));
  }

 private:
  SeriesKind(SeriesTag tag, std::optional<TruncationPolicy> trunc);

  SeriesTag tag_;
  std::optional<TruncationPolicy> truncation_;
};

/// Blocks of one series together with the derived quantities every draw
/// needs. Immutable once built and safe to share across threads.
class SeriesModel {
 public:
  explicit SeriesModel(std::vector<BlockSpec> blocks);

  const std::vector<BlockSpec>& blocks() const noexcept { return blocks_; }
  const RealSequence& s() const noexcept { return s_; }
  double s_l1() const noexcept { return s_l1_; }
  double s_l2() const noexcept { return s_l2_; }
  /// FNV-1a digest of the block list, 16 hex digits.
  const std::string& digest() const noexcept { return digest_; }

  struct Draw {
    double value = 0.0;
    bool truncated = false;  ///< some block's truncation fired
  };

  /// One draw; block n uses trial_stream.child(n), the commutative kind
  /// uses trial_stream.child(0).
  Draw draw(const SeriesKind& kind, const RngSubstream& trial_stream) const;

 private:
  std::vector<BlockSpec> blocks_;
  RealSequence s_;
  double s_l1_ = 0.0;
  double s_l2_ = 0.0;
  std::string digest_;
};

/// One draw of the chosen series.
double evaluate_sample(std::span<const BlockSpec> blocks, const SeriesKind& kind,
                       const RngSubstream& stream);

/// Substream of one trial: path (kind tag, trial index).
RngSubstream trial_substream(std::uint64_t master_seed, SeriesTag tag, std::uint64_t trial);

struct SampleSet {
  SeriesKind kind = SeriesKind::epsilon();
  std::string blocks_digest;
  std::uint64_t master_seed = 0;
  std::size_t trials = 0;
  std::vector<double> samples;  ///< in trial-index order
  std::size_t truncated_trials = 0;
};

/// `trials` independent draws. `workers` = 0 picks the hardware
/// concurrency; the result does not depend on it.
SampleSet monte_carlo(const SeriesModel& model, const SeriesKind& kind, std::size_t trials,
                      std::uint64_t master_seed, unsigned workers = 0);

SampleSet monte_carlo(std::span<const BlockSpec> blocks, const SeriesKind& kind,
                      std::size_t trials, std::uint64_t master_seed, unsigned workers = 0);

struct TailEstimate {
  std::vector<double> thresholds;
  std::vector<double> probabilities;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  std::vector<std::size_t> exceedances;
};

/// Pr(sample > threshold) with 95% Wilson intervals. Thresholds must be
/// strictly increasing.
TailEstimate empirical_tail(const SampleSet& set, std::span<const double> thresholds);

struct MomentEstimate {
  std::vector<double> p;
  std::vector<double> norms;  ///< (mean |x|^p)^(1/p)
  double second_moment = 0.0;
};

MomentEstimate empirical_moments(const SampleSet& set, std::span<const double> p_list);

/// Lower-interpolated order-statistic quantiles.
std::vector<double> empirical_quantile(const SampleSet& set, std::span<const double> probs);

namespace test_hooks {

/// sum d_n tr(rotations[n] A_n) for caller-supplied rotations; with
/// identities this attains the sup of the epsilon series on nonnegative
/// diagonal blocks.
double evaluate_with_rotations(std::span<const BlockSpec> blocks,
                               std::span<const Matrix> rotations);

double evaluate_with_identity_rotations(std::span<const BlockSpec> blocks);

}  // namespace test_hooks

}  // namespace nctails
