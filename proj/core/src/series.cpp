#include "nctails/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <stdexcept>
#include <thread>

#include "nctails/stats.hpp"

namespace nctails {
namespace {

std::string fnv1a_digest(std::span<const BlockSpec> blocks) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto feed = [&h](std::string_view text) {
    for (unsigned char c : text) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  char buf[64];
  for (const BlockSpec& b : blocks) {
    std::snprintf(buf, sizeof buf, "d=%zu;", b.dim());
    feed(buf);
    feed(b.has_matrix() ? "m:" : "s:");
    const std::span<const double> values =
        b.has_matrix() ? b.matrix().data() : std::span<const double>(b.explicit_singular_values());
    for (double v : values) {
      std::snprintf(buf, sizeof buf, "%.17g,", v);
      feed(buf);
    }
    feed("|");
  }
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// tr(M A) where A is the block's matrix; diagonal blocks only touch M's diagonal.
double block_trace(const Matrix& m, const BlockSpec& block) {
  if (block.has_matrix()) return trace_of_product(m, block.matrix());
  const auto& sv = block.explicit_singular_values();
  double s = 0.0;
  for (std::size_t i = 0; i < sv.size(); ++i) s += m(i, i) * sv[i];
  return s;
}

}  // namespace

SeriesKind::SeriesKind(SeriesTag tag, std::optional<TruncationPolicy> trunc)
    : tag_(tag), truncation_(trunc) {
  const bool needs = tag == SeriesTag::GaussTrunc || tag == SeriesTag::GaussStar;
  if (needs != truncation_.has_value()) {
    throw std::invalid_argument("SeriesKind: truncation policy required exactly for gauss_trunc/gauss_star");
  }
  if (truncation_ && !(truncation_->lambda > 0.0)) {
    throw std::invalid_argument("SeriesKind: lambda must be > 0");
  }
}

SeriesKind SeriesKind::parse(std::string_view name, double lambda) {
  if (name == "epsilon") return epsilon();
  if (name == "gauss") return gauss();
  if (name == "gauss_trunc") return gauss_trunc(lambda);
  if (name == "gauss_star") return gauss_star(lambda);
  if (name == "commutative") return commutative();
  throw std::invalid_argument("unknown series kind \"" + std::string(name) +
                              "\" (expected epsilon, gauss, gauss_trunc, gauss_star, commutative)");
}

std::string SeriesKind::name() const {
  switch (tag_) {
    case SeriesTag::Epsilon: return "epsilon";
    case SeriesTag::Gauss: return "gauss";
    case SeriesTag::GaussTrunc: return "gauss_trunc";
    case SeriesTag::GaussStar: return "gauss_star";
    case SeriesTag::Commutative: return "commutative";
  }
  return "unknown";
}

SeriesModel::SeriesModel(std::vector<BlockSpec> blocks)
    : blocks_(std::move(blocks)),
      s_(s_sequence(blocks_)),
      s_l1_(lp_norm(s_, 1.0)),
      s_l2_(lp_norm(s_, 2.0)),
      digest_(fnv1a_digest(blocks_)) {}

SeriesModel::Draw SeriesModel::draw(const SeriesKind& kind, const RngSubstream& trial_stream) const {
  Draw out;
  if (kind.tag() == SeriesTag::Commutative) {
    RngSubstream signs = trial_stream.child(0);
    for (double v : s_) out.value += v * signs.next_sign();
    return out;
  }
  for (std::size_t n = 0; n < blocks_.size(); ++n) {
    const BlockSpec& block = blocks_[n];
    const std::size_t d = block.dim();
    RngSubstream stream = trial_stream.child(n);
    double contribution = 0.0;
    switch (kind.tag()) {
      case SeriesTag::Epsilon:
        contribution = block_trace(haar_orthogonal(d, stream), block);
        break;
      case SeriesTag::Gauss:
        contribution = block_trace(gaussian_matrix(d, stream), block);
        break;
      case SeriesTag::GaussTrunc:
      case SeriesTag::GaussStar: {
        const Matrix g = gaussian_matrix(d, stream);
        if (truncation_fires(g, *kind.truncation())) {
          out.truncated = true;
        } else {
          contribution = block_trace(g, block);
        }
        break;
      }
      case SeriesTag::Commutative:
        break;
    }
    out.value += static_cast<double>(d) * contribution;
  }
  return out;
}

double evaluate_sample(std::span<const BlockSpec> blocks, const SeriesKind& kind,
                       const RngSubstream& stream) {
  const SeriesModel model(std::vector<BlockSpec>(blocks.begin(), blocks.end()));
  return model.draw(kind, stream).value;
}

RngSubstream trial_substream(std::uint64_t master_seed, SeriesTag tag, std::uint64_t trial) {
  return RngSubstream(master_seed, {static_cast<std::uint64_t>(tag), trial});
}

SampleSet monte_carlo(const SeriesModel& model, const SeriesKind& kind, std::size_t trials,
                      std::uint64_t master_seed, unsigned workers) {
  if (trials == 0) throw std::invalid_argument("monte_carlo: trials must be >= 1");
  if (model.blocks().empty()) throw std::invalid_argument("monte_carlo: no blocks");

  SampleSet set{kind, model.digest(), master_seed, trials, std::vector<double>(trials), 0};
  std::vector<unsigned char> truncated(trials, 0);

  unsigned n_workers = workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : workers;
  n_workers = static_cast<unsigned>(std::min<std::size_t>(n_workers, trials));

  const auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto d = model.draw(kind, trial_substream(master_seed, kind.tag(), i));
      set.samples[i] = d.value;
      truncated[i] = d.truncated ? 1 : 0;
    }
  };

  if (n_workers <= 1) {
    run_range(0, trials);
  } else {
    std::vector<std::exception_ptr> errors(n_workers);
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    const std::size_t chunk = (trials + n_workers - 1) / n_workers;
    for (unsigned w = 0; w < n_workers; ++w) {
      const std::size_t begin = std::min(trials, w * chunk);
      const std::size_t end = std::min(trials, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          run_range(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  set.truncated_trials = static_cast<std::size_t>(std::count(truncated.begin(), truncated.end(), 1));
  return set;
}

SampleSet monte_carlo(std::span<const BlockSpec> blocks, const SeriesKind& kind,
                      std::size_t trials, std::uint64_t master_seed, unsigned workers) {
  const SeriesModel model(std::vector<BlockSpec>(blocks.begin(), blocks.end()));
  return monte_carlo(model, kind, trials, master_seed, workers);
}

namespace {

std::vector<double> sorted_samples(const SampleSet& set) {
  if (set.samples.empty()) throw std::invalid_argument("empty SampleSet");
  std::vector<double> x = set.samples;
  std::sort(x.begin(), x.end());
  return x;
}

}  // namespace

TailEstimate empirical_tail(const SampleSet& set, std::span<const double> thresholds) {
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1])) {
      throw std::invalid_argument("empirical_tail: thresholds must be strictly increasing");
    }
  }
  const std::vector<double> x = sorted_samples(set);
  const std::size_t n = x.size();
  TailEstimate est;
  est.thresholds.assign(thresholds.begin(), thresholds.end());
  for (double thr : thresholds) {
    const auto above = static_cast<std::size_t>(x.end() - std::upper_bound(x.begin(), x.end(), thr));
    const auto ci = stats::wilson_interval(above, n);
    est.exceedances.push_back(above);
    est.probabilities.push_back(static_cast<double>(above) / static_cast<double>(n));
    est.ci_low.push_back(ci.low);
    est.ci_high.push_back(ci.high);
  }
  return est;
}

MomentEstimate empirical_moments(const SampleSet& set, std::span<const double> p_list) {
  if (set.samples.empty()) throw std::invalid_argument("empirical_moments: empty SampleSet");
  MomentEstimate est;
  const double n = static_cast<double>(set.samples.size());
  double scale = 0.0;
  double sq = 0.0;
  for (double v : set.samples) {
    scale = std::max(scale, std::abs(v));
    sq += v * v;
  }
  est.second_moment = sq / n;
  for (double p : p_list) {
    if (!(p >= 1.0) || std::isinf(p)) {
      throw std::invalid_argument("empirical_moments: p must be finite and >= 1");
    }
    double norm = 0.0;
    if (scale > 0.0) {
      double s = 0.0;
      for (double v : set.samples) s += std::pow(std::abs(v) / scale, p);
      norm = scale * std::pow(s / n, 1.0 / p);
    }
    est.p.push_back(p);
    est.norms.push_back(norm);
  }
  return est;
}

std::vector<double> empirical_quantile(const SampleSet& set, std::span<const double> probs) {
  const std::vector<double> x = sorted_samples(set);
  std::vector<double> out;
  out.reserve(probs.size());
  for (double p : probs) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("empirical_quantile: probs must lie in (0,1)");
    out.push_back(stats::lower_quantile_sorted(x, p));
  }
  return out;
}

namespace test_hooks {

double evaluate_with_rotations(std::span<const BlockSpec> blocks, std::span<const Matrix> rotations) {
  if (rotations.size() != blocks.size()) {
    throw std::invalid_argument("evaluate_with_rotations: one rotation per block required");
  }
  double total = 0.0;
  for (std::size_t n = 0; n < blocks.size(); ++n) {
    total += static_cast<double>(blocks[n].dim()) * block_trace(rotations[n], blocks[n]);
  }
  return total;
}

double evaluate_with_identity_rotations(std::span<const BlockSpec> blocks) {
  std::vector<Matrix> ids;
  ids.reserve(blocks.size());
  for (const BlockSpec& b : blocks) ids.push_back(Matrix::identity(b.dim()));
  return evaluate_with_rotations(blocks, ids);
}

}  // namespace test_hooks

}  // namespace nctails
