#include "nctails/sampling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nctails {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kSeedSalt = 0x6a09e667f3bcc909ULL;

std::uint64_t derive_key(std::uint64_t seed, const std::vector<std::uint64_t>& path) {
  std::uint64_t key = mix64(seed ^ kSeedSalt);
  for (std::uint64_t p : path) key = mix64(key ^ mix64(p + kGolden));
  return key;
}

}  // namespace

RngSubstream::RngSubstream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path)
    : RngSubstream(master_seed, std::vector<std::uint64_t>(path)) {}

RngSubstream::RngSubstream(std::uint64_t master_seed, std::vector<std::uint64_t> path)
    : seed_(master_seed), path_(std::move(path)), key_(derive_key(seed_, path_)) {}

RngSubstream RngSubstream::child(std::uint64_t index) const {
  std::vector<std::uint64_t> p = path_;
  p.push_back(index);
  return RngSubstream(seed_, std::move(p));
}

std::uint64_t RngSubstream::next_u64() noexcept {
  const std::uint64_t z = mix64(key_ + counter_ * kGolden);
  ++counter_;
  return mix64(z ^ key_);
}

double RngSubstream::next_uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngSubstream::next_symmetric_uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-52 - 1.0;
}

double RngSubstream::next_gaussian() noexcept {
  if (spare_gaussian_) {
    const double g = *spare_gaussian_;
    spare_gaussian_.reset();
    return g;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = next_symmetric_uniform();
    v = next_symmetric_uniform();
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_gaussian_ = v * f;
  return u * f;
}

double RngSubstream::next_sign() noexcept { return (next_u64() >> 63) ? 1.0 : -1.0; }

std::uint64_t parse_seed(std::string_view text) {
  int base = 10;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    text.remove_prefix(2);
    base = 16;
  }
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, base);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument("invalid 64-bit seed \"" + std::string(text) + "\"");
  }
  return value;
}

Matrix gaussian_matrix(std::size_t d, RngSubstream& stream) {
  if (d == 0) throw std::invalid_argument("gaussian_matrix: d must be >= 1");
  Matrix g(d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (double& v : g.data()) v = scale * stream.next_gaussian();
  return g;
}

Matrix haar_orthogonal(std::size_t d, RngSubstream& stream) {
  if (d == 0) throw std::invalid_argument("haar_orthogonal: d must be >= 1");
  for (;;) {
    Matrix a(d);
    for (double& v : a.data()) v = stream.next_gaussian();
    const double tol = 1e-12 * a.frobenius_norm();

    std::vector<std::vector<double>> reflectors;
    reflectors.reserve(d);
    std::vector<double> r_diag(d);
    bool degenerate = false;

    for (std::size_t k = 0; k + 1 < d; ++k) {
      double norm_sq = 0.0;
      for (std::size_t i = k; i < d; ++i) norm_sq += a(i, k) * a(i, k);
      const double norm = std::sqrt(norm_sq);
      if (norm <= tol) {
        degenerate = true;
        break;
      }
      const double alpha = a(k, k) >= 0.0 ? -norm : norm;
      std::vector<double> v(d - k);
      for (std::size_t i = k; i < d; ++i) v[i - k] = a(i, k);
      v[0] -= alpha;
      double v_norm_sq = 0.0;
      for (double x : v) v_norm_sq += x * x;
      const double v_norm = std::sqrt(v_norm_sq);
      for (double& x : v) x /= v_norm;
      for (std::size_t j = k; j < d; ++j) {
        double dot = 0.0;
        for (std::size_t i = k; i < d; ++i) dot += v[i - k] * a(i, j);
        for (std::size_t i = k; i < d; ++i) a(i, j) -= 2.0 * v[i - k] * dot;
      }
      r_diag[k] = alpha;
      reflectors.push_back(std::move(v));
    }
    if (degenerate) continue;
    r_diag[d - 1] = a(d - 1, d - 1);
    if (std::abs(r_diag[d - 1]) <= tol) continue;

    // Q = H_0 H_1 ... H_{d-2}, accumulated right to left onto the identity.
    Matrix q = Matrix::identity(d);
    for (std::size_t k = reflectors.size(); k-- > 0;) {
      const std::vector<double>& v = reflectors[k];
      for (std::size_t j = 0; j < d; ++j) {
        double dot = 0.0;
        for (std::size_t i = k; i < d; ++i) dot += v[i - k] * q(i, j);
        for (std::size_t i = k; i < d; ++i) q(i, j) -= 2.0 * v[i - k] * dot;
      }
    }
    for (std::size_t j = 0; j < d; ++j) {
      if (r_diag[j] < 0.0) {
        for (std::size_t i = 0; i < d; ++i) q(i, j) = -q(i, j);
      }
    }
    return q;
  }
}

RealSequence rademacher_signs(std::size_t n, RngSubstream& stream) {
  RealSequence out(n);
  for (double& v : out) v = stream.next_sign();
  return out;
}

namespace {

// ||G||_inf > lambda, deciding from cheap bounds where they are conclusive:
// ||G||_F / sqrt(d) <= ||G||_inf <= sqrt(max row sum * max column sum).
bool operator_norm_exceeds(const Matrix& g, double lambda) {
  const std::size_t d = g.dim();
  double fro_sq = 0.0;
  double max_row = 0.0;
  std::vector<double> col(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double v = std::abs(g(i, j));
      fro_sq += v * v;
      row += v;
      col[j] += v;
    }
    max_row = std::max(max_row, row);
  }
  const double max_col = d == 0 ? 0.0 : *std::max_element(col.begin(), col.end());
  if (std::sqrt(max_row * max_col) <= lambda) return false;
  if (std::sqrt(fro_sq / static_cast<double>(d)) > lambda) return true;
  return operator_norm(g) > lambda;
}

}  // namespace

bool truncation_fires(const Matrix& g, const TruncationPolicy& policy) {
  if (!(policy.lambda > 0.0)) throw std::invalid_argument("TruncationPolicy: lambda must be > 0");
  switch (policy.mode) {
    case TruncationMode::Whole:
      return operator_norm_exceeds(g, policy.lambda);
    case TruncationMode::DiagOffdiag: {
      double diag_norm = 0.0;
      for (std::size_t i = 0; i < g.dim(); ++i) diag_norm = std::max(diag_norm, std::abs(g(i, i)));
      if (diag_norm > policy.lambda) return true;
      return operator_norm_exceeds(split_diag_offdiag(g).second, policy.lambda);
    }
  }
  return false;
}

Matrix apply_truncation(const Matrix& g, const TruncationPolicy& policy) {
  return truncation_fires(g, policy) ? Matrix(g.dim()) : g;
}

}  // namespace nctails
