#include "nctails/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "nctails/error.hpp"

namespace nctails {

Matrix::Matrix(std::size_t dim, std::vector<double> row_major)
    : dim_(dim), data_(std::move(row_major)) {
  if (data_.size() != dim * dim) {
    throw std::invalid_argument("Matrix: expected " + std::to_string(dim * dim) +
                                " entries, got " + std::to_string(data_.size()));
  }
  require_finite(data_, "Matrix");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) : dim_(rows.size()) {
  data_.reserve(dim_ * dim_);
  for (const auto& row : rows) {
    if (row.size() != dim_) throw std::invalid_argument("Matrix: rows must form a square");
    data_.insert(data_.end(), row.begin(), row.end());
  }
  require_finite(data_, "Matrix");
}

Matrix Matrix::identity(std::size_t dim) {
  Matrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

double Matrix::trace() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) s += (*this)(i, i);
  return s;
}

double Matrix::frobenius_norm() const noexcept {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

Matrix Matrix::transpose() const {
  Matrix t(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool Matrix::is_zero() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("Matrix product: dimension mismatch");
  const std::size_t d = a.dim();
  Matrix c(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < d; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("Matrix sum: dimension mismatch");
  Matrix c = a;
  std::transform(c.data_.begin(), c.data_.end(), b.data_.begin(), c.data_.begin(), std::plus<>{});
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) { return a + (-1.0) * b; }

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (double& v : c.data_) v *= s;
  return c;
}

double trace_of_product(const Matrix& a, const Matrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("trace_of_product: dimension mismatch");
  double s = 0.0;
  const std::size_t d = a.dim();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) s += a(i, j) * b(j, i);
  return s;
}

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

void rotate_rows(Matrix& a, std::size_t p, std::size_t q, double c, double s) {
  // row_p <- c row_p + s row_q ; row_q <- -s row_p + c row_q
  for (std::size_t j = 0; j < a.dim(); ++j) {
    const double ap = a(p, j);
    const double aq = a(q, j);
    a(p, j) = c * ap + s * aq;
    a(q, j) = -s * ap + c * aq;
  }
}

void rotate_cols(Matrix& a, std::size_t p, std::size_t q, double c, double s) {
  // col_p <- c col_p - s col_q ; col_q <- s col_p + c col_q
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double ap = a(i, p);
    const double aq = a(i, q);
    a(i, p) = c * ap - s * aq;
    a(i, q) = s * ap + c * aq;
  }
}

constexpr int kMaxSweeps = 30;

}  // namespace

RealSequence singular_values(const Matrix& input) {
  const std::size_t d = input.dim();
  Matrix a = input;
  const double fro = input.frobenius_norm();
  const double target = 1e-12 * fro;

  int sweep = 0;
  while (off_diagonal_norm(a) > target) {
    if (sweep++ == kMaxSweeps) {
      throw ConvergenceError("singular_values: no convergence after " +
                             std::to_string(kMaxSweeps) + " Jacobi sweeps (dim " +
                             std::to_string(d) + ")");
    }
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        if (a(p, q) == 0.0 && a(q, p) == 0.0) continue;
        // Left rotation that symmetrises the 2x2 block [[a b] [c d]].
        const double phi = std::atan2(a(q, p) - a(p, q), a(p, p) + a(q, q));
        rotate_rows(a, p, q, std::cos(phi), std::sin(phi));
        // Symmetric Jacobi step on [[x y] [y z]].
        const double x = a(p, p);
        const double y = 0.5 * (a(p, q) + a(q, p));
        const double z = a(q, q);
        const double psi = 0.5 * std::atan2(-2.0 * y, x - z);
        const double c = std::cos(psi);
        const double s = std::sin(psi);
        rotate_rows(a, p, q, c, -s);
        rotate_cols(a, p, q, c, s);
      }
    }
  }

  RealSequence sv(d);
  const double floor = 1e-13 * fro;
  for (std::size_t i = 0; i < d; ++i) {
    const double v = std::abs(a(i, i));
    sv[i] = v < floor ? 0.0 : v;
  }
  std::sort(sv.begin(), sv.end(), std::greater<>{});
  return sv;
}

double schatten_norm(const Matrix& a, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("schatten_norm: p must be > 0");
  return lp_norm(singular_values(a), p);
}

double operator_norm(const Matrix& a) {
  if (a.dim() == 0) return 0.0;
  if (a.dim() == 1) return std::abs(a(0, 0));
  return singular_values(a).front();
}

BlockSpec BlockSpec::from_matrix(Matrix m) {
  if (m.dim() == 0) throw std::invalid_argument("BlockSpec: dimension must be >= 1");
  const std::size_t d = m.dim();
  return BlockSpec(d, std::move(m));
}

BlockSpec BlockSpec::from_singular_values(std::size_t dim, std::vector<double> sv) {
  if (dim == 0) throw std::invalid_argument("BlockSpec: dimension must be >= 1");
  if (sv.size() != dim) {
    throw std::invalid_argument("BlockSpec: expected " + std::to_string(dim) +
                                " singular values, got " + std::to_string(sv.size()));
  }
  require_finite(sv, "BlockSpec");
  if (std::any_of(sv.begin(), sv.end(), [](double v) { return v < 0.0; })) {
    throw std::invalid_argument("BlockSpec: singular values must be nonnegative");
  }
  return BlockSpec(dim, std::move(sv));
}

RealSequence BlockSpec::singular_values() const {
  if (has_matrix()) return nctails::singular_values(matrix());
  RealSequence sv = explicit_singular_values();
  std::sort(sv.begin(), sv.end(), std::greater<>{});
  return sv;
}

Matrix BlockSpec::as_matrix() const {
  if (has_matrix()) return matrix();
  return Matrix::diagonal(explicit_singular_values());
}

BlockSpec BlockSpec::scaled(double factor) const {
  if (has_matrix()) return from_matrix(factor * matrix());
  std::vector<double> sv = explicit_singular_values();
  for (double& v : sv) v *= std::abs(factor);
  return from_singular_values(dim_, std::move(sv));
}

RealSequence s_sequence(std::span<const BlockSpec> blocks) {
  RealSequence s;
  for (const BlockSpec& b : blocks) {
    const RealSequence sv = b.singular_values();
    for (double v : sv) s.insert(s.end(), b.dim(), v);
  }
  std::sort(s.begin(), s.end(), std::greater<>{});
  return s;
}

std::pair<Matrix, Matrix> split_diag_offdiag(const Matrix& a) {
  Matrix diag(a.dim());
  Matrix off = a;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    diag(i, i) = a(i, i);
    off(i, i) = 0.0;
  }
  return {std::move(diag), std::move(off)};
}

}  // namespace nctails
