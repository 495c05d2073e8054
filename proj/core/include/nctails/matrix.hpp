#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "nctails/sequences.hpp"

namespace nctails {

/// Dense square real matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}
  Matrix(std::size_t dim, std::vector<double> row_major);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t dim);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t dim() const noexcept { return dim_; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * dim_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * dim_ + j]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  double trace() const noexcept;
  double frobenius_norm() const noexcept;
  Matrix transpose() const;
  bool is_zero() const noexcept;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Matrix operator+(const Matrix& a, const Matrix& b);
  friend Matrix operator-(const Matrix& a, const Matrix& b);
  friend Matrix operator*(double s, const Matrix& a);
  friend bool operator==(const Matrix& a, const Matrix& b) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// tr(a b) without forming the product.
double trace_of_product(const Matrix& a, const Matrix& b);

/// Singular values, non-increasing, by cyclic two-sided Jacobi rotations.
/// Throws ConvergenceError if the off-diagonal mass is still above
/// 1e-12 ||A||_F after 30 sweeps.
RealSequence singular_values(const Matrix& a);

/// l_p norm of the singular values: p = 1 trace class, 2 Frobenius,
/// infinity operator norm.
double schatten_norm(const Matrix& a, double p);

/// Largest singular value.
double operator_norm(const Matrix& a);

/// One term of the series: a block dimension with either a full matrix or
/// its singular values.
class BlockSpec {
 public:
  static BlockSpec from_matrix(Matrix m);
  static BlockSpec from_singular_values(std::size_t dim, std::vector<double> sv);

  std::size_t dim() const noexcept { return dim_; }
  bool has_matrix() const noexcept { return std::holds_alternative<Matrix>(payload_); }
  const Matrix& matrix() const { return std::get<Matrix>(payload_); }
  /// Explicit singular values as given (not sorted).
  const std::vector<double>& explicit_singular_values() const {
    return std::get<std::vector<double>>(payload_);
  }

  /// Singular values, computed if the block holds a matrix.
  RealSequence singular_values() const;
  /// The block's matrix, or diag(singular values).
  Matrix as_matrix() const;
  BlockSpec scaled(double factor) const;

 private:
  BlockSpec(std::size_t dim, std::variant<Matrix, std::vector<double>> payload)
      : dim_(dim), payload_(std::move(payload)) {}

  std::size_t dim_;
  std::variant<Matrix, std::vector<double>> payload_;
};

/// Every block's singular values repeated d_n times, merged and sorted
/// non-increasingly.
RealSequence s_sequence(std::span<const BlockSpec> blocks);

/// (diagonal part, off-diagonal part).
std::pair<Matrix, Matrix> split_diag_offdiag(const Matrix& a);

}  // namespace nctails
