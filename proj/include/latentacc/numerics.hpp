#pragma once

// Small dense linear algebra for d x d information matrices (d <= ~10).

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace latentacc {

/// Dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Matrix transpose(const Matrix& a);

double max_abs(const Matrix& a);
double frobenius_norm(const Matrix& a);
double trace(const Matrix& a);

/// Square symmetric matrix. Construction averages a with its transpose so
/// entries(i, j) == entries(j, i) holds exactly.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& a);

  static SymMatrix identity(std::size_t n);
  static SymMatrix diagonal(std::span<const double> values);
  static SymMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t dim() const { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator*(double s, const SymMatrix& a);

/// Eigenvalues sorted in descending order.
struct EigenList {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double largest() const { return values.front(); }
  double smallest() const { return values.back(); }
};

/// Lower-triangular L with L * L^T == a. Throws NotPositiveDefinite when a
/// pivot falls below 1e-12 * max diagonal; no jitter is ever added.
Matrix cholesky(const SymMatrix& a);

/// Cyclic Jacobi eigenvalues. Throws NoConvergence after 50 sweeps.
EigenList sym_eigenvalues(const SymMatrix& a);

double log_det_spd(const SymMatrix& a);

/// Solves a * x = b for SPD a, column by column.
Matrix solve_spd(const SymMatrix& a, const Matrix& b);

/// Eigenvalues of a * b^{-1}, computed as those of L^{-1} a L^{-T} with b = L L^T.
EigenList generalized_eigenvalues(const SymMatrix& a, const SymMatrix& b);

}  // namespace latentacc
