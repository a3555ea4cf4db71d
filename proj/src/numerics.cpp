#include "latentacc/numerics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>

#include "latentacc/errors.hpp"

namespace latentacc {

namespace {

constexpr double kPivotFloor = 1e-12;
constexpr int kMaxSweeps = 50;

void require_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DomainError("matrix shape mismatch");
  }
}

// Solves L * y = b in place (forward substitution).
void forward_substitute(const Matrix& lower, std::span<double> b) {
  const std::size_t n = lower.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= lower(i, k) * b[k];
    b[i] = s / lower(i, i);
  }
}

// Solves L^T * x = y in place.
void backward_substitute(const Matrix& lower, std::span<double> y) {
  const std::size_t n = lower.rows();
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= lower(k, ii) * y[k];
    y[ii] = s / lower(ii, ii);
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw DomainError("ragged matrix rows");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b);
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) + b(i, j);
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b);
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) - b(i, j);
  return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DomainError("matrix product shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = s * a(i, j);
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double trace(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) s += a(i, i);
  return s;
}

SymMatrix::SymMatrix(const Matrix& a) : m_(a.rows(), a.cols()) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw DomainError("symmetric matrix must be square with dim >= 1");
  }
  for (std::size_t i = 0; i < a.rows(); ++i) {
    m_(i, i) = a(i, i);
    for (std::size_t j = 0; j < i; ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      m_(i, j) = v;
      m_(j, i) = v;
    }
  }
}

SymMatrix SymMatrix::identity(std::size_t n) { return SymMatrix(Matrix::identity(n)); }

SymMatrix SymMatrix::diagonal(std::span<const double> values) {
  Matrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return SymMatrix(m);
}

SymMatrix SymMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  return SymMatrix(Matrix::from_rows(rows));
}

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
  return SymMatrix(a.matrix() + b.matrix());
}
SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
  return SymMatrix(a.matrix() - b.matrix());
}
SymMatrix operator*(double s, const SymMatrix& a) { return SymMatrix(s * a.matrix()); }

Matrix cholesky(const SymMatrix& a) {
  const std::size_t n = a.dim();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double floor = kPivotFloor * max_diag;

  Matrix lower(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= lower(j, k) * lower(j, k);
    if (!(pivot > floor) || max_diag == 0.0) throw NotPositiveDefinite(j, pivot);
    const double ljj = std::sqrt(pivot);
    lower(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
      lower(i, j) = s / ljj;
    }
  }
  return lower;
}

EigenList sym_eigenvalues(const SymMatrix& a) {
  const std::size_t n = a.dim();
  Matrix m = a.matrix();
  const double scale = frobenius_norm(m);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  while (off_norm() > 1e-12 * scale) {
    if (++sweep > kMaxSweeps) {
      throw NoConvergence("Jacobi eigensolver did not converge in 50 sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (apq == 0.0) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double mkp = m(k, p);
          const double mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double mpk = m(p, k);
          const double mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        m(p, q) = 0.0;
        m(q, p) = 0.0;
      }
    }
  }

  EigenList out;
  out.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.values.push_back(m(i, i));
  std::sort(out.values.begin(), out.values.end(), std::greater<>());
  return out;
}

double log_det_spd(const SymMatrix& a) {
  const Matrix lower = cholesky(a);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += std::log(lower(i, i));
  return 2.0 * s;
}

Matrix solve_spd(const SymMatrix& a, const Matrix& b) {
  if (b.rows() != a.dim()) throw DomainError("solve_spd: row count mismatch");
  const Matrix lower = cholesky(a);
  Matrix x(b.rows(), b.cols());
  std::vector<double> column(b.rows());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < b.rows(); ++i) column[i] = b(i, j);
    forward_substitute(lower, column);
    backward_substitute(lower, column);
    for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = column[i];
  }
  return x;
}

EigenList generalized_eigenvalues(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw DomainError("generalized_eigenvalues: dim mismatch");
  const std::size_t n = a.dim();
  const Matrix lower = cholesky(b);

  // W = L^{-1} a, then C = L^{-1} W^T = L^{-1} a L^{-T} (a symmetric).
  Matrix w(n, n);
  std::vector<double> column(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = a(i, j);
    forward_substitute(lower, column);
    for (std::size_t i = 0; i < n; ++i) w(i, j) = column[i];
  }
  Matrix c(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = w(j, i);
    forward_substitute(lower, column);
    for (std::size_t i = 0; i < n; ++i) c(i, j) = column[i];
  }
  return sym_eigenvalues(SymMatrix(c));
}

}  // namespace latentacc
