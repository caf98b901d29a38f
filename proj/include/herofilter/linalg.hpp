#pragma once

#include <cstddef>
#include <vector>

namespace herofilter {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  static Matrix identity(std::size_t n);

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }

  bool operator==(const Matrix&) const = default;
};

Matrix transpose(const Matrix& m);

// y = M x
Vec matvec(const Matrix& m, const Vec& x);

// y = M^T x
Vec matvec_transposed(const Matrix& m, const Vec& x);

Matrix matmul(const Matrix& a, const Matrix& b);

// a * diag(d), scaling column j by d[j].
Matrix scale_columns(const Matrix& a, const Vec& d);

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);

// Largest |a_ij - a_ji|.
double symmetry_defect(const Matrix& m);

// Cholesky factorization of a symmetric positive definite matrix.
// Throws NumericalError if a pivot is not strictly positive.
struct Cholesky {
  explicit Cholesky(const Matrix& a);

  // Solves A x = b for the factored A.
  Vec solve(const Vec& b) const;

  Matrix lower;
};

}  // namespace herofilter
