#include "herofilter/linalg.hpp"

#include <cmath>
#include <cstring>

#include "herofilter/errors.hpp"

namespace herofilter {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) t.at(j, i) = m.at(i, j);
  return t;
}

Vec matvec(const Matrix& m, const Vec& x) {
  if (x.size() != m.cols) throw ShapeError("matvec: dimension mismatch");
  Vec y(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* r = m.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) acc += r[j] * x[j];
    y[i] = acc;
  }
  return y;
}

Vec matvec_transposed(const Matrix& m, const Vec& x) {
  if (x.size() != m.rows) throw ShapeError("matvec_transposed: dimension mismatch");
  Vec y(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* r = m.row(i);
    const double xi = x[i];
    for (std::size_t j = 0; j < m.cols; ++j) y[j] += r[j] * xi;
  }
  return y;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw ShapeError("matmul: dimension mismatch");
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double* ci = c.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      const double* bk = b.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

Matrix scale_columns(const Matrix& a, const Vec& d) {
  if (d.size() != a.cols) throw ShapeError("scale_columns: dimension mismatch");
  Matrix s = a;
  for (std::size_t i = 0; i < s.rows; ++i) {
    double* r = s.row(i);
    for (std::size_t j = 0; j < s.cols; ++j) r[j] *= d[j];
  }
  return s;
}

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw ShapeError("dot: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double frobenius_norm(const Matrix& m) {
  double acc = 0.0;
  for (double v : m.data) acc += v * v;
  return std::sqrt(acc);
}

double max_abs(const Matrix& m) {
  double mx = 0.0;
  for (double v : m.data) mx = std::max(mx, std::fabs(v));
  return mx;
}

double symmetry_defect(const Matrix& m) {
  double mx = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = i + 1; j < m.cols; ++j)
      mx = std::max(mx, std::fabs(m.at(i, j) - m.at(j, i)));
  return mx;
}

Cholesky::Cholesky(const Matrix& a) {
  if (a.rows != a.cols) throw ShapeError("cholesky: square matrix required");
  const std::size_t n = a.rows;
  lower = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a.at(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= lower.at(j, k) * lower.at(j, k);
    if (!(diag > 0.0)) throw NumericalError("cholesky: matrix not positive definite");
    const double ljj = std::sqrt(diag);
    lower.at(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a.at(i, j);
      const double* li = lower.row(i);
      const double* lj = lower.row(j);
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
      lower.at(i, j) = s / ljj;
    }
  }
}

Vec Cholesky::solve(const Vec& b) const {
  const std::size_t n = lower.rows;
  if (b.size() != n) throw ShapeError("cholesky solve: dimension mismatch");
  Vec y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    const double* li = lower.row(i);
    for (std::size_t k = 0; k < i; ++k) s -= li[k] * y[k];
    y[i] = s / li[i];
  }
  Vec x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= lower.at(k, ii) * x[k];
    x[ii] = s / lower.at(ii, ii);
  }
  return x;
}

}  // namespace herofilter
