#include "herofilter/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "herofilter/errors.hpp"

namespace herofilter {

namespace {

double off_diagonal_frobenius(const Matrix& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j)
      if (i != j) acc += a.at(i, j) * a.at(i, j);
  return std::sqrt(acc);
}

}  // namespace

SpectralDecomposition eigendecompose(const Matrix& symmetric) {
  if (symmetric.rows != symmetric.cols) throw ShapeError("eigendecompose: square matrix required");
  const std::size_t n = symmetric.rows;
  if (symmetry_defect(symmetric) > 1e-12)
    throw ShapeError("eigendecompose: matrix is not symmetric");

  Matrix a = symmetric;
  // vt holds eigenvectors as rows so rotations touch contiguous memory.
  Matrix vt = Matrix::identity(n);

  const double frob = frobenius_norm(a);
  const double tol = 1e-12 * frob;
  // Rotations below this cannot push the off-diagonal norm above tol.
  const double skip = n > 0 ? tol / static_cast<double>(n) : 0.0;

  const int max_sweeps = 100;
  bool converged = off_diagonal_frobenius(a) <= tol;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (std::fabs(apq) <= skip) continue;
        const double app = a.at(p, p);
        const double aqq = a.at(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        double* row_p = a.row(p);
        double* row_q = a.row(q);
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = row_p[k];
          const double akq = row_q[k];
          row_p[k] = c * akp - s * akq;
          row_q[k] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          a.at(k, p) = row_p[k];
          a.at(k, q) = row_q[k];
        }
        a.at(p, p) = app - t * apq;
        a.at(q, q) = aqq + t * apq;
        a.at(p, q) = 0.0;
        a.at(q, p) = 0.0;

        double* vp = vt.row(p);
        double* vq = vt.row(q);
        for (std::size_t k = 0; k < n; ++k) {
          const double xp = vp[k];
          const double xq = vq[k];
          vp[k] = c * xp - s * xq;
          vq[k] = s * xp + c * xq;
        }
      }
    }
    converged = off_diagonal_frobenius(a) <= tol;
  }
  if (!converged) throw NumericalError("jacobi eigensolver did not converge in 100 sweeps");

  // Sort ascending; stable so equal eigenvalues keep rotation order.
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(),
                   [&](std::size_t i, std::size_t j) { return a.at(i, i) < a.at(j, j); });

  SpectralDecomposition dec;
  dec.eigenvalues.resize(n);
  dec.eigenvectors = Matrix(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    const std::size_t src = perm[col];
    dec.eigenvalues[col] = a.at(src, src);
    const double* v = vt.row(src);
    // Sign fix: largest-magnitude entry positive, ties to lowest index.
    std::size_t arg = 0;
    double best = std::fabs(v[0]);
    for (std::size_t k = 1; k < n; ++k) {
      const double mag = std::fabs(v[k]);
      if (mag > best) {
        best = mag;
        arg = k;
      }
    }
    const double sign = v[arg] < 0.0 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < n; ++k) dec.eigenvectors.at(k, col) = sign * v[k];
  }
  return dec;
}

SpectralDecomposition eigendecompose(const NormalizedAdjacency& a) {
  return eigendecompose(a.a);
}

Vec graph_fourier(const Matrix& u, const Vec& x) {
  return matvec_transposed(u, x);
}

Vec inverse_graph_fourier(const Matrix& u, const Vec& x_hat) {
  return matvec(u, x_hat);
}

double apply_activation(Activation act, double x) {
  switch (act) {
    case Activation::identity:
      return x;
    case Activation::tanh:
      return std::tanh(x);
    case Activation::relu:
      return x > 0.0 ? x : 0.0;
  }
  return x;
}

double activation_grad(Activation act, double x) {
  switch (act) {
    case Activation::identity:
      return 1.0;
    case Activation::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::relu:
      return x > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

PolyFilter make_poly_filter(int order, std::size_t n, Activation act) {
  if (order < 1) throw ParamError("filter order must be >= 1");
  PolyFilter f;
  f.weights.assign(order, Vec(n, 0.0));
  f.activation = act;
  return f;
}

Vec filter_response(const PolyFilter& f, const Vec& lambda) {
  const std::size_t n = lambda.size();
  for (const auto& w : f.weights)
    if (w.size() != n) throw ShapeError("filter weights do not match spectrum size");
  Vec g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double pwr = 1.0;
    double acc = 0.0;
    for (int k = 0; k < f.order(); ++k) {
      pwr *= lambda[i];
      acc += apply_activation(f.activation, f.weights[k][i] * pwr);
    }
    g[i] = acc;
  }
  return g;
}

Vec polynomial_sum(const PolyFilter& f, const Vec& lambda) {
  const std::size_t n = lambda.size();
  for (const auto& w : f.weights)
    if (w.size() != n) throw ShapeError("filter weights do not match spectrum size");
  Vec g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double pwr = 1.0;
    double acc = 0.0;
    for (int k = 0; k < f.order(); ++k) {
      pwr *= lambda[i];
      acc += f.weights[k][i] * pwr;
    }
    g[i] = acc;
  }
  return g;
}

Vec low_pass_reference(const Vec& lambda) {
  Vec g(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) g[i] = 1.0 / (1.0 + (1.0 - lambda[i]));
  return g;
}

Vec band_filter(const Vec& lambda, double lo, double hi) {
  if (!(lo < hi)) throw ParamError("band_filter requires lo < hi");
  const bool closed_right = hi >= 2.0;
  Vec g(lambda.size(), 0.0);
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double mu = 1.0 - lambda[i];
    const bool in_band = mu >= lo && (closed_right ? mu <= hi : mu < hi);
    g[i] = in_band ? 1.0 : 0.0;
  }
  return g;
}

Matrix relevance_from_response(const SpectralDecomposition& dec, const Vec& response) {
  if (response.size() != dec.size())
    throw ShapeError("relevance: response does not match spectrum size");
  const Matrix scaled = scale_columns(dec.eigenvectors, response);
  return matmul(scaled, transpose(dec.eigenvectors));
}

Matrix relevance_matrix(const SpectralDecomposition& dec, const PolyFilter& f) {
  const Vec q = f.apply_activation_in_relevance ? filter_response(f, dec.eigenvalues)
                                                : polynomial_sum(f, dec.eigenvalues);
  return relevance_from_response(dec, q);
}

}  // namespace herofilter
