#pragma once

#include <string>

#include "herofilter/graph.hpp"
#include "herofilter/linalg.hpp"

namespace herofilter {

// Eigenpairs of a normalized adjacency: lambda ascending, U orthonormal
// with column i paired to eigenvalues[i]. Eigenvector signs are fixed by
// making the largest-magnitude entry of each column positive (ties by
// lowest row index), so decompositions are deterministic.
struct SpectralDecomposition {
  Vec eigenvalues;
  Matrix eigenvectors;

  std::size_t size() const { return eigenvalues.size(); }
};

// Cyclic Jacobi on the dense symmetric matrix. Converges when the
// off-diagonal Frobenius norm drops below 1e-12 * ||A||_F; throws
// NumericalError after 100 sweeps without convergence.
SpectralDecomposition eigendecompose(const NormalizedAdjacency& a);
SpectralDecomposition eigendecompose(const Matrix& symmetric);

// x_hat = U^T x and its inverse x = U x_hat.
Vec graph_fourier(const Matrix& u, const Vec& x);
Vec inverse_graph_fourier(const Matrix& u, const Vec& x_hat);

enum class Activation { identity, tanh, relu };

double apply_activation(Activation act, double x);
double activation_grad(Activation act, double x);

// Adaptive polynomial filter g(lambda)_i = sum_k act(w[k][i] * lambda_i^k).
// weights[k] has one entry per eigen index; order K = weights.size().
struct PolyFilter {
  std::vector<Vec> weights;
  Activation activation = Activation::tanh;
  bool apply_activation_in_relevance = true;
  bool shared_weights = false;  // ablation: w[k] constant across indices

  int order() const { return static_cast<int>(weights.size()); }
};

// Zero-initialized filter of the given order over n eigen indices.
PolyFilter make_poly_filter(int order, std::size_t n, Activation act = Activation::tanh);

Vec filter_response(const PolyFilter& f, const Vec& lambda);

// Reference low-pass response 1/(1 + (1 - lambda)) over adjacency
// eigenvalues; equals 1/(1 + mu) on Laplacian eigenvalues mu.
Vec low_pass_reference(const Vec& lambda);

// Indicator of lo <= 1 - lambda < hi over Laplacian eigenvalues; the
// band is closed on the right when hi reaches 2.
Vec band_filter(const Vec& lambda, double lo, double hi);

// R = U diag(q) U^T with q the filter response, or the activation-free
// sum when the filter opts out of the activation for relevance.
Matrix relevance_matrix(const SpectralDecomposition& dec, const PolyFilter& f);

// Same R for a fixed response vector (band/low-pass patchers).
Matrix relevance_from_response(const SpectralDecomposition& dec, const Vec& response);

// Activation-free diagonal sum_k w_k * lambda^k.
Vec polynomial_sum(const PolyFilter& f, const Vec& lambda);

}  // namespace herofilter
