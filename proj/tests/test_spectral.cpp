#include <cmath>

#include "doctest.h"
#include "herofilter/errors.hpp"
#include "herofilter/graph.hpp"
#include "herofilter/spectral.hpp"
#include "herofilter/rng.hpp"
#include "test_util.hpp"

using namespace herofilter;

namespace {

Matrix brute_force_relevance(const SpectralDecomposition& dec, const Vec& q) {
  // Direct triple-loop U diag(q) U^T, independent of the library path.
  const std::size_t n = dec.size();
  Matrix r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        acc += dec.eigenvectors.at(i, k) * q[k] * dec.eigenvectors.at(j, k);
      r.at(i, j) = acc;
    }
  return r;
}

void check_decomposition_quality(const Matrix& a, const SpectralDecomposition& dec,
                                 double tol_scale = 1.0) {
  const std::size_t n = a.rows;
  // Orthonormality.
  const Matrix gram = matmul(transpose(dec.eigenvectors), dec.eigenvectors);
  double ortho = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      ortho = std::max(ortho, std::fabs(gram.at(i, j) - (i == j ? 1.0 : 0.0)));
  CHECK(ortho <= 1e-8 * tol_scale);
  // Reconstruction.
  const Matrix recon =
      matmul(scale_columns(dec.eigenvectors, dec.eigenvalues), transpose(dec.eigenvectors));
  double frob = 0.0;
  for (std::size_t i = 0; i < recon.data.size(); ++i) {
    const double d = recon.data[i] - a.data[i];
    frob += d * d;
  }
  CHECK(std::sqrt(frob) <= 1e-8 * static_cast<double>(n) * tol_scale);
  // Ascending eigenvalues.
  for (std::size_t i = 1; i < n; ++i) CHECK(dec.eigenvalues[i] >= dec.eigenvalues[i - 1]);
}

}  // namespace

TEST_CASE("eigendecompose 2x2 swap matrix") {
  Matrix a(2, 2);
  a.at(0, 1) = 1.0;
  a.at(1, 0) = 1.0;
  const SpectralDecomposition dec = eigendecompose(a);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(dec.eigenvalues[0] == doctest::Approx(-1.0));
  CHECK(dec.eigenvalues[1] == doctest::Approx(1.0));
  CHECK(dec.eigenvectors.at(0, 0) == doctest::Approx(s));
  CHECK(dec.eigenvectors.at(1, 0) == doctest::Approx(-s));
  CHECK(dec.eigenvectors.at(0, 1) == doctest::Approx(s));
  CHECK(dec.eigenvectors.at(1, 1) == doctest::Approx(s));
}

TEST_CASE("eigendecompose zero matrix keeps identity basis") {
  const Matrix a(3, 3);
  const SpectralDecomposition dec = eigendecompose(a);
  for (int i = 0; i < 3; ++i) {
    CHECK(dec.eigenvalues[i] == 0.0);
    for (int j = 0; j < 3; ++j)
      CHECK(dec.eigenvectors.at(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
  }
}

TEST_CASE("eigendecompose triangle normalized adjacency") {
  const NormalizedAdjacency a = normalize_adjacency(testutil::triangle_graph());
  const SpectralDecomposition dec = eigendecompose(a);
  CHECK(dec.eigenvalues[0] == doctest::Approx(-0.5));
  CHECK(dec.eigenvalues[1] == doctest::Approx(-0.5));
  CHECK(dec.eigenvalues[2] == doctest::Approx(1.0));
  check_decomposition_quality(a.a, dec);
}

TEST_CASE("eigendecompose rejects nonsymmetric input") {
  Matrix a(2, 2);
  a.at(0, 1) = 1.0;
  CHECK_THROWS_AS(eigendecompose(a), ShapeError);
}

TEST_CASE("decomposition quality on random graphs") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const Graph g = testutil::random_graph(60, 0.1, 2, 2, seed);
    const NormalizedAdjacency a = normalize_adjacency(g);
    check_decomposition_quality(a.a, eigendecompose(a));
  }
}

TEST_CASE("connected graph has top eigenvalue one") {
  Graph path;
  path.num_nodes = 6;
  path.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}};
  const SpectralDecomposition dec = eigendecompose(normalize_adjacency(path));
  CHECK(std::fabs(dec.eigenvalues.back() - 1.0) <= 1e-8);
}

TEST_CASE("determinism of the eigendecomposition") {
  const Graph g = testutil::random_graph(30, 0.2, 2, 2, 77);
  const NormalizedAdjacency a = normalize_adjacency(g);
  const SpectralDecomposition d1 = eigendecompose(a);
  const SpectralDecomposition d2 = eigendecompose(a);
  CHECK(d1.eigenvalues == d2.eigenvalues);
  CHECK(d1.eigenvectors == d2.eigenvectors);
}

TEST_CASE("graph fourier transform") {
  SUBCASE("identity basis") {
    const Matrix u = Matrix::identity(4);
    const Vec x = {1, 2, 3, 4};
    CHECK(graph_fourier(u, x) == x);
    CHECK(inverse_graph_fourier(u, x) == x);
  }
  SUBCASE("zero signal") {
    const Matrix u = Matrix::identity(3);
    const Vec zero(3, 0.0);
    CHECK(graph_fourier(u, zero) == zero);
  }
  SUBCASE("parseval and inversion on a real basis") {
    const Graph g = testutil::random_graph(24, 0.2, 2, 2, 4);
    const SpectralDecomposition dec = eigendecompose(normalize_adjacency(g));
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
      Vec x(24);
      for (auto& v : x) v = rng.normal();
      const Vec xh = graph_fourier(dec.eigenvectors, x);
      CHECK(std::fabs(norm2(xh) - norm2(x)) <= 1e-9);
      const Vec back = inverse_graph_fourier(dec.eigenvectors, xh);
      CHECK(testutil::max_abs_diff(back, x) <= 1e-9);
    }
  }
  SUBCASE("shape errors") {
    const Matrix u = Matrix::identity(3);
    CHECK_THROWS_AS(graph_fourier(u, Vec{1, 2}), ShapeError);
  }
}

TEST_CASE("filter_response") {
  const Vec lambda = {-0.5, 0.25, 1.0};
  SUBCASE("zero weights give zero response for sigma(0)=0") {
    for (Activation act : {Activation::identity, Activation::tanh, Activation::relu}) {
      const PolyFilter f = make_poly_filter(3, 3, act);
      const Vec g = filter_response(f, lambda);
      for (double v : g) CHECK(v == 0.0);
    }
  }
  SUBCASE("first-order identity filter reproduces lambda") {
    PolyFilter f = make_poly_filter(1, 3, Activation::identity);
    f.weights[0] = Vec(3, 1.0);
    const Vec g = filter_response(f, lambda);
    for (int i = 0; i < 3; ++i) CHECK(g[i] == doctest::Approx(lambda[i]));
  }
  SUBCASE("order-2 tanh at lambda = 0.5") {
    PolyFilter f = make_poly_filter(2, 1, Activation::tanh);
    f.weights[0] = {1.0};
    f.weights[1] = {1.0};
    const Vec g = filter_response(f, {0.5});
    const double expected = std::tanh(0.5) + std::tanh(0.25);  // scalar oracle
    CHECK(g[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(g[0] == doctest::Approx(0.7070358196637188).epsilon(1e-9));
  }
}

TEST_CASE("low_pass_reference") {
  CHECK(low_pass_reference({1.0})[0] == doctest::Approx(1.0));
  CHECK(low_pass_reference({-1.0})[0] == doctest::Approx(1.0 / 3.0));
  const Vec g = low_pass_reference({-0.5, -0.5, 1.0});
  CHECK(g[0] == doctest::Approx(0.4));
  CHECK(g[1] == doctest::Approx(0.4));
  CHECK(g[2] == doctest::Approx(1.0));
}

TEST_CASE("band_filter") {
  const Vec lambda = {-0.5, -0.5, 1.0};  // Laplacian eigenvalues (1.5, 1.5, 0)
  SUBCASE("full band passes everything") {
    const Vec g = band_filter(lambda, 0.0, 2.0);
    for (double v : g) CHECK(v == 1.0);
  }
  SUBCASE("low band keeps only the smooth component") {
    const Vec g = band_filter(lambda, 0.0, 0.4);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.0);
    CHECK(g[2] == 1.0);
  }
  SUBCASE("band with no coverage") {
    const Vec g = band_filter(lambda, 0.5, 1.0);
    for (double v : g) CHECK(v == 0.0);
  }
  SUBCASE("right edge closed at 2") {
    const Vec g = band_filter({-1.0}, 1.6, 2.0);  // 1 - lambda = 2 exactly
    CHECK(g[0] == 1.0);
  }
  SUBCASE("lo must be below hi") {
    CHECK_THROWS_AS(band_filter(lambda, 1.0, 1.0), ParamError);
  }
}

TEST_CASE("relevance_matrix") {
  const Graph g = testutil::random_graph(5, 0.5, 2, 2, 21);
  const NormalizedAdjacency a = normalize_adjacency(g);
  const SpectralDecomposition dec = eigendecompose(a);

  SUBCASE("zero weights give the zero matrix") {
    const PolyFilter f = make_poly_filter(2, 5, Activation::tanh);
    const Matrix r = relevance_matrix(dec, f);
    CHECK(max_abs(r) <= 1e-12);
  }
  SUBCASE("first-order identity filter reconstructs the adjacency") {
    PolyFilter f = make_poly_filter(1, 5, Activation::identity);
    f.weights[0] = Vec(5, 1.0);
    const Matrix r = relevance_matrix(dec, f);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) CHECK(r.at(i, j) == doctest::Approx(a.a.at(i, j)).epsilon(1e-8));
  }
  SUBCASE("random filter matches the brute-force triple product") {
    Rng rng(5);
    PolyFilter f = make_poly_filter(3, 5, Activation::tanh);
    for (auto& w : f.weights)
      for (auto& v : w) v = rng.normal();
    const Matrix r = relevance_matrix(dec, f);
    const Matrix oracle = brute_force_relevance(dec, filter_response(f, dec.eigenvalues));
    for (std::size_t i = 0; i < r.data.size(); ++i)
      CHECK(r.data[i] == doctest::Approx(oracle.data[i]).epsilon(1e-9));
    CHECK(symmetry_defect(r) <= 1e-9);
  }
  SUBCASE("activation-free powers reproduce matrix powers") {
    const Graph big = testutil::random_graph(40, 0.12, 2, 2, 31);
    const NormalizedAdjacency ab = normalize_adjacency(big);
    const SpectralDecomposition db = eigendecompose(ab);
    Matrix power = Matrix::identity(40);
    for (int k = 1; k <= 3; ++k) {
      power = matmul(power, ab.a);  // direct matrix-power oracle
      PolyFilter f = make_poly_filter(k, 40, Activation::identity);
      f.weights[k - 1] = Vec(40, 1.0);
      const Matrix r = relevance_matrix(db, f);
      double worst = 0.0;
      for (std::size_t i = 0; i < r.data.size(); ++i)
        worst = std::max(worst, std::fabs(r.data[i] - power.data[i]));
      CHECK(worst <= 1e-8);
    }
  }
  SUBCASE("activation toggle matters for tanh") {
    PolyFilter f = make_poly_filter(1, 5, Activation::tanh);
    f.weights[0] = Vec(5, 2.0);
    f.apply_activation_in_relevance = false;
    const Matrix linear = relevance_matrix(dec, f);
    f.apply_activation_in_relevance = true;
    const Matrix squashed = relevance_matrix(dec, f);
    const Matrix lin_oracle = brute_force_relevance(dec, polynomial_sum(f, dec.eigenvalues));
    for (std::size_t i = 0; i < linear.data.size(); ++i)
      CHECK(linear.data[i] == doctest::Approx(lin_oracle.data[i]).epsilon(1e-9));
    double diff = 0.0;
    for (std::size_t i = 0; i < linear.data.size(); ++i)
      diff = std::max(diff, std::fabs(linear.data[i] - squashed.data[i]));
    CHECK(diff > 1e-3);
  }
}
