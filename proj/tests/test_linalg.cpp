#include <cmath>

#include "doctest.h"
#include "herofilter/errors.hpp"
#include "herofilter/linalg.hpp"
#include "herofilter/rng.hpp"

using namespace herofilter;

TEST_CASE("matvec and matmul against hand values") {
  Matrix m(2, 3);
  m.at(0, 0) = 1;
  m.at(0, 1) = 2;
  m.at(0, 2) = 3;
  m.at(1, 0) = 4;
  m.at(1, 1) = 5;
  m.at(1, 2) = 6;
  const Vec y = matvec(m, {1, 1, 1});
  CHECK(y[0] == doctest::Approx(6));
  CHECK(y[1] == doctest::Approx(15));

  const Vec yt = matvec_transposed(m, {1, 1});
  CHECK(yt[0] == doctest::Approx(5));
  CHECK(yt[2] == doctest::Approx(9));

  const Matrix prod = matmul(m, transpose(m));
  CHECK(prod.at(0, 0) == doctest::Approx(14));
  CHECK(prod.at(0, 1) == doctest::Approx(32));
  CHECK(prod.at(1, 1) == doctest::Approx(77));

  CHECK_THROWS_AS(matvec(m, Vec{1, 2}), ShapeError);
  CHECK_THROWS_AS(matmul(m, m), ShapeError);
}

TEST_CASE("cholesky solves SPD systems") {
  // A = L L^T from a random well-conditioned L, solved against a known x.
  Rng rng(11);
  const std::size_t n = 12;
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) l.at(i, j) = 0.3 * rng.normal();
    l.at(i, i) = 1.0 + rng.uniform();
  }
  const Matrix a = matmul(l, transpose(l));
  Vec x_true(n);
  for (auto& v : x_true) v = rng.normal();
  const Vec b = matvec(a, x_true);
  const Cholesky chol(a);
  const Vec x = chol.solve(b);
  for (std::size_t i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(x_true[i]).epsilon(1e-9));
}

TEST_CASE("cholesky rejects indefinite input") {
  Matrix a(2, 2);
  a.at(0, 0) = 1.0;
  a.at(1, 1) = -1.0;
  CHECK_THROWS_AS(Cholesky{a}, NumericalError);
}

TEST_CASE("norms and symmetry defect") {
  Matrix m(2, 2);
  m.at(0, 1) = 3.0;
  m.at(1, 0) = 3.0 + 1e-3;
  CHECK(symmetry_defect(m) == doctest::Approx(1e-3));
  CHECK(frobenius_norm(m) == doctest::Approx(std::sqrt(9.0 + (3.0 + 1e-3) * (3.0 + 1e-3))));
  CHECK(norm2({3.0, 4.0}) == doctest::Approx(5.0));
}
