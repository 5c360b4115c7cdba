#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gappy/linalg.hpp"
#include "gappy/matrix.hpp"
#include "gappy/rng.hpp"

using namespace gappy;

namespace {

Matrix sym(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
  return m;
}

double frob(const Matrix& m) { return std::sqrt(frobenius_squared(m)); }

// Independent eigenvalue oracle. By Sylvester's law of inertia the number of
// negative pivots in the LDL^T factorization of A - t*I equals the number of
// eigenvalues below t, so each eigenvalue can be bisected without ever
// forming a characteristic polynomial or rotating the matrix.
int eigenvalues_below(const Matrix& a, double t) {
  const std::size_t n = a.rows();
  Matrix m = a;
  for (std::size_t i = 0; i < n; ++i) m(i, i) -= t;
  int negatives = 0;
  for (std::size_t c = 0; c < n; ++c) {
    double pivot = m(c, c);
    if (pivot == 0.0) pivot = 1e-300;  // nudge off the breakdown point
    if (pivot < 0.0) ++negatives;
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m(r, c) / pivot;
      for (std::size_t j = c; j < n; ++j) m(r, j) -= f * m(c, j);
    }
  }
  return negatives;
}

std::vector<double> bisection_eigenvalues(const Matrix& a) {
  const std::size_t n = a.rows();
  // Gershgorin bounds.
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) radius += std::abs(a(i, j));
    lo = std::min(lo, a(i, i) - radius);
    hi = std::max(hi, a(i, i) + radius);
  }
  lo -= 1.0;
  hi += 1.0;
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k-th smallest eigenvalue: smallest t with eigenvalues_below(t) >= k+1.
    double a0 = lo, b0 = hi;
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = 0.5 * (a0 + b0);
      if (eigenvalues_below(a, mid) >= static_cast<int>(k) + 1)
        b0 = mid;
      else
        a0 = mid;
    }
    out[k] = 0.5 * (a0 + b0);
  }
  std::sort(out.rbegin(), out.rend());  // descending, to match EigResult
  return out;
}

Matrix random_symmetric(std::size_t n, std::uint64_t seed, double scale) {
  Rng rng(seed);
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = scale * rng.normal();
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

void check_decomposition(const Matrix& a, const EigResult& eig, double tol) {
  const std::size_t n = a.rows();
  // The Jacobi stop rule is 1e-12 relative to max(scale, 1), which leaves an
  // absolute residual floor for matrices with norm below one.
  const double scale = std::max(frob(a), 1e-30);
  const double floor = 1e-12;
  // Columns orthonormal.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t r = 0; r < n; ++r)
        dot += eig.vectors(r, i) * eig.vectors(r, j);
      CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) < 1e-10);
    }
  // A v = lambda v columnwise and V Lambda V^T reconstructs A.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < n; ++r) {
      double av = 0.0;
      for (std::size_t c = 0; c < n; ++c) av += a(r, c) * eig.vectors(c, i);
      CHECK(std::abs(av - eig.values[i] * eig.vectors(r, i)) < tol * scale + floor);
    }
  }
  Matrix rebuilt(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        acc += eig.vectors(r, k) * eig.values[k] * eig.vectors(c, k);
      rebuilt(r, c) = acc;
    }
  double err = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      err += (rebuilt(r, c) - a(r, c)) * (rebuilt(r, c) - a(r, c));
  CHECK(std::sqrt(err) < 1e-10 * scale + floor);
}

}  // namespace

TEST_CASE("eigendecomposition of a diagonal matrix sorts descending") {
  const Matrix a = sym({{3, 0, 0}, {0, 1, 0}, {0, 0, 2}});
  const EigResult eig = sym_eig_small(a);
  REQUIRE(eig.values.size() == 3u);
  CHECK(eig.values[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(eig.values[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(eig.values[2] == doctest::Approx(1.0).epsilon(1e-12));
  check_decomposition(a, eig, 1e-10);
}

TEST_CASE("eigendecomposition of a 2x2 with known spectrum") {
  const Matrix a = sym({{2, 1}, {1, 2}});
  const EigResult eig = sym_eig_small(a);
  CHECK(eig.values[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(eig.values[1] == doctest::Approx(1.0).epsilon(1e-12));
  // Eigenvector of 3 is (1,1)/sqrt(2) up to sign.
  CHECK(std::abs(std::abs(eig.vectors(0, 0)) - 1.0 / std::sqrt(2.0)) < 1e-10);
  CHECK(std::abs(eig.vectors(0, 0) - eig.vectors(1, 0)) < 1e-10);
  check_decomposition(a, eig, 1e-10);
}

TEST_CASE("random 5x5 spectra agree with the bisection oracle") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const Matrix a = random_symmetric(5, seed, 2.0);
    const EigResult eig = sym_eig_small(a);
    const std::vector<double> oracle = bisection_eigenvalues(a);
    const double scale = std::max(frob(a), 1.0);
    for (std::size_t i = 0; i < 5; ++i) {
      CAPTURE(seed);
      CAPTURE(i);
      CHECK(std::abs(eig.values[i] - oracle[i]) < 1e-8 * scale);
    }
    check_decomposition(a, eig, 1e-8);
  }
}

TEST_CASE("spectrum invariants: trace and determinant") {
  for (std::uint64_t seed = 20; seed < 24; ++seed) {
    const std::size_t n = 2 + static_cast<std::size_t>(seed % 5);
    const Matrix a = random_symmetric(n, seed, 1.0);
    const EigResult eig = sym_eig_small(a);
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += a(i, i);
    double sum = 0.0, product = 1.0;
    for (const double v : eig.values) {
      sum += v;
      product *= v;
    }
    CHECK(std::abs(sum - trace) < 1e-8 * std::max(1.0, std::abs(trace)));
    // Determinant via LU with partial pivoting.
    Matrix m = a;
    double det = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t pivot = c;
      for (std::size_t r = c + 1; r < n; ++r)
        if (std::abs(m(r, c)) > std::abs(m(pivot, c))) pivot = r;
      if (pivot != c) {
        for (std::size_t j = 0; j < n; ++j) std::swap(m(pivot, j), m(c, j));
        det = -det;
      }
      det *= m(c, c);
      if (m(c, c) == 0.0) break;
      for (std::size_t r = c + 1; r < n; ++r) {
        const double f = m(r, c) / m(c, c);
        for (std::size_t j = c; j < n; ++j) m(r, j) -= f * m(c, j);
      }
    }
    CHECK(std::abs(product - det) < 1e-8 * std::max(1.0, std::abs(det)));
  }
}

TEST_CASE("eigendecomposition handles scale extremes") {
  SUBCASE("large entries") {
    Matrix a = random_symmetric(4, 31, 1.0);
    for (std::size_t i = 0; i < 16; ++i) a.data()[i] *= 1e8;
    check_decomposition(a, sym_eig_small(a), 1e-9);
  }
  SUBCASE("tiny entries") {
    Matrix a = random_symmetric(4, 32, 1.0);
    for (std::size_t i = 0; i < 16; ++i) a.data()[i] *= 1e-8;
    check_decomposition(a, sym_eig_small(a), 1e-9);
  }
  SUBCASE("zero matrix") {
    const Matrix a(3, 3);
    const EigResult eig = sym_eig_small(a);
    for (const double v : eig.values) CHECK(v == 0.0);
    check_decomposition(a, eig, 1e-10);
  }
  SUBCASE("repeated eigenvalues") {
    // 2*I in a rotated basis still reconstructs and reports 2,2.
    const Matrix a = sym({{2, 0}, {0, 2}});
    const EigResult eig = sym_eig_small(a);
    CHECK(eig.values[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(eig.values[1] == doctest::Approx(2.0).epsilon(1e-12));
    check_decomposition(a, eig, 1e-10);
  }
}

TEST_CASE("eigendecomposition input validation") {
  Matrix bad(2, 2);
  bad(0, 1) = 1.0;
  bad(1, 0) = 1.5;
  CHECK_THROWS_AS(sym_eig_small(bad), std::invalid_argument);
  const Matrix wide(2, 3);
  CHECK_THROWS_AS(sym_eig_small(wide), std::invalid_argument);
  const Matrix big = random_symmetric(17, 7, 1.0);
  CHECK_THROWS_AS(sym_eig_small(big), std::invalid_argument);
}

TEST_CASE("matrix products against hand results") {
  Matrix a(2, 3);
  a(0, 0) = 1; a(0, 1) = 2; a(0, 2) = 3;
  a(1, 0) = 4; a(1, 1) = 5; a(1, 2) = 6;
  Matrix b(3, 2);
  b(0, 0) = 7; b(0, 1) = 8;
  b(1, 0) = 9; b(1, 1) = 10;
  b(2, 0) = 11; b(2, 1) = 12;

  const Matrix ab = matmul(a, b);
  REQUIRE(ab.rows() == 2u);
  REQUIRE(ab.cols() == 2u);
  CHECK(ab(0, 0) == 58.0);
  CHECK(ab(0, 1) == 64.0);
  CHECK(ab(1, 0) == 139.0);
  CHECK(ab(1, 1) == 154.0);

  // A * B^T with B given already transposed must match matmul.
  Matrix bt(2, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) bt(j, i) = b(i, j);
  const Matrix ab2 = matmul_nt(a, bt);
  CHECK(ab2 == ab);

  // C += A^T * B accumulates.
  Matrix c(3, 2, 1.0);
  Matrix rhs(2, 2);
  rhs(0, 0) = 1; rhs(0, 1) = 0;
  rhs(1, 0) = 0; rhs(1, 1) = 2;
  add_matmul_tn(a, rhs, c);
  CHECK(c(0, 0) == 1.0 + 1.0);   // 1 + a(0,0)*1 + a(1,0)*0
  CHECK(c(0, 1) == 1.0 + 8.0);   // 1 + a(1,0)*2
  CHECK(c(2, 0) == 1.0 + 3.0);
  CHECK(c(2, 1) == 1.0 + 12.0);
}

TEST_CASE("column means and frobenius norm") {
  Matrix m(3, 2);
  m(0, 0) = 1; m(0, 1) = -2;
  m(1, 0) = 3; m(1, 1) = 4;
  m(2, 0) = 5; m(2, 1) = 1;
  const std::vector<double> mu = column_mean(m);
  REQUIRE(mu.size() == 2u);
  CHECK(mu[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(mu[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(frobenius_squared(m) == doctest::Approx(1 + 4 + 9 + 16 + 25 + 1).epsilon(1e-15));
}
