#include "gappy/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gappy {

EigResult sym_eig_small(const Matrix& s) {
  const std::size_t n = s.rows();
  if (n == 0 || n != s.cols())
    throw std::invalid_argument("sym_eig_small: matrix must be square");
  if (n > 16)
    throw std::invalid_argument("sym_eig_small: size > 16, use a real solver");

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      scale = std::max(scale, std::abs(s(i, j)));
  const double sym_tol = 1e-9 * std::max(scale, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(s(i, j) - s(j, i)) > sym_tol)
        throw std::invalid_argument("sym_eig_small: matrix not symmetric");

  Matrix a = s;
  Matrix v = Matrix::identity(n);
  // Absolute 1e-12 is unreachable for large-norm input, so the convergence
  // threshold is relative to the matrix scale.
  const double off_tol = 1e-12 * std::max(scale, 1.0);

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        off = std::max(off, std::abs(a(i, j)));
    if (off <= off_tol) break;
    if (sweep == 63)
      throw std::runtime_error("sym_eig_small: Jacobi sweeps did not converge");

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= off_tol * 1e-2) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;

        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - sn * aiq;
          a(i, q) = sn * aip + c * aiq;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const double apj = a(p, j), aqj = a(q, j);
          a(p, j) = c * apj - sn * aqj;
          a(q, j) = sn * apj + c * aqj;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - sn * viq;
          v(i, q) = sn * vip + c * viq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a(i, i) > a(j, j);
  });

  EigResult res;
  res.values.resize(n);
  res.vectors = Matrix(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    res.values[col] = a(order[col], order[col]);
    for (std::size_t i = 0; i < n; ++i) res.vectors(i, col) = v(i, order[col]);
  }
  return res;
}

}  // namespace gappy
