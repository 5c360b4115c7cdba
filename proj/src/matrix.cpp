#include "gappy/matrix.hpp"

#include <cmath>

namespace gappy {

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_shape(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  const std::size_t n = a.rows(), m = a.cols(), k = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* ci = c.data() + i * k;
    const double* ai = a.data() + i * m;
    for (std::size_t t = 0; t < m; ++t) {
      const double av = ai[t];
      const double* bt = b.data() + t * k;
      for (std::size_t j = 0; j < k; ++j) ci[j] += av * bt[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  check_shape(a.cols() == b.cols(), "matmul_nt: inner dimensions differ");
  Matrix c(a.rows(), b.rows());
  const std::size_t n = a.rows(), m = a.cols(), k = b.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a.data() + i * m;
    double* ci = c.data() + i * k;
    for (std::size_t j = 0; j < k; ++j) {
      const double* bj = b.data() + j * m;
      double s = 0.0;
      for (std::size_t t = 0; t < m; ++t) s += ai[t] * bj[t];
      ci[j] = s;
    }
  }
  return c;
}

void add_matmul_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  check_shape(a.rows() == b.rows(), "add_matmul_tn: outer dimensions differ");
  check_shape(c.rows() == a.cols() && c.cols() == b.cols(),
              "add_matmul_tn: output shape mismatch");
  const std::size_t n = a.rows(), m = a.cols(), k = b.cols();
  for (std::size_t t = 0; t < n; ++t) {
    const double* at = a.data() + t * m;
    const double* bt = b.data() + t * k;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = at[i];
      double* ci = c.data() + i * k;
      for (std::size_t j = 0; j < k; ++j) ci[j] += av * bt[j];
    }
  }
}

std::vector<double> column_mean(const Matrix& samples) {
  check_shape(samples.rows() > 0, "column_mean: empty matrix");
  std::vector<double> mean(samples.cols(), 0.0);
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    const double* r = samples.data() + i * samples.cols();
    for (std::size_t j = 0; j < samples.cols(); ++j) mean[j] += r[j];
  }
  const double inv = 1.0 / static_cast<double>(samples.rows());
  for (double& v : mean) v *= inv;
  return mean;
}

double frobenius_squared(const Matrix& m) {
  double s = 0.0;
  const double* p = m.data();
  for (std::size_t i = 0; i < m.rows() * m.cols(); ++i) s += p[i] * p[i];
  return s;
}

}  // namespace gappy
