/// Small dense row-major matrix used throughout the pipeline.
/// Sizes here are tiny (network layers up to a few hundred, covariance
/// blocks up to 16), so a flat std::vector with tight loops beats any
/// heavyweight dependency.

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace gappy {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  void fill(double v) { data_.assign(data_.size(), v); }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// C = A * B with A: n x m, B: m x k.
Matrix matmul(const Matrix& a, const Matrix& b);

/// C = A * B^T with A: n x m, B: k x m. Both operands are traversed along
/// contiguous rows, so this is the preferred product in hot loops.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

/// C += A^T * B with A: n x m, B: n x k, C: m x k.
void add_matmul_tn(const Matrix& a, const Matrix& b, Matrix& c);

/// Column means of a sample matrix (rows are samples).
std::vector<double> column_mean(const Matrix& samples);

/// Frobenius norm squared.
double frobenius_squared(const Matrix& m);

inline void check_shape(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace gappy
