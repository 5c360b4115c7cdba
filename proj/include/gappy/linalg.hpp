/// Symmetric eigendecomposition for small matrices (m <= 16) by the cyclic
/// Jacobi method. Everything downstream that needs spectra (scale medians,
/// Procrustes, PCA projection, degeneracy checks) works on blocks of at most
/// ambient or embedding dimension, so a dependency-free O(m^3)-per-sweep
/// solver is the right size.

#pragma once

#include "gappy/matrix.hpp"

#include <vector>

namespace gappy {

struct EigResult {
  std::vector<double> values;  // descending
  Matrix vectors;              // column i is the eigenvector for values[i]
};

/// Eigendecomposition of a symmetric matrix, m <= 16. Sweeps until every
/// off-diagonal entry is below 1e-12 relative to the matrix scale.
/// Throws std::invalid_argument for non-symmetric or oversized input.
EigResult sym_eig_small(const Matrix& s);

}  // namespace gappy
