#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "ymimo/linalg.hpp"
#include "ymimo/rng.hpp"

namespace ymimo::test {

// Test-only matrix source, independent of the channel sampler's stream layout.
inline ComplexMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  CounterRng rng(seed, 0xfeedULL);
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.complex_normal();
  return m;
}

inline ComplexVector random_vector(Eigen::Index n, std::uint64_t seed) {
  return random_matrix(n, 1, seed ^ 0x5a5a5a5aULL).col(0);
}

// Pseudo-inverse from a divide-and-conquer SVD: V diag(1/s) U^H.
inline ComplexMatrix oracle_pinv(const ComplexMatrix& a) {
  Eigen::BDCSVD<ComplexMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  Eigen::VectorXd inv(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace ymimo::test
