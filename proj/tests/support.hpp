#pragma once

#include "gradsynth/symmat.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace testing_support {

using gradsynth::Matrix;
using gradsynth::Vector;

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = n01(rng);
  return m;
}

inline Matrix random_orthogonal(std::mt19937_64& rng, int dim) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, dim, dim));
  return qr.householderQ() * Matrix::Identity(dim, dim);
}

/// Q diag(eigs) Q^T with a random orthogonal Q.
inline Matrix with_spectrum(std::mt19937_64& rng, const Vector& eigs) {
  const Matrix q = random_orthogonal(rng, static_cast<int>(eigs.size()));
  Matrix s = q * eigs.asDiagonal() * q.transpose();
  return (s + s.transpose()) / 2;
}

/// Random PSD matrix of the given rank, eigenvalues in [0.5, 3].
inline Matrix random_psd(std::mt19937_64& rng, int dim, int rank) {
  std::uniform_real_distribution<double> u(0.5, 3.0);
  Vector e = Vector::Zero(dim);
  for (int i = 0; i < rank; ++i) e(i) = u(rng);
  return with_spectrum(rng, e);
}

/// Spectral radius through the general (non-symmetric) eigensolver.
inline double dense_spectral_radius(const Matrix& a) {
  return Eigen::EigenSolver<Matrix>(a, false).eigenvalues().cwiseAbs().maxCoeff();
}

inline double max_sym_eig(const Matrix& a) {
  return Eigen::SelfAdjointEigenSolver<Matrix>((a + a.transpose()) / 2, Eigen::EigenvaluesOnly)
      .eigenvalues()
      .maxCoeff();
}

inline double min_sym_eig(const Matrix& a) {
  return Eigen::SelfAdjointEigenSolver<Matrix>((a + a.transpose()) / 2, Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

}  // namespace testing_support
