#pragma once

#include <random>
#include <vector>

#include "ltvstab/system_model.hpp"
#include "ltvstab/types.hpp"

namespace ltvstab::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Matrix random_matrix(Rng& rng, Index rows, Index cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = uniform(rng, -scale, scale);
  }
  return m;
}

inline Matrix random_orthogonal(Rng& rng, Index n) {
  const Matrix g = random_matrix(rng, n, n);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < n; ++i) {
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  }
  return q;
}

inline Matrix random_spd(Rng& rng, Index n, double shift = 0.5) {
  const Matrix g = random_matrix(rng, n, n);
  return g * g.transpose() + shift * Matrix::Identity(n, n);
}

/// Square invertible matrix with a bounded condition number.
inline Matrix random_invertible(Rng& rng, Index n, double spread = 0.3) {
  while (true) {
    Matrix m = Matrix::Identity(n, n) + spread * random_matrix(rng, n, n);
    if (std::abs(m.determinant()) > 0.1) return m;
  }
}

/// Diagonalizable matrix with the given real eigenvalues.
inline Matrix with_real_spectrum(Rng& rng, const std::vector<double>& eigenvalues) {
  const Index n = static_cast<Index>(eigenvalues.size());
  Matrix d = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) d(i, i) = eigenvalues[static_cast<std::size_t>(i)];
  const Matrix t = random_invertible(rng, n, 0.4);
  return t * d * t.inverse();
}

inline SystemModel random_periodic_system(Rng& rng, Index n, Index m, Index period,
                                          double scale = 1.0) {
  std::vector<Matrix> a_steps;
  std::vector<Matrix> b_steps;
  for (Index i = 0; i < period; ++i) {
    a_steps.push_back(random_matrix(rng, n, n, scale));
    b_steps.push_back(random_matrix(rng, n, m, scale));
  }
  return SystemModel::periodic(std::move(a_steps), std::move(b_steps));
}

/// Brute-force ordered product A(t1-1) ... A(t0), the transition oracle.
inline Matrix product_oracle(const SystemModel& sys, Index t0, Index t1) {
  Matrix p = Matrix::Identity(sys.state_dim(), sys.state_dim());
  for (Index t = t0; t < t1; ++t) p = sys.A(t) * p;
  return p;
}

/// Spectral radius of the vectorized one-step second-moment map
/// S -> A_cl S A_cl' + sigma2 (BK) S (BK)' for a constant closed loop.
inline double moment_map_radius(const Matrix& a_cl, const Matrix& bk, double sigma2) {
  const Index n = a_cl.rows();
  Matrix map = Matrix::Zero(n * n, n * n);
  auto kron_into = [&](const Matrix& m, double weight) {
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        map.block(i * n, j * n, n, n) += weight * m(i, j) * m;
      }
    }
  };
  kron_into(a_cl, 1.0);
  kron_into(bk, sigma2);
  return map.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace ltvstab::testing
