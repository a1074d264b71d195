#pragma once

// Test-only reference computations. Everything here uses scalar loops or
// textbook numerics and shares no code path with the library routines it checks.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "sadl/core.hpp"
#include "sadl/solver.hpp"

namespace sadl::oracle {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                            double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Matrix M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = dist(rng);
  return M;
}

inline Matrix matmul(const Matrix& A, const Matrix& B) {
  Matrix C = Matrix::Zero(A.rows(), B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < A.cols(); ++k) acc += A(i, k) * B(k, j);
      C(i, j) = acc;
    }
  return C;
}

/// Term-by-term evaluation of the augmented Lagrangian with explicit loops.
inline double lagrangian(const Variables& v, const Matrix& X, const Matrix& H, const Matrix& L,
                         const TrainConfig& cfg, bool with_l1 = true) {
  const Matrix OX = matmul(v.Omega, X);
  const Matrix QU = matmul(v.Q, v.U);
  const Matrix WQU = matmul(v.W, QU);
  double data = 0.0, l1 = 0.0, dual1 = 0.0, dual2 = 0.0, pen1 = 0.0, pen2 = 0.0;
  for (Eigen::Index i = 0; i < v.U.rows(); ++i)
    for (Eigen::Index j = 0; j < v.U.cols(); ++j) {
      const double d = v.U(i, j) - OX(i, j);
      data += d * d;
      l1 += std::abs(v.U(i, j));
    }
  for (Eigen::Index i = 0; i < H.rows(); ++i)
    for (Eigen::Index j = 0; j < H.cols(); ++j) {
      const double r = H(i, j) - QU(i, j);
      dual1 += v.Y1(i, j) * r;
      pen1 += r * r;
    }
  for (Eigen::Index i = 0; i < L.rows(); ++i)
    for (Eigen::Index j = 0; j < L.cols(); ++j) {
      const double r = L(i, j) - WQU(i, j);
      dual2 += v.Y2(i, j) * r;
      pen2 += r * r;
    }
  return 0.5 * data + (with_l1 ? cfg.lambda1 * l1 : 0.0) + cfg.lambda2 * dual1 +
         cfg.lambda3 * dual2 + 0.5 * v.mu * (pen1 + pen2);
}

/// Central differences of `f` with respect to every entry of `M`.
inline Matrix finite_difference(Matrix& M, const std::function<double()>& f, double h = 1e-6) {
  Matrix g(M.rows(), M.cols());
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      const double saved = M(i, j);
      M(i, j) = saved + h;
      const double up = f();
      M(i, j) = saved - h;
      const double down = f();
      M(i, j) = saved;
      g(i, j) = (up - down) / (2.0 * h);
    }
  return g;
}

/// Largest singular value squared via power iteration on M^T M.
inline double power_iteration_norm_sq(const Matrix& M, int iters = 2000) {
  if (M.size() == 0) return 0.0;
  std::mt19937_64 rng(7);
  Vector v = random_matrix(M.cols(), 1, rng);
  double lambda = 0.0;
  for (int k = 0; k < iters; ++k) {
    Vector w = M.transpose() * (M * v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    lambda = v.dot(w) / v.squaredNorm();
    v = w / norm;
  }
  return lambda;
}

/// Minimizer of 1/2 (z - x)^2 + alpha |z| by comparing the objective at every
/// stationary candidate of the three pieces (z < 0, z = 0, z > 0).
inline double l1_prox_scalar(double x, double alpha) {
  auto objective = [&](double z) { return 0.5 * (z - x) * (z - x) + alpha * std::abs(z); };
  std::vector<double> candidates{0.0};
  if (x - alpha > 0.0) candidates.push_back(x - alpha);
  if (x + alpha < 0.0) candidates.push_back(x + alpha);
  double best = candidates.front();
  for (double z : candidates)
    if (objective(z) < objective(best)) best = z;
  return best;
}

/// H by explicit membership of (row, column) pairs: row p belongs to the block
/// of class k when offset_k <= p < offset_k + block_rows[k].
inline Matrix structure_by_membership(const Labels& labels, const std::vector<int>& block_rows) {
  int s = 0;
  for (int b : block_rows) s += b;
  Matrix H(s, static_cast<Eigen::Index>(labels.size()));
  for (int p = 0; p < s; ++p)
    for (std::size_t j = 0; j < labels.size(); ++j) {
      int offset = 0, owner = -1;
      for (std::size_t k = 0; k < block_rows.size(); ++k) {
        if (p >= offset && p < offset + block_rows[k]) owner = static_cast<int>(k);
        offset += block_rows[k];
      }
      H(p, static_cast<Eigen::Index>(j)) = owner == labels[j] ? 1.0 : 0.0;
    }
  return H;
}

}  // namespace sadl::oracle
