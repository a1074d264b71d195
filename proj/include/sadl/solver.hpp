#pragma once

#include <functional>
#include <random>

#include <Eigen/Cholesky>

#include "sadl/core.hpp"

namespace sadl {

/// Seeded 64-bit Mersenne Twister (std::mt19937_64) drives every random draw.
using Rng = std::mt19937_64;

/// The optimization variables of the augmented Lagrangian.
struct Variables {
  Matrix Omega;  // r x m
  Matrix U;      // r x n
  Matrix Q;      // s x r
  Matrix W;      // c x s
  Matrix Y1;     // s x n
  Matrix Y2;     // c x n
  double mu = 0.0;
};

/// Non-owning view of the fixed data of a training run.
struct ProblemView {
  const Matrix& X;  // m x n
  const Matrix& H;  // s x n
  const Matrix& L;  // c x n
};

/// Denominator factors of the U, Q and W updates; each step divides by mu times
/// the factor.
struct StepSizes {
  double eta_U = 1.0;
  double eta_Q = 1.0;
  double eta_W = 1.0;
};

inline constexpr double kMinStepSize = 1e-8;

/// Throws DataError unless all shapes of `vars` agree with `problem`.
void check_dimensions(const Variables& vars, const ProblemView& problem);

/// Elementwise sign(x) * max(|x| - alpha, 0).
Matrix soft_threshold(const Matrix& M, double alpha);

/// Augmented Lagrangian
///   1/2 |U - Omega X|^2 + lambda1 |U|_1 + lambda2 <Y1, H - QU> + lambda3 <Y2, L - WQU>
///   + mu/2 |H - QU|^2 + mu/2 |L - WQU|^2
/// with Frobenius norms. In plain_adl mode only the first two terms remain.
double lagrangian(const Variables& vars, const ProblemView& problem, const TrainConfig& cfg);

/// lagrangian() without the l1 term; the part handled by gradient steps.
double smooth_lagrangian(const Variables& vars, const ProblemView& problem,
                         const TrainConfig& cfg);

// Gradients of smooth_lagrangian().
Matrix grad_U(const Variables& vars, const ProblemView& problem, const TrainConfig& cfg);
Matrix grad_Q(const Variables& vars, const ProblemView& problem, const TrainConfig& cfg);
Matrix grad_W(const Variables& vars, const ProblemView& problem, const TrainConfig& cfg);

/// Minimizer of |U - Omega X|_F^2 + lambda4 |Omega|_F^2. The Cholesky factor of
/// X X^T + lambda4 I is computed once, so each solve() is a back-substitution.
class OmegaSolver {
 public:
  OmegaSolver(const Matrix& X, double lambda4);
  Matrix solve(const Matrix& U) const;

 private:
  Matrix X_;
  Eigen::LLT<Matrix> llt_;
};

Matrix update_omega(const Matrix& U, const Matrix& X, double lambda4);

/// i.i.d. N(0, 1/cols) entries.
Matrix gaussian_init(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Scales every row to unit l2 norm. A zero row is replaced by a fresh
/// gaussian_init() row before normalizing.
Matrix normalize_rows(Matrix Omega, Rng& rng);

struct DualUpdate {
  Matrix Y1;
  Matrix Y2;
  double mu = 0.0;
};

/// Y1 + mu (H - QU), Y2 + mu (L - WQU), min(rho mu, mu_max).
DualUpdate dual_and_penalty_update(const Variables& vars, const ProblemView& problem,
                                   const TrainConfig& cfg);

/// Squared spectral norm, i.e. the largest eigenvalue of the smaller Gram matrix.
double spectral_norm_sq(const Matrix& M);

// Per-block step factors. Under the spectral rule each equals the block's
// Lipschitz constant divided by mu, so a step of 1 / (mu * eta) never overshoots.
double step_size_U(const Matrix& Q, const Matrix& W, double mu, const TrainConfig& cfg);
double step_size_Q(const Matrix& U, const Matrix& W, const TrainConfig& cfg);
double step_size_W(const Matrix& Q, const Matrix& U, const TrainConfig& cfg);

StepSizes compute_step_sizes(const Matrix& U, const Matrix& Q, const Matrix& W, double mu,
                             const TrainConfig& cfg);

// One linearized block update each, taken at the current `vars`.
/// Proximal gradient step on U with threshold lambda1 / (mu eta_U).
Matrix update_U(const Variables& vars, const ProblemView& problem, const TrainConfig& cfg);
Matrix update_Q(const Variables& vars, const ProblemView& problem, const TrainConfig& cfg);
Matrix update_W(const Variables& vars, const ProblemView& problem, const TrainConfig& cfg);

struct IterationInfo {
  int iter = 0;  // 1-based
  double objective = 0.0;
  double residual_H = 0.0;
  double residual_L = 0.0;
  double mu = 0.0;  // penalty used during this iteration
  const Variables* vars = nullptr;
};

using IterationObserver = std::function<void(const IterationInfo&)>;

struct TrainResult {
  Model model;
  TrainState state;
};

/// Alternating linearized updates of U, Q, W, Omega, the duals and mu, until the
/// relative objective change drops below cfg.tol or cfg.max_iter is reached.
/// Throws NumericalError if the objective becomes non-finite.
TrainResult train(const Dataset& data, const StructureTargets& targets,
                  const TrainConfig& cfg, const IterationObserver& observer = {});

/// Writes `iteration,objective,primal_residual_H,primal_residual_L,mu` rows.
void write_trace_csv(const TrainState& state, const std::string& path);

}  // namespace sadl
