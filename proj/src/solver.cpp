#include "sadl/solver.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>

#include <Eigen/Eigenvalues>

namespace sadl {

namespace {

bool structured(const TrainConfig& cfg) { return cfg.mode == TrainMode::sadl; }

std::string shape(const Matrix& M) {
  return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

void expect_shape(const Matrix& M, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (M.rows() != rows || M.cols() != cols)
    throw DataError(std::string("dimension mismatch: ") + name + " is " + shape(M) +
                    ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
}

// Least-squares readout used in plain_adl mode, where Q and W are not learned
// by the alternating updates: Q maps codes to H, W maps structured codes to L.
Matrix ridge_fit(const Matrix& target, const Matrix& inputs, double gamma) {
  Matrix gram = inputs * inputs.transpose();
  gram.diagonal().array() += std::max(gamma, 1e-12);
  Eigen::LDLT<Matrix> ldlt(gram);
  return ldlt.solve(inputs * target.transpose()).transpose();
}

// |A B|_2^2 without forming the Gram matrix of A B when the inner dimension is
// the smallest: with A^T A = V D V^T, |A B| = |D^1/2 V^T B|.
double spectral_norm_sq_product(const Matrix& A, const Matrix& B) {
  if (std::min(A.rows(), B.cols()) <= A.cols()) return spectral_norm_sq(A * B);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A.transpose() * A);
  const Vector scale = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return spectral_norm_sq(scale.asDiagonal() * (eig.eigenvectors().transpose() * B));
}

}  // namespace

void check_dimensions(const Variables& v, const ProblemView& p) {
  const Eigen::Index m = p.X.rows(), n = p.X.cols();
  const Eigen::Index s = p.H.rows(), c = p.L.rows();
  const Eigen::Index r = v.Omega.rows();
  expect_shape(p.H, s, n, "H");
  expect_shape(p.L, c, n, "L");
  expect_shape(v.Omega, r, m, "Omega");
  expect_shape(v.U, r, n, "U");
  expect_shape(v.Q, s, r, "Q");
  expect_shape(v.W, c, s, "W");
  expect_shape(v.Y1, s, n, "Y1");
  expect_shape(v.Y2, c, n, "Y2");
}

Matrix soft_threshold(const Matrix& M, double alpha) {
  return M.unaryExpr([alpha](double x) {
    const double mag = std::abs(x) - alpha;
    if (mag <= 0.0) return 0.0;
    return x < 0.0 ? -mag : mag;
  });
}

double smooth_lagrangian(const Variables& v, const ProblemView& p, const TrainConfig& cfg) {
  check_dimensions(v, p);
  double value = 0.5 * (v.U - v.Omega * p.X).squaredNorm();
  if (!structured(cfg)) return value;
  const Matrix QU = v.Q * v.U;
  const Matrix RH = p.H - QU;
  const Matrix RL = p.L - v.W * QU;
  value += cfg.lambda2 * v.Y1.cwiseProduct(RH).sum();
  value += cfg.lambda3 * v.Y2.cwiseProduct(RL).sum();
  value += 0.5 * v.mu * (RH.squaredNorm() + RL.squaredNorm());
  return value;
}

double lagrangian(const Variables& v, const ProblemView& p, const TrainConfig& cfg) {
  return smooth_lagrangian(v, p, cfg) + cfg.lambda1 * v.U.lpNorm<1>();
}

Matrix grad_U(const Variables& v, const ProblemView& p, const TrainConfig& cfg) {
  check_dimensions(v, p);
  Matrix g = v.U - v.Omega * p.X;
  if (!structured(cfg)) return g;
  const Matrix QU = v.Q * v.U;
  const Matrix WQ = v.W * v.Q;
  g.noalias() -= v.Q.transpose() * (cfg.lambda2 * v.Y1 + v.mu * (p.H - QU));
  g.noalias() -= WQ.transpose() * (cfg.lambda3 * v.Y2 + v.mu * (p.L - v.W * QU));
  return g;
}

Matrix grad_Q(const Variables& v, const ProblemView& p, const TrainConfig& cfg) {
  check_dimensions(v, p);
  if (!structured(cfg)) return Matrix::Zero(v.Q.rows(), v.Q.cols());
  const Matrix QU = v.Q * v.U;
  const Matrix A = cfg.lambda2 * v.Y1 + v.mu * (p.H - QU);
  const Matrix B = cfg.lambda3 * v.Y2 + v.mu * (p.L - v.W * QU);
  return -(A + v.W.transpose() * B) * v.U.transpose();
}

Matrix grad_W(const Variables& v, const ProblemView& p, const TrainConfig& cfg) {
  check_dimensions(v, p);
  if (!structured(cfg)) return Matrix::Zero(v.W.rows(), v.W.cols());
  const Matrix QU = v.Q * v.U;
  const Matrix B = cfg.lambda3 * v.Y2 + v.mu * (p.L - v.W * QU);
  return -B * QU.transpose();
}

OmegaSolver::OmegaSolver(const Matrix& X, double lambda4) : X_(X) {
  Matrix gram = X * X.transpose();
  gram.diagonal().array() += lambda4;
  llt_.compute(gram);
  if (llt_.info() != Eigen::Success || !(llt_.rcond() > 1e-14))
    throw NumericalError("X X^T + lambda4 I is singular; use lambda4 > 0");
}

Matrix OmegaSolver::solve(const Matrix& U) const {
  if (U.cols() != X_.cols())
    throw DataError("dimension mismatch: U has " + std::to_string(U.cols()) +
                    " columns, X has " + std::to_string(X_.cols()));
  // Omega (X X^T + lambda4 I) = U X^T, solved for Omega^T.
  return llt_.solve(X_ * U.transpose()).transpose();
}

Matrix update_omega(const Matrix& U, const Matrix& X, double lambda4) {
  return OmegaSolver(X, lambda4).solve(U);
}

Matrix gaussian_init(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(cols)));
  Matrix M(rows, cols);
  // Row-major draw order so a single row can be redrawn the same way.
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = dist(rng);
  return M;
}

Matrix normalize_rows(Matrix Omega, Rng& rng) {
  for (Eigen::Index i = 0; i < Omega.rows(); ++i) {
    double norm = Omega.row(i).norm();
    while (!(norm > 0.0) || !std::isfinite(norm)) {
      Omega.row(i) = gaussian_init(1, Omega.cols(), rng);
      norm = Omega.row(i).norm();
    }
    Omega.row(i) /= norm;
  }
  return Omega;
}

DualUpdate dual_and_penalty_update(const Variables& v, const ProblemView& p,
                                   const TrainConfig& cfg) {
  check_dimensions(v, p);
  const Matrix QU = v.Q * v.U;
  DualUpdate out;
  out.Y1 = v.Y1 + v.mu * (p.H - QU);
  out.Y2 = v.Y2 + v.mu * (p.L - v.W * QU);
  out.mu = std::min(cfg.rho * v.mu, cfg.mu_max);
  return out;
}

double spectral_norm_sq(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  const Matrix gram = M.rows() <= M.cols() ? Matrix(M * M.transpose())
                                           : Matrix(M.transpose() * M);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  return std::max(eig.eigenvalues().maxCoeff(), 0.0);
}

double step_size_U(const Matrix& Q, const Matrix& W, double mu, const TrainConfig& cfg) {
  const auto& rule = cfg.step_rule;
  if (rule.kind == StepRuleKind::fixed) return std::max(rule.eta_q + rule.eta_wq, kMinStepSize);
  double eta = 1.0 / mu;
  if (structured(cfg)) eta += spectral_norm_sq(Q) + spectral_norm_sq(W * Q);
  return std::max(eta, kMinStepSize);
}

double step_size_Q(const Matrix& U, const Matrix& W, const TrainConfig& cfg) {
  const auto& rule = cfg.step_rule;
  if (rule.kind == StepRuleKind::fixed) return std::max(rule.eta_q + rule.eta_wu, kMinStepSize);
  return std::max(spectral_norm_sq(U) * (1.0 + spectral_norm_sq(W)), kMinStepSize);
}

double step_size_W(const Matrix& Q, const Matrix& U, const TrainConfig& cfg) {
  const auto& rule = cfg.step_rule;
  if (rule.kind == StepRuleKind::fixed) return std::max(rule.eta_qu, kMinStepSize);
  return std::max(spectral_norm_sq_product(Q, U), kMinStepSize);
}

StepSizes compute_step_sizes(const Matrix& U, const Matrix& Q, const Matrix& W, double mu,
                             const TrainConfig& cfg) {
  return {step_size_U(Q, W, mu, cfg), step_size_Q(U, W, cfg), step_size_W(Q, U, cfg)};
}

Matrix update_U(const Variables& v, const ProblemView& p, const TrainConfig& cfg) {
  const double step = 1.0 / (v.mu * step_size_U(v.Q, v.W, v.mu, cfg));
  return soft_threshold(v.U - step * grad_U(v, p, cfg), cfg.lambda1 * step);
}

Matrix update_Q(const Variables& v, const ProblemView& p, const TrainConfig& cfg) {
  const double step = 1.0 / (v.mu * step_size_Q(v.U, v.W, cfg));
  return v.Q - step * grad_Q(v, p, cfg);
}

Matrix update_W(const Variables& v, const ProblemView& p, const TrainConfig& cfg) {
  const double step = 1.0 / (v.mu * step_size_W(v.Q, v.U, cfg));
  return v.W - step * grad_W(v, p, cfg);
}

TrainResult train(const Dataset& data, const StructureTargets& targets, const TrainConfig& cfg,
                  const IterationObserver& observer) {
  validate_config(cfg);
  validate_dataset(data, true);
  const Eigen::Index m = data.X.rows(), n = data.X.cols();
  const Eigen::Index r = cfg.dict_size;
  const Eigen::Index s = targets.H.rows(), c = data.classes;
  if (targets.H.cols() != n || targets.L.cols() != n || targets.L.rows() != c)
    throw DataError("structure targets do not match the dataset");

  const auto start = std::chrono::steady_clock::now();
  const ProblemView problem{data.X, targets.H, targets.L};

  Rng rng(cfg.seed);
  Variables v;
  v.Omega = gaussian_init(r, m, rng);
  v.Q = gaussian_init(s, r, rng);
  v.W = gaussian_init(c, s, rng);
  v.Omega = normalize_rows(std::move(v.Omega), rng);
  v.U = Matrix::Zero(r, n);
  v.Y1 = Matrix::Zero(s, n);
  v.Y2 = Matrix::Zero(c, n);
  v.mu = cfg.mu0;

  const OmegaSolver omega_solver(data.X, cfg.lambda4);
  const bool full = structured(cfg);

  TrainState state;
  double previous = 0.0;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const double mu_k = v.mu;

    v.U = update_U(v, problem, cfg);
    if (full) {
      v.Q = update_Q(v, problem, cfg);
      v.W = update_W(v, problem, cfg);
    }

    v.Omega = normalize_rows(omega_solver.solve(v.U), rng);

    if (full) {
      auto dual = dual_and_penalty_update(v, problem, cfg);
      v.Y1 = std::move(dual.Y1);
      v.Y2 = std::move(dual.Y2);
      v.mu = dual.mu;
    } else {
      v.mu = std::min(cfg.rho * v.mu, cfg.mu_max);
    }

    const double objective = lagrangian(v, problem, cfg);
    const Matrix QU = v.Q * v.U;
    const double res_H = (targets.H - QU).norm();
    const double res_L = (targets.L - v.W * QU).norm();
    if (!std::isfinite(objective))
      throw NumericalError("objective became non-finite at iteration " + std::to_string(k));

    state.objective_trace.push_back(objective);
    state.residual_H_trace.push_back(res_H);
    state.residual_L_trace.push_back(res_L);
    state.mu_trace.push_back(mu_k);
    state.iter = k;

    if (observer) observer({k, objective, res_H, res_L, mu_k, &v});

    if (k > 1 && std::abs(objective - previous) / std::max(1.0, std::abs(previous)) < cfg.tol)
      break;
    previous = objective;
  }

  if (!full) {
    const Matrix codes = v.Omega * data.X;
    v.Q = ridge_fit(targets.H, codes, cfg.ridge_gamma);
    v.W = ridge_fit(targets.L, v.Q * codes, cfg.ridge_gamma);
  }

  state.mu = v.mu;
  state.U = std::move(v.U);
  state.Y1 = std::move(v.Y1);
  state.Y2 = std::move(v.Y2);
  state.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  TrainResult result;
  result.model.Omega = std::move(v.Omega);
  result.model.Q = std::move(v.Q);
  result.model.W = std::move(v.W);
  result.model.config = cfg;
  result.model.classes = static_cast<int>(c);
  result.state = std::move(state);
  return result;
}

void write_trace_csv(const TrainState& state, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "iteration,objective,primal_residual_H,primal_residual_L,mu\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < state.objective_trace.size(); ++i)
    out << i + 1 << ',' << state.objective_trace[i] << ',' << state.residual_H_trace[i] << ','
        << state.residual_L_trace[i] << ',' << state.mu_trace[i] << '\n';
}

}  // namespace sadl
