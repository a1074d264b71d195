#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sadl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;

// Error categories map one-to-one onto the CLI exit codes.
enum class ErrorKind { usage = 1, data = 2, numerical = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::numerical, what) {}
};

enum class StepRuleKind { spectral, fixed };
enum class TrainMode { sadl, plain_adl };

/// Learning-rate parameters. Under the fixed rule the U, Q and W steps use
/// eta_q + eta_wq, eta_q + eta_wu and eta_qu respectively.
struct StepRule {
  StepRuleKind kind = StepRuleKind::spectral;
  double eta_q = 1.0;
  double eta_wq = 1.0;
  double eta_wu = 1.0;
  double eta_qu = 1.0;
  bool operator==(const StepRule&) const = default;
};

/// Every scalar hyperparameter of a training run.
struct TrainConfig {
  double lambda1 = 0.001;  // l1 weight on U
  double lambda2 = 1.0;    // coupling of Y1 with H - QU
  double lambda3 = 1.0;    // coupling of Y2 with L - WQU
  double lambda4 = 0.5;    // ridge weight of the Omega update
  int dict_size = 64;
  double mu0 = 0.1;
  double rho = 1.01;
  double mu_max = 1e6;
  int max_iter = 300;
  double tol = 1e-6;
  StepRule step_rule;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::sadl;
  // Rows of H per class; 0 means one row per training sample of the class.
  int block_rows = 0;
  // Ridge weight for the closed-form fits (ridge baseline, plain_adl readout).
  double ridge_gamma = 1e-3;

  double effective_lambda2() const { return mode == TrainMode::plain_adl ? 0.0 : lambda2; }
  double effective_lambda3() const { return mode == TrainMode::plain_adl ? 0.0 : lambda3; }

  bool operator==(const TrainConfig&) const = default;
};

/// Throws ConfigError naming the first field that violates its constraint.
void validate_config(const TrainConfig& cfg);

/// Flat `key = value` text; `#` starts a comment. Unknown keys are errors.
TrainConfig parse_config(std::string_view text);
TrainConfig load_config(const std::string& path);
std::string format_config(const TrainConfig& cfg);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

std::string to_string(TrainMode mode);
TrainMode parse_mode(std::string_view text);

/// Features in columns, 0-based labels.
struct Dataset {
  Matrix X;
  Labels labels;
  int classes = 0;

  Eigen::Index dim() const { return X.rows(); }
  Eigen::Index size() const { return X.cols(); }
};

/// Throws DataError on shape mismatch, non-finite values or out-of-range labels.
/// With `require_all_classes`, every class must have at least one sample.
void validate_dataset(const Dataset& data, bool require_all_classes);

std::vector<int> class_counts(const Labels& labels, int classes);

struct StructureTargets {
  Matrix H;  // s x n
  Matrix L;  // c x n
  std::vector<int> block_rows;
};

/// Learned triple sufficient for inference.
struct Model {
  Matrix Omega;  // r x m, unit rows
  Matrix Q;      // s x r
  Matrix W;      // c x s
  TrainConfig config;
  int classes = 0;

  Eigen::Index dict_size() const { return Omega.rows(); }
  Eigen::Index input_dim() const { return Omega.cols(); }
  Eigen::Index structure_dim() const { return Q.rows(); }
};

/// Throws DataError if the dimensions of Omega, Q and W do not chain.
void validate_model(const Model& model);

struct TrainState {
  Matrix U;
  Matrix Y1;
  Matrix Y2;
  double mu = 0.0;
  int iter = 0;
  std::vector<double> objective_trace;
  std::vector<double> residual_H_trace;
  std::vector<double> residual_L_trace;
  std::vector<double> mu_trace;
  double train_seconds = 0.0;
};

}  // namespace sadl
