#pragma once

#include <limits>
#include <string>
#include <vector>

#include "sadl/core.hpp"

namespace sadl {

struct EvalReport {
  double accuracy = 0.0;
  Eigen::MatrixXi confusion;  // rows: true class, columns: predicted class
  double train_seconds = std::numeric_limits<double>::quiet_NaN();  // NaN: unknown
  double test_seconds_per_sample = 0.0;
  int n_test = 0;
  std::vector<double> rep_seconds_per_sample;  // one entry per timing repetition
};

/// u = Omega x. No optimization happens at test time.
Vector encode(const Model& model, const Vector& x);

/// Index of the largest score; ties go to the lowest index.
int argmax(const Vector& scores);

/// argmax of W (Q (Omega x)), evaluated as three matrix-vector products.
int predict(const Model& model, const Vector& x);

/// S = W Q Omega, a c x m matrix with argmax(S x) == predict(model, x).
Matrix precompute_scorer(const Model& model);

int predict_with_scorer(const Matrix& scorer, const Vector& x);

/// Labels for every column of X using the precomputed scorer.
Labels predict_all(const Matrix& scorer, const Matrix& X);

/// Accuracy and confusion over `test`; the per-sample time is the median over
/// `timing_reps` runs of the precomputed-scorer loop divided by n_test.
EvalReport evaluate(const Model& model, const Dataset& test, int timing_reps);

/// Ridge baseline W_r = L X^T (X X^T + gamma I)^-1, packed as a Model with
/// Omega = Q = I so the regular inference path applies.
Model train_ridge(const Dataset& train, double gamma);

/// Accuracy / training time / testing time table followed by the confusion matrix.
std::string format_report(const EvalReport& report, const std::string& method);

/// Header plus one row: method,accuracy,train_s,test_s_per_sample,n_test.
std::string report_csv(const EvalReport& report, const std::string& method);

}  // namespace sadl
