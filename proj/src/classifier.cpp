#include "sadl/classifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sadl/structure.hpp"

namespace sadl {

namespace {

void expect_input_dim(const Model& model, Eigen::Index m) {
  if (model.Omega.cols() != m)
    throw DataError("dimension mismatch: model expects " + std::to_string(model.Omega.cols()) +
                    " features, got " + std::to_string(m));
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size() / 2;
  return values.size() % 2 ? values[k] : 0.5 * (values[k - 1] + values[k]);
}

}  // namespace

Vector encode(const Model& model, const Vector& x) {
  expect_input_dim(model, x.size());
  return model.Omega * x;
}

int argmax(const Vector& scores) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return static_cast<int>(best);
}

int predict(const Model& model, const Vector& x) {
  const Vector u = encode(model, x);
  const Vector h = model.Q * u;
  return argmax(model.W * h);
}

Matrix precompute_scorer(const Model& model) {
  validate_model(model);
  return model.W * (model.Q * model.Omega);
}

int predict_with_scorer(const Matrix& scorer, const Vector& x) {
  if (scorer.cols() != x.size()) throw DataError("dimension mismatch between scorer and sample");
  return argmax(scorer * x);
}

Labels predict_all(const Matrix& scorer, const Matrix& X) {
  if (scorer.cols() != X.rows()) throw DataError("dimension mismatch between scorer and data");
  Labels out(static_cast<std::size_t>(X.cols()));
  Vector scores(scorer.rows());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    scores.noalias() = scorer * X.col(j);
    out[static_cast<std::size_t>(j)] = argmax(scores);
  }
  return out;
}

EvalReport evaluate(const Model& model, const Dataset& test, int timing_reps) {
  if (test.X.cols() == 0) throw DataError("test set is empty");
  if (timing_reps < 1) throw ConfigError("timing repetitions must be >= 1");
  expect_input_dim(model, test.X.rows());
  for (int l : test.labels)
    if (l < 0 || l >= model.classes)
      throw DataError("test label " + std::to_string(l) + " exceeds the model's " +
                      std::to_string(model.classes) + " classes");

  const Matrix scorer = precompute_scorer(model);
  Labels predicted;
  EvalReport report;
  for (int rep = 0; rep < timing_reps; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    predicted = predict_all(scorer, test.X);
    const auto t1 = std::chrono::steady_clock::now();
    report.rep_seconds_per_sample.push_back(std::chrono::duration<double>(t1 - t0).count() /
                                            static_cast<double>(test.X.cols()));
  }

  report.n_test = static_cast<int>(test.X.cols());
  report.confusion = Eigen::MatrixXi::Zero(model.classes, model.classes);
  for (std::size_t j = 0; j < predicted.size(); ++j)
    ++report.confusion(test.labels[j], predicted[j]);
  report.accuracy = static_cast<double>(report.confusion.trace()) / report.n_test;
  report.test_seconds_per_sample = median(report.rep_seconds_per_sample);
  return report;
}

Model train_ridge(const Dataset& train, double gamma) {
  validate_dataset(train, true);
  const Eigen::Index m = train.X.rows();
  const Matrix L = build_label_matrix(train.labels, train.classes);
  Matrix gram = train.X * train.X.transpose();
  gram.diagonal().array() += gamma;
  Eigen::LDLT<Matrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("ridge system is singular; use a positive gamma");

  Model model;
  model.Omega = Matrix::Identity(m, m);
  model.Q = Matrix::Identity(m, m);
  model.W = ldlt.solve(train.X * L.transpose()).transpose();
  model.classes = train.classes;
  model.config.dict_size = static_cast<int>(m);
  model.config.ridge_gamma = gamma;
  if (!model.W.allFinite()) throw NumericalError("ridge solution is not finite");
  return model;
}

std::string format_report(const EvalReport& report, const std::string& method) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-12s | %-12s | %-12s | %-12s\n", "Method", "Accuracy (%)",
                "Training (s)", "Testing (s)");
  out << line << std::string(57, '-') << '\n';
  char train[32] = "-";
  if (std::isfinite(report.train_seconds))
    std::snprintf(train, sizeof(train), "%.3g", report.train_seconds);
  std::snprintf(line, sizeof(line), "%-12s | %12.2f | %12s | %12.3e\n", method.c_str(),
                100.0 * report.accuracy, train, report.test_seconds_per_sample);
  out << line;
  std::snprintf(line, sizeof(line), "Accuracy %.2f%% on %d test samples\n", 100.0 * report.accuracy,
                report.n_test);
  out << line << "Confusion (rows = true class, columns = predicted):\n";
  for (Eigen::Index i = 0; i < report.confusion.rows(); ++i) {
    for (Eigen::Index j = 0; j < report.confusion.cols(); ++j)
      out << (j ? " " : "  ") << report.confusion(i, j);
    out << '\n';
  }
  return out.str();
}

std::string report_csv(const EvalReport& report, const std::string& method) {
  // An unknown training time is left as an empty field.
  const std::string train =
      std::isfinite(report.train_seconds) ? format_double(report.train_seconds) : std::string();
  return "method,accuracy,train_s,test_s_per_sample,n_test\n" + method + ',' +
         format_double(report.accuracy) + ',' + train + ',' +
         format_double(report.test_seconds_per_sample) + ',' + std::to_string(report.n_test) +
         '\n';
}

}  // namespace sadl
