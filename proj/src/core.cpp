#include "sadl/core.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sadl {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size())
    throw ConfigError("config key '" + std::string(key) + "': not a number: '" +
                      std::string(value) + "'");
  return out;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view value) {
  Int out = 0;
  auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size())
    throw ConfigError("config key '" + std::string(key) + "': not an integer: '" +
                      std::string(value) + "'");
  return out;
}

}  // namespace

std::string to_string(TrainMode mode) {
  return mode == TrainMode::sadl ? "sadl" : "plain_adl";
}

TrainMode parse_mode(std::string_view text) {
  if (text == "sadl") return TrainMode::sadl;
  if (text == "plain_adl") return TrainMode::plain_adl;
  throw ConfigError("unknown mode '" + std::string(text) + "'");
}

void validate_config(const TrainConfig& cfg) {
  auto check = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  check(finite_nonneg(cfg.lambda1), "lambda1 must be finite and >= 0");
  check(finite_nonneg(cfg.lambda2), "lambda2 must be finite and >= 0");
  check(finite_nonneg(cfg.lambda3), "lambda3 must be finite and >= 0");
  check(finite_nonneg(cfg.lambda4), "lambda4 must be finite and >= 0");
  check(cfg.dict_size >= 1, "dict_size must be >= 1");
  check(std::isfinite(cfg.mu0) && cfg.mu0 > 0.0, "mu0 must be finite and > 0");
  check(std::isfinite(cfg.rho) && cfg.rho >= 1.0, "rho must be >= 1");
  check(std::isfinite(cfg.mu_max) && cfg.mu_max > 0.0, "mu_max must be finite and > 0");
  check(cfg.mu0 <= cfg.mu_max, "mu0 must be <= mu_max");
  check(cfg.max_iter >= 1, "max_iter must be >= 1");
  check(finite_nonneg(cfg.tol), "tol must be finite and >= 0");
  if (cfg.step_rule.kind == StepRuleKind::fixed) {
    const auto& s = cfg.step_rule;
    auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
    check(pos(s.eta_q), "eta_q must be finite and > 0");
    check(pos(s.eta_wq), "eta_wq must be finite and > 0");
    check(pos(s.eta_wu), "eta_wu must be finite and > 0");
    check(pos(s.eta_qu), "eta_qu must be finite and > 0");
  }
  check(cfg.block_rows >= 0, "block_rows must be >= 0");
  check(finite_nonneg(cfg.ridge_gamma), "ridge_gamma must be finite and >= 0");
}

TrainConfig parse_config(std::string_view text) {
  TrainConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));

    if (key == "lambda1") cfg.lambda1 = parse_double(key, value);
    else if (key == "lambda2") cfg.lambda2 = parse_double(key, value);
    else if (key == "lambda3") cfg.lambda3 = parse_double(key, value);
    else if (key == "lambda4") cfg.lambda4 = parse_double(key, value);
    else if (key == "dict_size") cfg.dict_size = parse_int<int>(key, value);
    else if (key == "mu0") cfg.mu0 = parse_double(key, value);
    else if (key == "rho") cfg.rho = parse_double(key, value);
    else if (key == "mu_max") cfg.mu_max = parse_double(key, value);
    else if (key == "max_iter") cfg.max_iter = parse_int<int>(key, value);
    else if (key == "tol") cfg.tol = parse_double(key, value);
    else if (key == "step_rule") {
      if (value == "spectral") cfg.step_rule.kind = StepRuleKind::spectral;
      else if (value == "fixed") cfg.step_rule.kind = StepRuleKind::fixed;
      else throw ConfigError("config key 'step_rule': expected spectral or fixed");
    }
    else if (key == "eta_q") cfg.step_rule.eta_q = parse_double(key, value);
    else if (key == "eta_wq") cfg.step_rule.eta_wq = parse_double(key, value);
    else if (key == "eta_wu") cfg.step_rule.eta_wu = parse_double(key, value);
    else if (key == "eta_qu") cfg.step_rule.eta_qu = parse_double(key, value);
    else if (key == "seed") cfg.seed = parse_int<std::uint64_t>(key, value);
    else if (key == "mode") cfg.mode = parse_mode(value);
    else if (key == "block_rows") cfg.block_rows = parse_int<int>(key, value);
    else if (key == "ridge_gamma") cfg.ridge_gamma = parse_double(key, value);
    else
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" +
                        std::string(key) + "'");
  }
  validate_config(cfg);
  return cfg;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("file not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const TrainConfig& cfg) {
  std::ostringstream out;
  out << "lambda1 = " << format_double(cfg.lambda1) << '\n'
      << "lambda2 = " << format_double(cfg.lambda2) << '\n'
      << "lambda3 = " << format_double(cfg.lambda3) << '\n'
      << "lambda4 = " << format_double(cfg.lambda4) << '\n'
      << "dict_size = " << cfg.dict_size << '\n'
      << "mu0 = " << format_double(cfg.mu0) << '\n'
      << "rho = " << format_double(cfg.rho) << '\n'
      << "mu_max = " << format_double(cfg.mu_max) << '\n'
      << "max_iter = " << cfg.max_iter << '\n'
      << "tol = " << format_double(cfg.tol) << '\n'
      << "step_rule = "
      << (cfg.step_rule.kind == StepRuleKind::spectral ? "spectral" : "fixed") << '\n'
      << "eta_q = " << format_double(cfg.step_rule.eta_q) << '\n'
      << "eta_wq = " << format_double(cfg.step_rule.eta_wq) << '\n'
      << "eta_wu = " << format_double(cfg.step_rule.eta_wu) << '\n'
      << "eta_qu = " << format_double(cfg.step_rule.eta_qu) << '\n'
      << "seed = " << cfg.seed << '\n'
      << "mode = " << to_string(cfg.mode) << '\n'
      << "block_rows = " << cfg.block_rows << '\n'
      << "ridge_gamma = " << format_double(cfg.ridge_gamma) << '\n';
  return out.str();
}

std::vector<int> class_counts(const Labels& labels, int classes) {
  std::vector<int> counts(static_cast<std::size_t>(std::max(classes, 0)), 0);
  for (int l : labels) {
    if (l < 0 || l >= classes)
      throw DataError("label out of range: " + std::to_string(l) + " (classes = " +
                      std::to_string(classes) + ")");
    ++counts[static_cast<std::size_t>(l)];
  }
  return counts;
}

void validate_dataset(const Dataset& data, bool require_all_classes) {
  if (data.classes < 1) throw DataError("class count must be >= 1");
  if (static_cast<Eigen::Index>(data.labels.size()) != data.X.cols())
    throw DataError("dim mismatch: " + std::to_string(data.labels.size()) + " labels for " +
                    std::to_string(data.X.cols()) + " samples");
  if (!data.X.allFinite()) throw DataError("dataset contains NaN or Inf entries");
  const auto counts = class_counts(data.labels, data.classes);
  if (require_all_classes) {
    for (std::size_t i = 0; i < counts.size(); ++i)
      if (counts[i] == 0) throw DataError("class " + std::to_string(i) + " has no samples");
  }
}

void validate_model(const Model& model) {
  if (model.Q.cols() != model.Omega.rows() || model.W.cols() != model.Q.rows() ||
      model.W.rows() != model.classes || model.classes < 1)
    throw DataError("model dimensions are inconsistent");
}

}  // namespace sadl
