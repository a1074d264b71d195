#include <doctest.h>

#include <random>

#include "sadl/core.hpp"

using namespace sadl;

TEST_CASE("validate_config accepts defaults and large face-recognition settings") {
  CHECK_NOTHROW(validate_config(TrainConfig{}));

  TrainConfig cfg;
  cfg.lambda1 = 0.001;
  cfg.lambda2 = 9;
  cfg.lambda3 = 3;
  cfg.lambda4 = 0.5;
  cfg.rho = 1.01;
  cfg.dict_size = 570;
  cfg.max_iter = 780;
  CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("validate_config names the failing field") {
  TrainConfig cfg;
  cfg.rho = 0.5;
  CHECK_THROWS_WITH_AS(validate_config(cfg), "rho must be >= 1", ConfigError);

  cfg = TrainConfig{};
  cfg.mu0 = 10;
  cfg.mu_max = 1;
  CHECK_THROWS_WITH_AS(validate_config(cfg), "mu0 must be <= mu_max", ConfigError);

  cfg = TrainConfig{};
  cfg.lambda3 = -1;
  CHECK_THROWS_WITH_AS(validate_config(cfg), "lambda3 must be finite and >= 0", ConfigError);

  cfg = TrainConfig{};
  cfg.dict_size = 0;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);

  cfg = TrainConfig{};
  cfg.max_iter = 0;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);

  cfg = TrainConfig{};
  cfg.step_rule.kind = StepRuleKind::fixed;
  cfg.step_rule.eta_qu = 0;
  CHECK_THROWS_WITH_AS(validate_config(cfg), "eta_qu must be finite and > 0", ConfigError);
}

TEST_CASE("plain_adl zeroes the coupling weights") {
  TrainConfig cfg;
  cfg.lambda2 = 9;
  cfg.lambda3 = 3;
  cfg.mode = TrainMode::plain_adl;
  CHECK(cfg.effective_lambda2() == 0.0);
  CHECK(cfg.effective_lambda3() == 0.0);
  cfg.mode = TrainMode::sadl;
  CHECK(cfg.effective_lambda2() == 9.0);
}

TEST_CASE("config parser") {
  const auto cfg = parse_config(
      "# scene settings\n"
      "lambda1 = 0.001\n"
      "lambda2=10\n"
      "  lambda3 = 4   # trailing comment\n"
      "lambda4 = 0.001\n"
      "max_iter = 220\n"
      "dict_size = 450\n"
      "step_rule = fixed\n"
      "eta_qu = 2.5\n"
      "mode = plain_adl\n"
      "\n");
  CHECK(cfg.lambda1 == 0.001);
  CHECK(cfg.lambda2 == 10);
  CHECK(cfg.lambda3 == 4);
  CHECK(cfg.lambda4 == 0.001);
  CHECK(cfg.max_iter == 220);
  CHECK(cfg.dict_size == 450);
  CHECK(cfg.step_rule.kind == StepRuleKind::fixed);
  CHECK(cfg.step_rule.eta_qu == 2.5);
  CHECK(cfg.mode == TrainMode::plain_adl);
  CHECK(cfg.mu0 == 0.1);
  CHECK(cfg.rho == 1.01);
  CHECK(cfg.mu_max == 1e6);
  CHECK(cfg.tol == 1e-6);

  CHECK_THROWS_AS(parse_config("lambda5 = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("lambda1 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("lambda1 = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("max_iter = 2.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("rho = 0.9\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("step_rule = adaptive\n"), ConfigError);
}

TEST_CASE("config text round-trips bit-exactly for random values") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> exponent(-300, 300);
  auto any_positive = [&] { return std::ldexp(unit(rng) + 1e-300, exponent(rng) / 4); };
  for (int trial = 0; trial < 500; ++trial) {
    TrainConfig cfg;
    cfg.lambda1 = any_positive();
    cfg.lambda2 = trial % 7 == 0 ? 0.0 : any_positive();
    cfg.lambda3 = any_positive();
    cfg.lambda4 = any_positive();
    cfg.dict_size = 1 + static_cast<int>(rng() % 5000);
    cfg.mu0 = any_positive();
    cfg.mu_max = cfg.mu0 * (1.0 + unit(rng) * 1e6);
    cfg.rho = 1.0 + unit(rng);
    cfg.max_iter = 1 + static_cast<int>(rng() % 2000);
    cfg.tol = unit(rng) * 1e-3;
    cfg.step_rule.kind = trial % 2 ? StepRuleKind::fixed : StepRuleKind::spectral;
    cfg.step_rule.eta_q = any_positive();
    cfg.step_rule.eta_wq = any_positive();
    cfg.step_rule.eta_wu = any_positive();
    cfg.step_rule.eta_qu = any_positive();
    cfg.seed = rng();
    cfg.mode = trial % 3 ? TrainMode::sadl : TrainMode::plain_adl;
    cfg.block_rows = static_cast<int>(rng() % 10);
    cfg.ridge_gamma = any_positive();
    const TrainConfig back = parse_config(format_config(cfg));
    REQUIRE(back == cfg);
  }
}

TEST_CASE("validate_dataset") {
  Dataset d;
  d.X = Matrix::Ones(2, 3);
  d.labels = {0, 1, 1};
  d.classes = 2;
  CHECK_NOTHROW(validate_dataset(d, true));

  d.classes = 3;
  CHECK_NOTHROW(validate_dataset(d, false));
  CHECK_THROWS_AS(validate_dataset(d, true), DataError);

  d.classes = 2;
  d.labels = {0, 2, 1};
  CHECK_THROWS_AS(validate_dataset(d, false), DataError);

  d.labels = {0, 1};
  CHECK_THROWS_AS(validate_dataset(d, false), DataError);

  d.labels = {0, 1, 1};
  d.X(1, 2) = std::nan("");
  CHECK_THROWS_AS(validate_dataset(d, false), DataError);
}
