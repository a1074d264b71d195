#include <doctest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "sadl/model_io.hpp"
#include "sadl/solver.hpp"

using namespace sadl;

namespace {

std::string tmp(const std::string& name) { return std::string(SADL_TEST_TMPDIR) + "/" + name; }

Model random_model(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Rng g(seed);
  Model model;
  model.Omega = normalize_rows(oracle::random_matrix(5, 7, rng), g);
  model.Q = oracle::random_matrix(9, 5, rng);
  model.W = oracle::random_matrix(3, 9, rng);
  model.classes = 3;
  model.config.lambda2 = 9;
  model.config.seed = seed;
  model.config.dict_size = 5;
  return model;
}

template <typename T>
T read_at(const std::string& bytes, std::size_t offset) {
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  return v;
}

}  // namespace

TEST_CASE("model container layout") {
  const Model model = random_model(1);
  const std::string bytes = serialize_model(model);
  CHECK(bytes.substr(0, 4) == "SADL");
  CHECK(read_at<std::uint32_t>(bytes, 4) == kModelFormatVersion);
  CHECK(read_at<std::uint32_t>(bytes, 8) == 5);    // r
  CHECK(read_at<std::uint32_t>(bytes, 12) == 7);   // m
  CHECK(read_at<std::uint32_t>(bytes, 16) == 9);   // s
  CHECK(read_at<std::uint32_t>(bytes, 20) == 3);   // c
  CHECK(read_at<double>(bytes, 24) == model.Omega(0, 0));
  CHECK(read_at<double>(bytes, 32) == model.Omega(0, 1));  // row-major
  const std::size_t q_offset = 24 + 8 * 35;
  CHECK(read_at<double>(bytes, q_offset) == model.Q(0, 0));
  const std::size_t cfg_offset = q_offset + 8 * 45 + 8 * 27;
  const auto length = read_at<std::uint32_t>(bytes, cfg_offset);
  CHECK(bytes.size() == cfg_offset + 4 + length);
  CHECK(bytes.substr(cfg_offset + 4) == format_config(model.config));
}

TEST_CASE("model round trip is bitwise") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Model model = random_model(seed);
    save_model(model, tmp("m.sadl"));
    const Model back = load_model(tmp("m.sadl"));
    CHECK(serialize_model(back) == serialize_model(model));
    CHECK(back.config == model.config);
    CHECK(std::memcmp(back.W.data(), model.W.data(), sizeof(double) * model.W.size()) == 0);
    for (Eigen::Index i = 0; i < back.Omega.rows(); ++i)
      CHECK(std::abs(back.Omega.row(i).norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("corrupt model files are rejected") {
  const std::string good = serialize_model(random_model(3));
  CHECK_THROWS_AS(deserialize_model("SADX" + good.substr(4)), DataError);
  CHECK_THROWS_AS(deserialize_model(good.substr(0, good.size() - 3)), DataError);
  CHECK_THROWS_AS(deserialize_model(good + "x"), DataError);
  CHECK_THROWS_AS(deserialize_model(good.substr(0, 10)), DataError);

  // Break the unit-norm invariant of the first dictionary row.
  std::string scaled = good;
  const double doubled = 2.0 * read_at<double>(good, 24);
  std::memcpy(scaled.data() + 24, &doubled, sizeof(double));
  CHECK_THROWS_WITH_AS(deserialize_model(scaled), doctest::Contains("unit norm"), DataError);

  CHECK_THROWS_AS(load_model(tmp("missing.sadl")), DataError);
  Model inconsistent = random_model(4);
  inconsistent.W = Matrix::Zero(3, 4);
  CHECK_THROWS_AS(serialize_model(inconsistent), DataError);
}
