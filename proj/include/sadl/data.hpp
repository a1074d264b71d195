#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "sadl/core.hpp"

namespace sadl {

/// Class-wise random subspace model used for desk-scale experiments.
struct SynthSpec {
  int classes = 4;
  int subspace_dim = 5;
  int ambient_dim = 32;
  int per_class_train = 40;
  int per_class_test = 20;
  double noise_sigma = 0.05;
  // Mean of every in-subspace coordinate. At 0 each class distribution is
  // symmetric under x -> -x, which no linear argmax classifier can separate.
  double code_mean = 0.0;
  std::uint64_t seed = 0;
};

void validate_synth_spec(const SynthSpec& spec);

/// Text format:
///   SADL-DS m n c
///   <n labels>
///   <n lines of m values, line j = column j of X>
/// Values are written in shortest round-trip form, so load(save(d)) == d bitwise.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& data, const std::string& path);

/// Binary twin: "SADS", u32 version, u32 m, n, c, n x u32 labels, then X
/// column by column as little-endian float64.
Dataset load_dataset_binary(const std::string& path);
void save_dataset_binary(const Dataset& data, const std::string& path);

/// Picks the text or binary reader from the file's leading bytes.
Dataset read_dataset(const std::string& path);

struct Split {
  Dataset train;
  Dataset test;
};

/// Stratified split with round(fraction * n) training samples overall, spread
/// over classes by largest remainder. Every class must keep a training sample.
Split split_fraction(const Dataset& data, double train_fraction, std::uint64_t seed);

/// Stratified split keeping exactly `per_class` samples of every class for training.
Split split_per_class(const Dataset& data, int per_class, std::uint64_t seed);

/// Each class spans a random d-dimensional subspace of R^m (orthonormal basis via
/// QR of a Gaussian matrix); a sample is basis * z + sigma * noise with
/// z ~ N(code_mean, I_d), then scaled to unit norm.
Split generate_synthetic(const SynthSpec& spec);

}  // namespace sadl
