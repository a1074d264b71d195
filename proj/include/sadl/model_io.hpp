#pragma once

#include <string>

#include "sadl/core.hpp"

namespace sadl {

// Model container, little-endian:
//   "SADL"  u32 version  u32 r  u32 m  u32 s  u32 c
//   Omega (r x m), Q (s x r), W (c x s)  row-major float64
//   u32 length + config text (format_config)
inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const Model& model, const std::string& path);

/// Validates dimensions and the unit-row invariant of Omega.
Model load_model(const std::string& path);

std::string serialize_model(const Model& model);
Model deserialize_model(const std::string& bytes);

}  // namespace sadl
