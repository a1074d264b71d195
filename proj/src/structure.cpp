#include "sadl/structure.hpp"

#include <numeric>

namespace sadl {

Matrix build_label_matrix(const Labels& labels, int classes) {
  if (classes < 1) throw DataError("class count must be >= 1");
  Matrix L = Matrix::Zero(classes, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const int l = labels[j];
    if (l < 0 || l >= classes) throw DataError("label out of range: " + std::to_string(l));
    L(l, static_cast<Eigen::Index>(j)) = 1.0;
  }
  return L;
}

std::vector<int> resolve_block_rows(const Labels& labels, int classes, int uniform) {
  if (uniform > 0) return std::vector<int>(static_cast<std::size_t>(classes), uniform);
  auto counts = class_counts(labels, classes);
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] == 0)
      throw DataError("class " + std::to_string(i) +
                      " is empty; default block sizing needs at least one sample per class");
  return counts;
}

Matrix build_structure_matrix(const Labels& labels, int classes, std::vector<int> block_rows) {
  if (classes < 1) throw DataError("class count must be >= 1");
  if (block_rows.empty()) block_rows = resolve_block_rows(labels, classes, 0);
  if (static_cast<int>(block_rows.size()) != classes)
    throw DataError("block_rows must have one entry per class");
  for (int b : block_rows)
    if (b < 1) throw DataError("block_rows entries must be >= 1");

  std::vector<Eigen::Index> offset(block_rows.size() + 1, 0);
  for (std::size_t i = 0; i < block_rows.size(); ++i) offset[i + 1] = offset[i] + block_rows[i];

  Matrix H = Matrix::Zero(offset.back(), static_cast<Eigen::Index>(labels.size()));
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const int l = labels[j];
    if (l < 0 || l >= classes) throw DataError("label out of range: " + std::to_string(l));
    H.col(static_cast<Eigen::Index>(j)).segment(offset[l], block_rows[l]).setOnes();
  }
  return H;
}

StructureTargets build_targets(const Dataset& data, int uniform_block_rows) {
  StructureTargets t;
  t.block_rows = resolve_block_rows(data.labels, data.classes, uniform_block_rows);
  t.H = build_structure_matrix(data.labels, data.classes, t.block_rows);
  t.L = build_label_matrix(data.labels, data.classes);
  return t;
}

}  // namespace sadl
