#pragma once

#include <vector>

#include "sadl/core.hpp"

namespace sadl {

/// One-hot c x n matrix: L(i, j) = 1 iff labels[j] == i.
Matrix build_label_matrix(const Labels& labels, int classes);

/// Block-diagonal s x n target. Class i owns rows [offset_i, offset_i + block_rows[i]),
/// blocks ordered by class index, and column j is the indicator of the block of
/// labels[j]. Columns keep dataset order. An empty `block_rows` means one row per
/// sample of each class, which makes s == n.
Matrix build_structure_matrix(const Labels& labels, int classes,
                              std::vector<int> block_rows = {});

/// Per-class block sizes: `uniform` rows per class, or the class counts when 0.
std::vector<int> resolve_block_rows(const Labels& labels, int classes, int uniform);

StructureTargets build_targets(const Dataset& data, int uniform_block_rows = 0);

}  // namespace sadl
