#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace cspec::detail {

using SparseIntColumn = std::vector<std::pair<std::int32_t, std::int64_t>>;

/// Rank over Q of a sparse integer matrix given by columns (row indices need
/// not be sorted). Fraction-free column reduction; falls back to arbitrary
/// precision if 64-bit arithmetic would overflow.
int exact_rank(std::vector<SparseIntColumn> columns);

}  // namespace cspec::detail
