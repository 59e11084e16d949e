#pragma once

#include <utility>

#include "ssi/types.hpp"

namespace ssi {

/// Checks dataset consistency and materializes the pattern index: per-subject
/// observed sets D_i, per-column index sets S0j/S1j, and
/// d0 = 1 + max_i |D_i intersect D_{i+1}| over consecutive subjects in file
/// order. Throws on dimension mismatches, fully missing columns, and observed
/// discrete entries outside the declared class list. Columns observed for
/// fewer than 2 subjects are accepted but listed in sparse_columns.
PatternIndex validate(const MissingDataset& dataset);

/// Fraction of covariate mask entries that are zero.
double missing_rate(const MissingDataset& dataset);

/// Reorders subjects so that identical missing patterns are adjacent (stable
/// within a pattern). Returns the reordered dataset and the permutation used,
/// where perm[k] is the original index of new row k. Experimental alternative
/// to the default file-order d0.
std::pair<MissingDataset, std::vector<Index>> sort_by_pattern(const MissingDataset& dataset);

}  // namespace ssi
