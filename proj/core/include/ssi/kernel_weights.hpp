#pragma once

#include <optional>

#include "ssi/types.hpp"

namespace ssi {

/// Pairwise similarity matrix A and its row-normalized form W.
/// A is symmetric with zero diagonal (unless built with include_diagonal);
/// every W row sums to 1, except rows listed in row_fallbacks, which place
/// all mass on the single largest-A neighbor after their sum underflowed.
struct WeightGraph {
  Matrix a;
  Matrix w;
  std::vector<Index> row_fallbacks;

  Index n() const { return a.rows(); }
};

struct GraphOptions {
  /// Remove this covariate from every subject's observed set before
  /// computing kernel distances (role-swap tuning support).
  std::optional<Index> exclude_column;
  /// Include a Gaussian self-weight a_ii = 1 in the row normalization.
  /// Off by default; the default zero diagonal keeps the propagation
  /// fixed point from referencing itself.
  bool include_diagonal = false;
  int threads = 0;
};

/// Gaussian kernel weight between two subjects with observed responses:
/// exp{-lambda1 (Y_i1 - Y_i2)^2 - lambda2 * sum_{k in D_i1 ^ D_i2} d_k^2},
/// where d_k is the value difference for continuous k and the 0/1 same-class
/// indicator for discrete k. An empty common observed set leaves the
/// response kernel alone.
double pair_weight(const MissingDataset& dataset, Index i1, Index i2, const ScaleParams& params);

/// As pair_weight, but the response factor is dropped when either response
/// is masked.
double pair_weight_partial_y(const MissingDataset& dataset, Index i1, Index i2,
                             const ScaleParams& params);

/// Assembles the full weight graph. Uses the partially-observed-response rule
/// throughout, which reduces to pair_weight when the response is complete.
/// Throws AllRowsDegenerate when every row underflows.
WeightGraph build_graph(const MissingDataset& dataset, const ScaleParams& params,
                        const GraphOptions& options = {});

}  // namespace ssi
