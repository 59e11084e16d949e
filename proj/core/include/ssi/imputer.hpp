#pragma once

#include "ssi/kernel_weights.hpp"
#include "ssi/types.hpp"

namespace ssi {

/// Result of one continuous-column imputation: values aligned with
/// `subjects` (the missing index set, ascending).
struct ContinuousSolve {
  std::vector<Index> subjects;
  Vector values;
  SolveStatus status = SolveStatus::direct;
  double residual = 0.0;
  int iterations = 0;
  bool converged = true;
  Index mean_fallback_count = 0;
};

/// Class-probability rows for the missing subjects of a discrete column.
struct LabelMatrix {
  std::vector<Index> subjects;
  Matrix probs;  // |S0j| x C, rows on the simplex
  int iterations = 0;
  bool converged = true;
};

struct DiscreteImpute {
  LabelMatrix labels;
  std::vector<Index> hard;  // argmax class index per missing subject, ties to lowest
};

struct ImputeOptions {
  double eps = 1e-8;
  int max_iter = 1000;
  int threads = 0;
  bool include_diagonal = false;
};

struct SssiOptions : ImputeOptions {
  /// Rebuild the weight graph once per sweep instead of before every column.
  bool refresh_per_sweep = false;
};

/// Role-agnostic propagation solvers: `miss` subjects are reconstructed from
/// `obs` subjects carrying the given labels, through the row-normalized W.
/// These back both the standard imputation (miss = S0j) and the role-swapped
/// tuning step (miss = S1j).
ContinuousSolve solve_continuous(const Matrix& w, const std::vector<Index>& miss,
                                 const std::vector<Index>& obs, const Vector& obs_values,
                                 double eps = 1e-8, int max_iter = 1000);

ContinuousSolve solve_continuous_iterative(const Matrix& w, const std::vector<Index>& miss,
                                           const std::vector<Index>& obs, const Vector& obs_values,
                                           double eps, int max_iter);

DiscreteImpute solve_discrete(const Matrix& w, const std::vector<Index>& miss,
                              const std::vector<Index>& obs,
                              const std::vector<Index>& obs_classes, Index num_classes,
                              double eps = 1e-8, int max_iter = 1000);

/// Closed-form imputation of one continuous column:
/// solve (I - W_S0j) x = W_{S0j,S1j} X_{S1j,j} by dense LU. Missing components
/// with no mass reaching an observed subject fall back to the observed-column
/// mean; a residual above 1e-10 * scale demotes the solve to the fixed-point
/// iteration.
ContinuousSolve impute_continuous_column(const WeightGraph& graph, const MissingDataset& dataset,
                                         Index j);

/// Fixed-point iteration for the same system, from x = 0. Independent route
/// used as an oracle against the direct solve.
ContinuousSolve impute_continuous_iterative(const WeightGraph& graph, const MissingDataset& dataset,
                                            Index j, double eps = 1e-8, int max_iter = 1000);

/// Iterative label propagation for a discrete column: uniform start,
/// probs <- W_S0j * probs + W_{S0j,S1j} * onehot, row-normalized each step,
/// stopping when the Frobenius change drops below eps.
DiscreteImpute impute_discrete_column(const WeightGraph& graph, const MissingDataset& dataset,
                                      Index j, double eps = 1e-8, int max_iter = 1000);

/// Builds one weight graph and imputes every column by its declared type.
/// Observed entries pass through untouched.
ImputationResult impute_all(const MissingDataset& dataset, const ScaleParams& params,
                            const ImputeOptions& options = {});

/// Sequential re-imputation: an impute_all pass, then m sweeps where each
/// column is re-imputed in order with the kernel distances drawn from the
/// current completed matrix of the other columns. Labels always come from the
/// truly observed entries.
ImputationResult impute_sssi(const MissingDataset& dataset, const ScaleParams& params, int m,
                             const SssiOptions& options = {});

}  // namespace ssi
