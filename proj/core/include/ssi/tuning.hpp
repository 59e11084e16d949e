#pragma once

#include "ssi/types.hpp"

namespace ssi {

/// Inclusive uniformly spaced search grid for the normalized scale tau.
struct TauGrid {
  double lo = 0.0;
  double hi = 2.0;
  int steps = 21;

  std::vector<double> points() const;
};

struct TuneReport {
  std::vector<double> grid;
  std::vector<double> scores;        // NaN where evaluation failed
  std::vector<std::uint8_t> failed;  // 1 where evaluation failed
  double tau_hat = 0.0;
  double lambda_hat = 0.0;
  Index d0 = 1;
  Index n = 0;
};

struct TuneOptions {
  /// Keep the target column inside the kernel distances of the role-swapped
  /// step (the literal fixed-graph reading). Off by default: the swap step
  /// excludes the column so its true values cannot leak into the weights.
  bool swap_keep_column = false;
  /// Prepend a ones column to the design in the cross-validated criterion.
  bool intercept = false;
  double eps = 1e-8;
  int max_iter = 1000;
  int threads = 0;
};

/// Interchangeable imputation error at scale tau: per column, impute the
/// missing set, then swap roles and reconstruct the observed set from those
/// imputations; sum the squared reconstruction error (misclassification count
/// for discrete columns). Columns with nothing missing contribute zero;
/// a dataset with no missing entries at all leaves Q undefined.
double q_criterion(const MissingDataset& dataset, double tau, const TuneOptions& options = {});

/// Grid argmin of q_criterion; ties go to the smallest tau. Model-free.
TuneReport tune_interchangeable(const MissingDataset& dataset, const TauGrid& grid,
                                const TuneOptions& options = {});

/// Grid argmin of the exact leave-one-out prediction error after imputing at
/// each tau and fitting least squares. Requires a fully observed response.
TuneReport tune_cv(const MissingDataset& dataset, const TauGrid& grid,
                   const TuneOptions& options = {});

}  // namespace ssi
