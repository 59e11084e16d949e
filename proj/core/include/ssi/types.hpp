#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ssi/error.hpp"

namespace ssi {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

enum class ColumnKind { continuous, discrete };

/// Per-column schema. Discrete columns declare the full ordered class list
/// (numeric class codes); continuous columns declare none.
struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  std::vector<double> classes;

  Index num_classes() const { return static_cast<Index>(classes.size()); }

  /// Index of `value` in the declared class list, or -1 if undeclared.
  Index class_index(double value) const {
    for (std::size_t c = 0; c < classes.size(); ++c)
      if (classes[c] == value) return static_cast<Index>(c);
    return -1;
  }
};

/// Response vector plus covariate matrix with an observation mask.
/// mask(i,j) == 1 means x(i,j) is observed; the payload under a zero mask
/// entry is unspecified and must never be read.
struct MissingDataset {
  Vector y;
  std::vector<std::uint8_t> y_mask;  // empty = response fully observed
  Matrix x;
  Mask mask;
  std::vector<ColumnSchema> schema;

  Index n() const { return x.rows(); }
  Index p() const { return x.cols(); }

  bool observed(Index i, Index j) const { return mask(i, j) != 0; }
  bool y_observed(Index i) const {
    return y_mask.empty() || y_mask[static_cast<std::size_t>(i)] != 0;
  }
  bool y_fully_observed() const {
    if (y_mask.empty()) return true;
    for (auto m : y_mask)
      if (!m) return false;
    return true;
  }
};

/// Missing-pattern bookkeeping: per-subject observed sets, per-column
/// missing/observed index sets, and the consecutive-overlap exponent base d0.
struct PatternIndex {
  std::vector<std::vector<Index>> d_sets;  // observed covariate indices per subject
  std::vector<std::vector<Index>> s0;      // per column: subjects missing it
  std::vector<std::vector<Index>> s1;      // per column: subjects observing it
  Index d0 = 1;
  std::vector<Index> sparse_columns;  // columns observed for fewer than 2 subjects
};

/// Scale parameters of the Gaussian weight kernel. When built from a
/// normalized tau, lambda1 = lambda2 = tau * n^{1/(2*d0+1)}.
struct ScaleParams {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::optional<double> tau;

  static ScaleParams from_lambdas(double l1, double l2) {
    if (l1 < 0.0 || l2 < 0.0)
      throw Error(errc::invalid_argument, "scale parameters must be nonnegative");
    return ScaleParams{l1, l2, std::nullopt};
  }

  static ScaleParams from_tau(double tau, Index n, Index d0) {
    if (tau < 0.0) throw Error(errc::invalid_argument, "tau must be nonnegative");
    if (n < 1 || d0 < 1) throw Error(errc::invalid_argument, "need n >= 1 and d0 >= 1");
    double lambda = tau * std::pow(static_cast<double>(n),
                                   1.0 / (2.0 * static_cast<double>(d0) + 1.0));
    ScaleParams out{lambda, lambda, tau};
    return out;
  }
};

enum class SolveStatus { direct, iterative_fallback, mean_fallback };

inline const char* solve_status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::direct: return "direct";
    case SolveStatus::iterative_fallback: return "iterative_fallback";
    case SolveStatus::mean_fallback: return "mean_fallback";
  }
  return "?";
}

struct ColumnDiagnostics {
  SolveStatus status = SolveStatus::direct;
  int iterations = 0;
  bool fallback_applied = false;
  bool converged = true;
  double residual = 0.0;
  Index mean_fallback_count = 0;
};

/// Completed matrix plus bookkeeping of what was filled in and how.
struct ImputationResult {
  Matrix x_hat;
  Mask imputed_mask;  // 1 where the entry was filled by the imputer
  std::vector<ColumnDiagnostics> diagnostics;
  ScaleParams params_used;
  int sweeps = 0;  // >0 for sequential re-imputation runs
};

}  // namespace ssi
