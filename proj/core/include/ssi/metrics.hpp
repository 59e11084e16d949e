#pragma once

#include <iosfwd>
#include <limits>
#include <string>

#include "ssi/simulation.hpp"
#include "ssi/tuning.hpp"
#include "ssi/types.hpp"

namespace ssi {

/// Per-replication accuracy: imputation (raw Frobenius over the full matrix
/// and per-missing-entry RMSE), estimation, and prediction (raw norm and
/// per-test-subject RMSE).
struct RepMetrics {
  double ia_raw = 0.0;
  double ia_rmse = 0.0;
  double ea = 0.0;
  double pa_raw = 0.0;
  double pa_rmse = 0.0;
};

enum class MethodKind { ssi1, ssi2, sssi1, sssi2, mean, knn };

struct MethodSpec {
  MethodKind kind = MethodKind::ssi1;
  int knn_k = 5;
  int sssi_sweeps = 10;
  TauGrid grid;

  std::string name() const;
  static MethodSpec from_name(const std::string& name);
};

/// Observed column means for continuous columns, observed modes for discrete
/// ones (ties to the lowest class index).
ImputationResult baseline_mean(const MissingDataset& dataset);

/// Per missing entry: average (continuous) or majority vote (discrete) of the
/// k nearest subjects that observe the target column, under Euclidean
/// distance over commonly observed covariates. Entries with no reachable
/// neighbor fall back to the column mean/mode.
ImputationResult baseline_knn(const MissingDataset& dataset, int k);

struct RepResult {
  RepMetrics metrics;
  double tau_used = std::numeric_limits<double>::quiet_NaN();
  double lambda_used = std::numeric_limits<double>::quiet_NaN();
};

/// Scores one replication: scale parameters are tuned on the training rows
/// only, the full matrix is imputed with those parameters, least squares is
/// fit on the imputed training design, and the test responses are predicted.
RepResult score_replication(const SimDraw& draw, const MethodSpec& method,
                            const TuneOptions& tune_options = {});

struct BenchCell {
  std::string scenario_id;
  std::string method;
  int reps = 0;
  int dropped = 0;
  std::vector<RepMetrics> per_rep;  // only the completed replications, in rep order
  RepMetrics mean;
  RepMetrics sd;
  bool sd_degenerate = false;  // fewer than 2 completed replications
};

struct BenchTable {
  std::vector<BenchCell> cells;

  void write_tsv(std::ostream& os) const;
  void write_jsonl(std::ostream& os) const;
  /// One mean-value table per metric: scenario rows, method columns.
  void write_plot_csv(std::ostream& os, const std::string& metric) const;
};

/// Runs reps seeded replications of every scenario and scores every method on
/// the shared draw. Replication r of a scenario uses
/// Rng::derive_seed(scenario.seed, r). Failed replications are dropped
/// cell-wise with counts surfaced.
BenchTable run_bench(const std::vector<SimScenario>& scenarios,
                     const std::vector<MethodSpec>& methods, int reps, int threads = 0,
                     const TuneOptions& tune_options = {});

}  // namespace ssi
