#include "ssi/tuning.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "ssi/data_model.hpp"
#include "ssi/imputer.hpp"
#include "ssi/kernel_weights.hpp"
#include "ssi/parallel.hpp"
#include "ssi/regression.hpp"

namespace ssi {

std::vector<double> TauGrid::points() const {
  if (!(lo >= 0.0) || !(lo < hi))
    throw Error(errc::invalid_argument, "grid needs 0 <= lo < hi");
  if (steps < 2) throw Error(errc::invalid_argument, "grid needs at least 2 steps");
  std::vector<double> out(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k)
    out[static_cast<std::size_t>(k)] = lo + (hi - lo) * static_cast<double>(k) /
                                                static_cast<double>(steps - 1);
  return out;
}

namespace {

Vector column_values(const MissingDataset& ds, const std::vector<Index>& rows, Index j) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out(static_cast<Index>(r)) = ds.x(rows[r], j);
  return out;
}

std::vector<Index> column_classes(const MissingDataset& ds, const std::vector<Index>& rows,
                                  Index j) {
  const auto& col = ds.schema[static_cast<std::size_t>(j)];
  std::vector<Index> out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Index c = col.class_index(ds.x(rows[r], j));
    if (c < 0)
      throw Error(errc::undeclared_class,
                  "subject " + std::to_string(rows[r]) + ", column '" + col.name + "'");
    out[r] = c;
  }
  return out;
}

TuneReport evaluate_grid(const MissingDataset& ds, const TauGrid& grid, const TuneOptions& options,
                         const std::function<double(double)>& score_fn) {
  PatternIndex idx = validate(ds);
  TuneReport report;
  report.grid = grid.points();
  report.d0 = idx.d0;
  report.n = ds.n();
  const std::size_t g = report.grid.size();
  report.scores.assign(g, std::numeric_limits<double>::quiet_NaN());
  report.failed.assign(g, 1);

  parallel_for(static_cast<Index>(g), options.threads, [&](Index k) {
    try {
      report.scores[static_cast<std::size_t>(k)] = score_fn(report.grid[static_cast<std::size_t>(k)]);
      report.failed[static_cast<std::size_t>(k)] = 0;
    } catch (const Error&) {
      // leave the point marked failed
    }
  });

  bool any = false;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g; ++k) {
    if (report.failed[k]) continue;
    any = true;
    if (report.scores[k] < best) {
      best = report.scores[k];
      report.tau_hat = report.grid[k];
    }
  }
  if (!any) throw Error(errc::all_grid_points_failed, "no grid point could be evaluated");
  report.lambda_hat = ScaleParams::from_tau(report.tau_hat, report.n, report.d0).lambda1;
  return report;
}

}  // namespace

double q_criterion(const MissingDataset& ds, double tau, const TuneOptions& options) {
  PatternIndex idx = validate(ds);
  ScaleParams params = ScaleParams::from_tau(tau, ds.n(), idx.d0);

  GraphOptions gopt;
  gopt.threads = 1;  // grid points parallelize above this level
  WeightGraph forward = build_graph(ds, params, gopt);

  double q = 0.0;
  bool any_eligible = false;
  for (Index j = 0; j < ds.p(); ++j) {
    const auto& s0 = idx.s0[static_cast<std::size_t>(j)];
    const auto& s1 = idx.s1[static_cast<std::size_t>(j)];
    if (s0.empty()) continue;  // nothing to interchange from
    any_eligible = true;

    const WeightGraph* swap = &forward;
    WeightGraph swap_storage;
    if (!options.swap_keep_column) {
      GraphOptions ex = gopt;
      ex.exclude_column = j;
      swap_storage = build_graph(ds, params, ex);
      swap = &swap_storage;
    }

    const auto& col = ds.schema[static_cast<std::size_t>(j)];
    if (col.kind == ColumnKind::continuous) {
      ContinuousSolve ahead =
          solve_continuous(forward.w, s0, s1, column_values(ds, s1, j), options.eps, options.max_iter);
      ContinuousSolve back =
          solve_continuous(swap->w, s1, s0, ahead.values, options.eps, options.max_iter);
      q += (back.values - column_values(ds, s1, j)).squaredNorm();
    } else {
      DiscreteImpute ahead = solve_discrete(forward.w, s0, s1, column_classes(ds, s1, j),
                                            col.num_classes(), options.eps, options.max_iter);
      DiscreteImpute back = solve_discrete(swap->w, s1, s0, ahead.hard, col.num_classes(),
                                           options.eps, options.max_iter);
      auto truth = column_classes(ds, s1, j);
      for (std::size_t r = 0; r < truth.size(); ++r)
        if (back.hard[r] != truth[r]) q += 1.0;
    }
  }
  if (!any_eligible)
    throw Error(errc::empty_observed_set, "no column has missing entries; Q is undefined");
  return q;
}

TuneReport tune_interchangeable(const MissingDataset& ds, const TauGrid& grid,
                                const TuneOptions& options) {
  TuneOptions inner = options;
  inner.threads = 1;
  return evaluate_grid(ds, grid, options, [&](double tau) { return q_criterion(ds, tau, inner); });
}

TuneReport tune_cv(const MissingDataset& ds, const TauGrid& grid, const TuneOptions& options) {
  if (!ds.y_fully_observed())
    throw Error(errc::invalid_argument, "cross-validated tuning needs a fully observed response");
  PatternIndex idx = validate(ds);

  return evaluate_grid(ds, grid, options, [&](double tau) {
    ScaleParams params = ScaleParams::from_tau(tau, ds.n(), idx.d0);
    ImputeOptions iopt;
    iopt.eps = options.eps;
    iopt.max_iter = options.max_iter;
    iopt.threads = 1;
    ImputationResult imputed = impute_all(ds, params, iopt);

    Matrix design = imputed.x_hat;
    if (options.intercept) {
      Matrix with_ones(design.rows(), design.cols() + 1);
      with_ones.col(0).setOnes();
      with_ones.rightCols(design.cols()) = design;
      design = std::move(with_ones);
    }
    OlsFit fit = fit_ols(design, ds.y);
    Vector loo = loo_predictions(fit, design, ds.y);
    return (loo - ds.y).squaredNorm();
  });
}

}  // namespace ssi
