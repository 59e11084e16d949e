#include "ssi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>

#include "ssi/csv_io.hpp"
#include "ssi/data_model.hpp"
#include "ssi/imputer.hpp"
#include "ssi/parallel.hpp"
#include "ssi/regression.hpp"

namespace ssi {

std::string MethodSpec::name() const {
  switch (kind) {
    case MethodKind::ssi1: return "ssi1";
    case MethodKind::ssi2: return "ssi2";
    case MethodKind::sssi1: return "sssi1";
    case MethodKind::sssi2: return "sssi2";
    case MethodKind::mean: return "mean";
    case MethodKind::knn: return "knn" + std::to_string(knn_k);
  }
  return "?";
}

MethodSpec MethodSpec::from_name(const std::string& name) {
  MethodSpec spec;
  if (name == "ssi1") spec.kind = MethodKind::ssi1;
  else if (name == "ssi2") spec.kind = MethodKind::ssi2;
  else if (name == "sssi1") spec.kind = MethodKind::sssi1;
  else if (name == "sssi2") spec.kind = MethodKind::sssi2;
  else if (name == "mean") spec.kind = MethodKind::mean;
  else if (name == "knn") spec.kind = MethodKind::knn;
  else throw Error(errc::invalid_argument, "unknown method '" + name + "'");
  return spec;
}

ImputationResult baseline_mean(const MissingDataset& ds) {
  const Index n = ds.n();
  const Index p = ds.p();
  ImputationResult out;
  out.x_hat.resize(n, p);
  out.imputed_mask.setZero(n, p);
  out.diagnostics.resize(static_cast<std::size_t>(p));

  for (Index j = 0; j < p; ++j) {
    const auto& col = ds.schema[static_cast<std::size_t>(j)];
    double fill = 0.0;
    if (col.kind == ColumnKind::continuous) {
      double sum = 0.0;
      Index count = 0;
      for (Index i = 0; i < n; ++i)
        if (ds.observed(i, j)) {
          sum += ds.x(i, j);
          ++count;
        }
      if (count == 0)
        throw Error(errc::empty_observed_set, "column '" + col.name + "' has no observed entries");
      fill = sum / static_cast<double>(count);
    } else {
      std::vector<Index> counts(static_cast<std::size_t>(col.num_classes()), 0);
      Index total = 0;
      for (Index i = 0; i < n; ++i)
        if (ds.observed(i, j)) {
          Index c = col.class_index(ds.x(i, j));
          if (c < 0) throw Error(errc::undeclared_class, "column '" + col.name + "'");
          ++counts[static_cast<std::size_t>(c)];
          ++total;
        }
      if (total == 0)
        throw Error(errc::empty_observed_set, "column '" + col.name + "' has no observed entries");
      Index mode = 0;
      for (Index c = 1; c < col.num_classes(); ++c)
        if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(mode)]) mode = c;
      fill = col.classes[static_cast<std::size_t>(mode)];
    }
    for (Index i = 0; i < n; ++i) {
      if (ds.observed(i, j)) {
        out.x_hat(i, j) = ds.x(i, j);
      } else {
        out.x_hat(i, j) = fill;
        out.imputed_mask(i, j) = 1;
      }
    }
    out.diagnostics[static_cast<std::size_t>(j)].status = SolveStatus::mean_fallback;
  }
  return out;
}

ImputationResult baseline_knn(const MissingDataset& ds, int k) {
  if (k < 1) throw Error(errc::invalid_argument, "knn needs k >= 1");
  ImputationResult out = baseline_mean(ds);  // provides the unreachable-entry fallback
  const Index n = ds.n();
  const Index p = ds.p();

  for (Index j = 0; j < p; ++j) {
    const auto& col = ds.schema[static_cast<std::size_t>(j)];
    auto& diag = out.diagnostics[static_cast<std::size_t>(j)];
    diag = ColumnDiagnostics{};
    for (Index i = 0; i < n; ++i) {
      if (ds.observed(i, j)) continue;
      // Distance to every subject observing column j, over the shared
      // observed covariates.
      std::vector<std::pair<double, Index>> neighbors;
      for (Index l = 0; l < n; ++l) {
        if (l == i || !ds.observed(l, j)) continue;
        double dist2 = 0.0;
        Index shared = 0;
        for (Index c = 0; c < p; ++c) {
          if (!ds.observed(i, c) || !ds.observed(l, c)) continue;
          ++shared;
          if (ds.schema[static_cast<std::size_t>(c)].kind == ColumnKind::discrete) {
            dist2 += ds.x(i, c) == ds.x(l, c) ? 0.0 : 1.0;
          } else {
            double d = ds.x(i, c) - ds.x(l, c);
            dist2 += d * d;
          }
        }
        if (shared == 0) continue;  // unreachable candidate
        neighbors.emplace_back(dist2, l);
      }
      if (neighbors.empty()) {
        ++diag.mean_fallback_count;  // keep the mean fill
        diag.fallback_applied = true;
        diag.status = SolveStatus::mean_fallback;
        continue;
      }
      std::sort(neighbors.begin(), neighbors.end());
      std::size_t use = std::min<std::size_t>(static_cast<std::size_t>(k), neighbors.size());
      if (col.kind == ColumnKind::continuous) {
        double sum = 0.0;
        for (std::size_t r = 0; r < use; ++r) sum += ds.x(neighbors[r].second, j);
        out.x_hat(i, j) = sum / static_cast<double>(use);
      } else {
        std::vector<Index> votes(static_cast<std::size_t>(col.num_classes()), 0);
        for (std::size_t r = 0; r < use; ++r)
          ++votes[static_cast<std::size_t>(col.class_index(ds.x(neighbors[r].second, j)))];
        Index best = 0;
        for (Index c = 1; c < col.num_classes(); ++c)
          if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
        out.x_hat(i, j) = col.classes[static_cast<std::size_t>(best)];
      }
    }
  }
  return out;
}

namespace {

MissingDataset subset_rows(const MissingDataset& ds, const std::vector<Index>& rows) {
  MissingDataset out;
  out.schema = ds.schema;
  const Index m = static_cast<Index>(rows.size());
  out.y.resize(m);
  out.x.resize(m, ds.p());
  out.mask.resize(m, ds.p());
  if (!ds.y_mask.empty()) out.y_mask.resize(static_cast<std::size_t>(m));
  for (Index r = 0; r < m; ++r) {
    Index src = rows[static_cast<std::size_t>(r)];
    out.y(r) = ds.y(src);
    out.x.row(r) = ds.x.row(src);
    out.mask.row(r) = ds.mask.row(src);
    if (!ds.y_mask.empty())
      out.y_mask[static_cast<std::size_t>(r)] = ds.y_mask[static_cast<std::size_t>(src)];
  }
  return out;
}

}  // namespace

RepResult score_replication(const SimDraw& draw, const MethodSpec& method,
                            const TuneOptions& tune_options) {
  const MissingDataset& full = draw.dataset;
  RepResult rep;

  ImputationResult imputed;
  switch (method.kind) {
    case MethodKind::mean:
      imputed = baseline_mean(full);
      break;
    case MethodKind::knn:
      imputed = baseline_knn(full, method.knn_k);
      break;
    default: {
      MissingDataset train = subset_rows(full, draw.train_idx);
      TuneReport tuned;
      if (method.kind == MethodKind::ssi1 || method.kind == MethodKind::sssi1)
        tuned = tune_interchangeable(train, method.grid, tune_options);
      else
        tuned = tune_cv(train, method.grid, tune_options);
      rep.tau_used = tuned.tau_hat;
      rep.lambda_used = tuned.lambda_hat;
      ScaleParams params = ScaleParams::from_lambdas(tuned.lambda_hat, tuned.lambda_hat);
      params.tau = tuned.tau_hat;
      if (method.kind == MethodKind::sssi1 || method.kind == MethodKind::sssi2) {
        SssiOptions opt;
        opt.eps = tune_options.eps;
        opt.max_iter = tune_options.max_iter;
        imputed = impute_sssi(full, params, method.sssi_sweeps, opt);
      } else {
        ImputeOptions opt;
        opt.eps = tune_options.eps;
        opt.max_iter = tune_options.max_iter;
        imputed = impute_all(full, params, opt);
      }
      break;
    }
  }

  RepMetrics& m = rep.metrics;
  m.ia_raw = (imputed.x_hat - draw.x_true).norm();
  Index n_missing = 0;
  double sq = 0.0;
  for (Index j = 0; j < full.p(); ++j)
    for (Index i = 0; i < full.n(); ++i)
      if (imputed.imputed_mask(i, j)) {
        double d = imputed.x_hat(i, j) - draw.x_true(i, j);
        sq += d * d;
        ++n_missing;
      }
  m.ia_rmse = n_missing > 0 ? std::sqrt(sq / static_cast<double>(n_missing)) : 0.0;

  Matrix x_train(static_cast<Index>(draw.train_idx.size()), full.p());
  Vector y_train(static_cast<Index>(draw.train_idx.size()));
  for (std::size_t r = 0; r < draw.train_idx.size(); ++r) {
    x_train.row(static_cast<Index>(r)) = imputed.x_hat.row(draw.train_idx[r]);
    y_train(static_cast<Index>(r)) = full.y(draw.train_idx[r]);
  }
  OlsFit fit = fit_ols(x_train, y_train);
  m.ea = (fit.beta_hat - draw.beta_true).norm();

  const Index n_test = static_cast<Index>(draw.test_idx.size());
  double pa_sq = 0.0;
  for (Index r = 0; r < n_test; ++r) {
    Index i = draw.test_idx[static_cast<std::size_t>(r)];
    double pred = imputed.x_hat.row(i).dot(fit.beta_hat);
    double d = pred - full.y(i);
    pa_sq += d * d;
  }
  m.pa_raw = std::sqrt(pa_sq);
  m.pa_rmse = n_test > 0 ? std::sqrt(pa_sq / static_cast<double>(n_test)) : 0.0;
  return rep;
}

namespace {

RepMetrics metrics_mean(const std::vector<RepMetrics>& reps) {
  RepMetrics m;
  if (reps.empty()) return m;
  for (const auto& r : reps) {
    m.ia_raw += r.ia_raw;
    m.ia_rmse += r.ia_rmse;
    m.ea += r.ea;
    m.pa_raw += r.pa_raw;
    m.pa_rmse += r.pa_rmse;
  }
  double inv = 1.0 / static_cast<double>(reps.size());
  m.ia_raw *= inv;
  m.ia_rmse *= inv;
  m.ea *= inv;
  m.pa_raw *= inv;
  m.pa_rmse *= inv;
  return m;
}

RepMetrics metrics_sd(const std::vector<RepMetrics>& reps, const RepMetrics& mean) {
  RepMetrics sd;
  if (reps.size() < 2) return sd;
  for (const auto& r : reps) {
    auto acc = [](double& out, double v, double mu) { out += (v - mu) * (v - mu); };
    acc(sd.ia_raw, r.ia_raw, mean.ia_raw);
    acc(sd.ia_rmse, r.ia_rmse, mean.ia_rmse);
    acc(sd.ea, r.ea, mean.ea);
    acc(sd.pa_raw, r.pa_raw, mean.pa_raw);
    acc(sd.pa_rmse, r.pa_rmse, mean.pa_rmse);
  }
  double inv = 1.0 / static_cast<double>(reps.size() - 1);
  sd.ia_raw = std::sqrt(sd.ia_raw * inv);
  sd.ia_rmse = std::sqrt(sd.ia_rmse * inv);
  sd.ea = std::sqrt(sd.ea * inv);
  sd.pa_raw = std::sqrt(sd.pa_raw * inv);
  sd.pa_rmse = std::sqrt(sd.pa_rmse * inv);
  return sd;
}

double metric_by_name(const RepMetrics& m, const std::string& name) {
  if (name == "ia_raw") return m.ia_raw;
  if (name == "ia_rmse") return m.ia_rmse;
  if (name == "ea") return m.ea;
  if (name == "pa_raw") return m.pa_raw;
  if (name == "pa_rmse") return m.pa_rmse;
  throw Error(errc::invalid_argument, "unknown metric '" + name + "'");
}

}  // namespace

BenchTable run_bench(const std::vector<SimScenario>& scenarios,
                     const std::vector<MethodSpec>& methods, int reps, int threads,
                     const TuneOptions& tune_options) {
  if (reps < 1) throw Error(errc::invalid_argument, "need reps >= 1");
  for (const auto& sc : scenarios) sc.check();

  // rep-major results: slot [s][m][r] empty when that replication dropped
  std::vector<std::vector<std::vector<std::optional<RepMetrics>>>> results(
      scenarios.size(),
      std::vector<std::vector<std::optional<RepMetrics>>>(
          methods.size(), std::vector<std::optional<RepMetrics>>(static_cast<std::size_t>(reps))));

  const Index jobs = static_cast<Index>(scenarios.size()) * reps;
  TuneOptions inner = tune_options;
  inner.threads = 1;
  parallel_for(jobs, threads, [&](Index job) {
    std::size_t s = static_cast<std::size_t>(job / reps);
    int r = static_cast<int>(job % reps);
    SimScenario sc = scenarios[s];
    sc.seed = Rng::derive_seed(sc.seed, static_cast<std::uint64_t>(r));
    SimDraw d = draw(sc);
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      try {
        results[s][mi][static_cast<std::size_t>(r)] =
            score_replication(d, methods[mi], inner).metrics;
      } catch (const Error&) {
        // dropped replication for this cell
      }
    }
  });

  BenchTable table;
  for (std::size_t s = 0; s < scenarios.size(); ++s)
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      BenchCell cell;
      cell.scenario_id = scenarios[s].id;
      cell.method = methods[mi].name();
      cell.reps = reps;
      for (int r = 0; r < reps; ++r) {
        const auto& slot = results[s][mi][static_cast<std::size_t>(r)];
        if (slot)
          cell.per_rep.push_back(*slot);
        else
          ++cell.dropped;
      }
      cell.mean = metrics_mean(cell.per_rep);
      cell.sd = metrics_sd(cell.per_rep, cell.mean);
      cell.sd_degenerate = cell.per_rep.size() < 2;
      table.cells.push_back(std::move(cell));
    }
  return table;
}

void BenchTable::write_tsv(std::ostream& os) const {
  os << "# ssi-tsv v1 bench\n";
  os << "scenario\tmethod\treps\tdropped\tia_raw_mean\tia_raw_sd\tia_rmse_mean\tia_rmse_sd"
        "\tea_mean\tea_sd\tpa_raw_mean\tpa_raw_sd\tpa_rmse_mean\tpa_rmse_sd\tsd_degenerate\n";
  for (const auto& c : cells) {
    os << c.scenario_id << '\t' << c.method << '\t' << c.reps << '\t' << c.dropped << '\t'
       << format_double(c.mean.ia_raw) << '\t' << format_double(c.sd.ia_raw) << '\t'
       << format_double(c.mean.ia_rmse) << '\t' << format_double(c.sd.ia_rmse) << '\t'
       << format_double(c.mean.ea) << '\t' << format_double(c.sd.ea) << '\t'
       << format_double(c.mean.pa_raw) << '\t' << format_double(c.sd.pa_raw) << '\t'
       << format_double(c.mean.pa_rmse) << '\t' << format_double(c.sd.pa_rmse) << '\t'
       << (c.sd_degenerate ? 1 : 0) << '\n';
  }
}

void BenchTable::write_jsonl(std::ostream& os) const {
  for (const auto& c : cells) {
    os << "{\"scenario\":\"" << c.scenario_id << "\",\"method\":\"" << c.method
       << "\",\"reps\":" << c.reps << ",\"dropped\":" << c.dropped << ",\"mean\":{";
    os << "\"ia_raw\":" << format_double(c.mean.ia_raw) << ",\"ia_rmse\":"
       << format_double(c.mean.ia_rmse) << ",\"ea\":" << format_double(c.mean.ea)
       << ",\"pa_raw\":" << format_double(c.mean.pa_raw)
       << ",\"pa_rmse\":" << format_double(c.mean.pa_rmse) << "},\"sd\":{";
    os << "\"ia_raw\":" << format_double(c.sd.ia_raw) << ",\"ia_rmse\":"
       << format_double(c.sd.ia_rmse) << ",\"ea\":" << format_double(c.sd.ea)
       << ",\"pa_raw\":" << format_double(c.sd.pa_raw)
       << ",\"pa_rmse\":" << format_double(c.sd.pa_rmse) << "},\"per_rep_ia_rmse\":[";
    for (std::size_t r = 0; r < c.per_rep.size(); ++r) {
      if (r) os << ',';
      os << format_double(c.per_rep[r].ia_rmse);
    }
    os << "]}\n";
  }
}

void BenchTable::write_plot_csv(std::ostream& os, const std::string& metric) const {
  std::vector<std::string> scenario_order;
  std::vector<std::string> method_order;
  std::map<std::pair<std::string, std::string>, double> values;
  for (const auto& c : cells) {
    if (std::find(scenario_order.begin(), scenario_order.end(), c.scenario_id) ==
        scenario_order.end())
      scenario_order.push_back(c.scenario_id);
    if (std::find(method_order.begin(), method_order.end(), c.method) == method_order.end())
      method_order.push_back(c.method);
    values[{c.scenario_id, c.method}] = metric_by_name(c.mean, metric);
  }
  os << "# ssi-csv v1 plot " << metric << "\n";
  os << "scenario";
  for (const auto& m : method_order) os << ',' << m;
  os << '\n';
  for (const auto& s : scenario_order) {
    os << s;
    for (const auto& m : method_order) {
      os << ',';
      auto it = values.find({s, m});
      if (it != values.end()) os << format_double(it->second);
    }
    os << '\n';
  }
}

}  // namespace ssi
