#include "ssi/imputer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "ssi/data_model.hpp"

namespace ssi {

namespace {

std::vector<Index> missing_rows(const MissingDataset& ds, Index j) {
  std::vector<Index> out;
  for (Index i = 0; i < ds.n(); ++i)
    if (!ds.observed(i, j)) out.push_back(i);
  return out;
}

std::vector<Index> observed_rows(const MissingDataset& ds, Index j) {
  std::vector<Index> out;
  for (Index i = 0; i < ds.n(); ++i)
    if (ds.observed(i, j)) out.push_back(i);
  return out;
}

Matrix submatrix(const Matrix& w, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < rows.size(); ++r)
      out(static_cast<Index>(r), static_cast<Index>(c)) = w(rows[r], cols[c]);
  return out;
}

/// Connected components of the missing block under w-adjacency in either
/// direction, marking components with no mass flowing to any observed subject.
/// Normalized rows always sum to 1, so such a component makes I - W_S0 exactly
/// singular and its fixed point carries no information from the labels.
std::vector<std::vector<Index>> isolated_components(const Matrix& wss, const Vector& coupling) {
  const Index m = wss.rows();
  std::vector<int> comp(static_cast<std::size_t>(m), -1);
  std::vector<std::vector<Index>> members;
  for (Index start = 0; start < m; ++start) {
    if (comp[static_cast<std::size_t>(start)] >= 0) continue;
    int id = static_cast<int>(members.size());
    members.emplace_back();
    std::vector<Index> stack{start};
    comp[static_cast<std::size_t>(start)] = id;
    while (!stack.empty()) {
      Index v = stack.back();
      stack.pop_back();
      members[static_cast<std::size_t>(id)].push_back(v);
      for (Index u = 0; u < m; ++u) {
        if (comp[static_cast<std::size_t>(u)] >= 0) continue;
        if (wss(v, u) != 0.0 || wss(u, v) != 0.0) {
          comp[static_cast<std::size_t>(u)] = id;
          stack.push_back(u);
        }
      }
    }
  }
  std::vector<std::vector<Index>> isolated;
  for (auto& group : members) {
    double mass = 0.0;
    for (Index v : group) mass += coupling(v);
    if (mass == 0.0) isolated.push_back(std::move(group));
  }
  return isolated;
}

int iterate_fixed_point(const Matrix& wss, const Vector& c, Vector& x, double eps, int max_iter,
                        bool& converged) {
  x.setZero(c.size());
  converged = false;
  int it = 0;
  for (; it < max_iter; ++it) {
    Vector next = wss * x + c;
    double change = (next - x).lpNorm<Eigen::Infinity>();
    x = std::move(next);
    if (change < eps) {
      converged = true;
      ++it;
      break;
    }
  }
  return it;
}

}  // namespace

ContinuousSolve solve_continuous(const Matrix& w, const std::vector<Index>& miss,
                                 const std::vector<Index>& obs, const Vector& obs_values,
                                 double eps, int max_iter) {
  if (obs.empty()) throw Error(errc::empty_observed_set, "no observed subjects to impute from");
  if (obs_values.size() != static_cast<Index>(obs.size()))
    throw Error(errc::dimension_mismatch, "label vector does not match observed set");

  ContinuousSolve out;
  out.subjects = miss;
  const Index m = static_cast<Index>(miss.size());
  out.values.resize(m);
  if (m == 0) return out;

  Matrix wss = submatrix(w, miss, miss);
  Matrix wso = submatrix(w, miss, obs);
  Vector c = wso * obs_values;
  Vector coupling = wso.rowwise().sum();

  // Subjects in components cut off from the observed set take the label mean.
  auto isolated = isolated_components(wss, coupling);
  std::vector<std::uint8_t> is_isolated(static_cast<std::size_t>(m), 0);
  if (!isolated.empty()) {
    double mean = obs_values.mean();
    for (const auto& group : isolated)
      for (Index v : group) {
        is_isolated[static_cast<std::size_t>(v)] = 1;
        out.values(v) = mean;
        ++out.mean_fallback_count;
      }
    out.status = SolveStatus::mean_fallback;
  }

  std::vector<Index> solve_local;
  for (Index v = 0; v < m; ++v)
    if (!is_isolated[static_cast<std::size_t>(v)]) solve_local.push_back(v);
  if (solve_local.empty()) return out;

  const Index msol = static_cast<Index>(solve_local.size());
  Matrix wcc(msol, msol);
  Vector rhs(msol);
  for (Index r = 0; r < msol; ++r) {
    rhs(r) = c(solve_local[static_cast<std::size_t>(r)]);
    for (Index s = 0; s < msol; ++s)
      wcc(r, s) = wss(solve_local[static_cast<std::size_t>(r)], solve_local[static_cast<std::size_t>(s)]);
  }
  Matrix a = Matrix::Identity(msol, msol) - wcc;

  Vector x = Eigen::PartialPivLU<Matrix>(a).solve(rhs);
  double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
  double residual = x.allFinite() ? (a * x - rhs).lpNorm<Eigen::Infinity>()
                                  : std::numeric_limits<double>::infinity();
  if (residual > 1e-10 * scale) {
    bool converged = false;
    out.iterations = iterate_fixed_point(wcc, rhs, x, eps, max_iter, converged);
    residual = (a * x - rhs).lpNorm<Eigen::Infinity>();
    out.converged = converged;
    if (out.status != SolveStatus::mean_fallback) out.status = SolveStatus::iterative_fallback;
  }
  out.residual = residual;
  for (Index r = 0; r < msol; ++r) out.values(solve_local[static_cast<std::size_t>(r)]) = x(r);
  return out;
}

ContinuousSolve solve_continuous_iterative(const Matrix& w, const std::vector<Index>& miss,
                                           const std::vector<Index>& obs, const Vector& obs_values,
                                           double eps, int max_iter) {
  if (obs.empty()) throw Error(errc::empty_observed_set, "no observed subjects to impute from");
  ContinuousSolve out;
  out.subjects = miss;
  out.status = SolveStatus::iterative_fallback;
  const Index m = static_cast<Index>(miss.size());
  out.values.resize(m);
  if (m == 0) return out;

  Matrix wss = submatrix(w, miss, miss);
  Vector c = submatrix(w, miss, obs) * obs_values;
  Vector x;
  bool converged = false;
  out.iterations = iterate_fixed_point(wss, c, x, eps, max_iter, converged);
  out.converged = converged;
  out.residual = (x - (wss * x + c)).lpNorm<Eigen::Infinity>();
  out.values = x;
  return out;
}

DiscreteImpute solve_discrete(const Matrix& w, const std::vector<Index>& miss,
                              const std::vector<Index>& obs,
                              const std::vector<Index>& obs_classes, Index num_classes,
                              double eps, int max_iter) {
  if (obs.empty()) throw Error(errc::empty_observed_set, "no observed subjects to impute from");
  if (num_classes < 2) throw Error(errc::invalid_argument, "discrete column needs >= 2 classes");
  if (obs_classes.size() != obs.size())
    throw Error(errc::dimension_mismatch, "label vector does not match observed set");

  DiscreteImpute out;
  out.labels.subjects = miss;
  const Index m = static_cast<Index>(miss.size());
  const Index nob = static_cast<Index>(obs.size());
  out.labels.probs.resize(m, num_classes);
  if (m == 0) return out;

  Matrix onehot = Matrix::Zero(nob, num_classes);
  for (Index r = 0; r < nob; ++r) {
    Index c = obs_classes[static_cast<std::size_t>(r)];
    if (c < 0 || c >= num_classes)
      throw Error(errc::undeclared_class, "label index " + std::to_string(c) + " out of range");
    onehot(r, c) = 1.0;
  }

  Matrix wss = submatrix(w, miss, miss);
  Matrix cbar = submatrix(w, miss, obs) * onehot;

  Matrix probs = Matrix::Constant(m, num_classes, 1.0 / static_cast<double>(num_classes));
  out.labels.converged = false;
  int it = 0;
  for (; it < max_iter; ++it) {
    Matrix next = wss * probs + cbar;
    for (Index r = 0; r < m; ++r) {
      double s = next.row(r).sum();
      if (s > 0.0)
        next.row(r) /= s;
      else
        next.row(r).setConstant(1.0 / static_cast<double>(num_classes));
    }
    double change = (next - probs).norm();
    probs = std::move(next);
    if (change < eps) {
      out.labels.converged = true;
      ++it;
      break;
    }
  }
  out.labels.iterations = it;
  for (Index r = 0; r < m; ++r) {
    double s = probs.row(r).sum();
    if (s > 0.0) probs.row(r) /= s;
  }
  out.labels.probs = probs;

  out.hard.resize(static_cast<std::size_t>(m));
  for (Index r = 0; r < m; ++r) {
    Index best = 0;
    double best_val = probs(r, 0);
    for (Index c = 1; c < num_classes; ++c)
      if (probs(r, c) > best_val) {
        best_val = probs(r, c);
        best = c;
      }
    out.hard[static_cast<std::size_t>(r)] = best;
  }
  return out;
}

ContinuousSolve impute_continuous_column(const WeightGraph& graph, const MissingDataset& ds,
                                         Index j) {
  if (ds.schema[static_cast<std::size_t>(j)].kind != ColumnKind::continuous)
    throw Error(errc::invalid_argument,
                "column '" + ds.schema[static_cast<std::size_t>(j)].name + "' is not continuous");
  auto miss = missing_rows(ds, j);
  auto obs = observed_rows(ds, j);
  if (obs.empty())
    throw Error(errc::empty_observed_set,
                "column '" + ds.schema[static_cast<std::size_t>(j)].name + "' has no observed entries");
  Vector obs_values(static_cast<Index>(obs.size()));
  for (std::size_t r = 0; r < obs.size(); ++r) obs_values(static_cast<Index>(r)) = ds.x(obs[r], j);
  return solve_continuous(graph.w, miss, obs, obs_values);
}

ContinuousSolve impute_continuous_iterative(const WeightGraph& graph, const MissingDataset& ds,
                                            Index j, double eps, int max_iter) {
  auto miss = missing_rows(ds, j);
  auto obs = observed_rows(ds, j);
  if (obs.empty())
    throw Error(errc::empty_observed_set,
                "column '" + ds.schema[static_cast<std::size_t>(j)].name + "' has no observed entries");
  Vector obs_values(static_cast<Index>(obs.size()));
  for (std::size_t r = 0; r < obs.size(); ++r) obs_values(static_cast<Index>(r)) = ds.x(obs[r], j);
  return solve_continuous_iterative(graph.w, miss, obs, obs_values, eps, max_iter);
}

DiscreteImpute impute_discrete_column(const WeightGraph& graph, const MissingDataset& ds, Index j,
                                      double eps, int max_iter) {
  const auto& col = ds.schema[static_cast<std::size_t>(j)];
  if (col.kind != ColumnKind::discrete)
    throw Error(errc::invalid_argument, "column '" + col.name + "' is not discrete");
  auto miss = missing_rows(ds, j);
  auto obs = observed_rows(ds, j);
  if (obs.empty())
    throw Error(errc::empty_observed_set, "column '" + col.name + "' has no observed entries");
  std::vector<Index> obs_classes(obs.size());
  for (std::size_t r = 0; r < obs.size(); ++r) {
    Index c = col.class_index(ds.x(obs[r], j));
    if (c < 0)
      throw Error(errc::undeclared_class,
                  "subject " + std::to_string(obs[r]) + ", column '" + col.name + "'");
    obs_classes[r] = c;
  }
  return solve_discrete(graph.w, miss, obs, obs_classes, col.num_classes(), eps, max_iter);
}

namespace {

/// Imputes column j of `ds` through `graph`, writing results into x_hat and
/// the diagnostics slot.
void impute_one_column(const WeightGraph& graph, const MissingDataset& ds, Index j,
                       const ImputeOptions& options, Matrix& x_hat, ColumnDiagnostics& diag) {
  const auto& col = ds.schema[static_cast<std::size_t>(j)];
  try {
    if (col.kind == ColumnKind::continuous) {
      auto solve = impute_continuous_column(graph, ds, j);
      for (std::size_t r = 0; r < solve.subjects.size(); ++r)
        x_hat(solve.subjects[r], j) = solve.values(static_cast<Index>(r));
      diag.status = solve.status;
      diag.iterations = solve.iterations;
      diag.residual = solve.residual;
      diag.mean_fallback_count = solve.mean_fallback_count;
      diag.fallback_applied = solve.status != SolveStatus::direct;
      diag.converged = solve.converged;
    } else {
      auto solve = impute_discrete_column(graph, ds, j, options.eps, options.max_iter);
      for (std::size_t r = 0; r < solve.labels.subjects.size(); ++r)
        x_hat(solve.labels.subjects[r], j) = col.classes[static_cast<std::size_t>(solve.hard[r])];
      diag.status = SolveStatus::direct;
      diag.iterations = solve.labels.iterations;
      diag.converged = solve.labels.converged;
      diag.fallback_applied = false;
    }
  } catch (Error& e) {
    throw Error(e.code(), "column '" + col.name + "': " + e.what());
  }
}

}  // namespace

ImputationResult impute_all(const MissingDataset& ds, const ScaleParams& params,
                            const ImputeOptions& options) {
  validate(ds);
  const Index n = ds.n();
  const Index p = ds.p();

  GraphOptions gopt;
  gopt.threads = options.threads;
  gopt.include_diagonal = options.include_diagonal;
  WeightGraph graph = build_graph(ds, params, gopt);

  ImputationResult out;
  out.params_used = params;
  out.x_hat.resize(n, p);
  out.imputed_mask.setZero(n, p);
  out.diagnostics.resize(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < n; ++i) {
      out.x_hat(i, j) = ds.observed(i, j) ? ds.x(i, j) : 0.0;
      out.imputed_mask(i, j) = ds.observed(i, j) ? 0 : 1;
    }

  for (Index j = 0; j < p; ++j)
    impute_one_column(graph, ds, j, options, out.x_hat, out.diagnostics[static_cast<std::size_t>(j)]);
  return out;
}

ImputationResult impute_sssi(const MissingDataset& ds, const ScaleParams& params, int m,
                             const SssiOptions& options) {
  if (m < 1) throw Error(errc::invalid_argument, "sweep count must be >= 1");
  ImputationResult result = impute_all(ds, params, options);
  const Index n = ds.n();
  const Index p = ds.p();

  std::vector<Index> columns_with_missing;
  for (Index j = 0; j < p; ++j)
    if (result.imputed_mask.col(j).any()) columns_with_missing.push_back(j);
  if (columns_with_missing.empty()) {
    result.sweeps = m;
    return result;
  }

  GraphOptions gopt;
  gopt.threads = options.threads;
  gopt.include_diagonal = options.include_diagonal;

  // Working dataset: kernel distances read the completed matrix for every
  // column except the one being re-imputed, which keeps its true mask so
  // label pairs match the plain imputation semantics.
  MissingDataset work;
  work.y = ds.y;
  work.y_mask = ds.y_mask;
  work.schema = ds.schema;
  work.x = result.x_hat;
  work.mask.setOnes(n, p);

  for (int sweep = 0; sweep < m; ++sweep) {
    WeightGraph sweep_graph;
    if (options.refresh_per_sweep) sweep_graph = build_graph(work, params, gopt);
    for (Index j : columns_with_missing) {
      work.mask.col(j) = ds.mask.col(j);
      const WeightGraph& graph =
          options.refresh_per_sweep ? sweep_graph : (sweep_graph = build_graph(work, params, gopt));
      impute_one_column(graph, work, j, options, result.x_hat,
                        result.diagnostics[static_cast<std::size_t>(j)]);
      work.mask.col(j).setOnes();
      work.x.col(j) = result.x_hat.col(j);
    }
  }
  result.sweeps = m;
  return result;
}

}  // namespace ssi
