#include "ssi/kernel_weights.hpp"

#include <cmath>
#include <string>

#include "ssi/parallel.hpp"

namespace ssi {

namespace {

constexpr double kRowUnderflow = 1e-300;

double pair_exponent(const MissingDataset& ds, Index i1, Index i2, const ScaleParams& params,
                     std::optional<Index> exclude, bool use_response) {
  double exponent = 0.0;
  if (use_response) {
    double dy = ds.y(i1) - ds.y(i2);
    exponent += params.lambda1 * dy * dy;
  }
  double dist2 = 0.0;
  const Index p = ds.p();
  for (Index k = 0; k < p; ++k) {
    if (exclude && *exclude == k) continue;
    if (!ds.observed(i1, k) || !ds.observed(i2, k)) continue;
    if (ds.schema[static_cast<std::size_t>(k)].kind == ColumnKind::discrete) {
      dist2 += ds.x(i1, k) == ds.x(i2, k) ? 0.0 : 1.0;
    } else {
      double d = ds.x(i1, k) - ds.x(i2, k);
      dist2 += d * d;
    }
  }
  exponent += params.lambda2 * dist2;
  return exponent;
}

}  // namespace

double pair_weight(const MissingDataset& ds, Index i1, Index i2, const ScaleParams& params) {
  if (i1 == i2) throw Error(errc::invalid_argument, "pair_weight needs two distinct subjects");
  if (!ds.y_observed(i1) || !ds.y_observed(i2))
    throw Error(errc::invalid_argument, "pair_weight needs both responses observed");
  return std::exp(-pair_exponent(ds, i1, i2, params, std::nullopt, true));
}

double pair_weight_partial_y(const MissingDataset& ds, Index i1, Index i2,
                             const ScaleParams& params) {
  if (i1 == i2) throw Error(errc::invalid_argument, "pair_weight needs two distinct subjects");
  bool use_response = ds.y_observed(i1) && ds.y_observed(i2);
  return std::exp(-pair_exponent(ds, i1, i2, params, std::nullopt, use_response));
}

WeightGraph build_graph(const MissingDataset& ds, const ScaleParams& params,
                        const GraphOptions& options) {
  const Index n = ds.n();
  const Index p = ds.p();
  if (n < 2) throw Error(errc::invalid_argument, "weight graph needs at least 2 subjects");
  if (options.exclude_column && (*options.exclude_column < 0 || *options.exclude_column >= p))
    throw Error(errc::invalid_argument, "exclude_column out of range");

  // Row-major copies keep the pair loop on contiguous memory.
  std::vector<double> xr(static_cast<std::size_t>(n * p));
  std::vector<std::uint8_t> mr(static_cast<std::size_t>(n * p));
  std::vector<std::uint8_t> discrete(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) {
    discrete[static_cast<std::size_t>(j)] =
        ds.schema[static_cast<std::size_t>(j)].kind == ColumnKind::discrete ? 1 : 0;
    bool excluded = options.exclude_column && *options.exclude_column == j;
    for (Index i = 0; i < n; ++i) {
      bool obs = !excluded && ds.observed(i, j);
      mr[static_cast<std::size_t>(i * p + j)] = obs ? 1 : 0;
      xr[static_cast<std::size_t>(i * p + j)] = obs ? ds.x(i, j) : 0.0;
    }
  }

  WeightGraph g;
  g.a.setZero(n, n);
  const double l1 = params.lambda1;
  const double l2 = params.lambda2;
  const bool y_complete = ds.y_fully_observed();

  parallel_for(n, options.threads, [&](Index i1) {
    const double* x1 = &xr[static_cast<std::size_t>(i1 * p)];
    const std::uint8_t* m1 = &mr[static_cast<std::size_t>(i1 * p)];
    const double y1 = ds.y(i1);
    const bool y1_obs = y_complete || ds.y_observed(i1);
    for (Index i2 = i1 + 1; i2 < n; ++i2) {
      const double* x2 = &xr[static_cast<std::size_t>(i2 * p)];
      const std::uint8_t* m2 = &mr[static_cast<std::size_t>(i2 * p)];
      double dist2 = 0.0;
      for (Index k = 0; k < p; ++k) {
        if (!(m1[k] & m2[k])) continue;
        if (discrete[static_cast<std::size_t>(k)]) {
          dist2 += x1[k] == x2[k] ? 0.0 : 1.0;
        } else {
          double d = x1[k] - x2[k];
          dist2 += d * d;
        }
      }
      double exponent = l2 * dist2;
      if (y1_obs && (y_complete || ds.y_observed(i2))) {
        double dy = y1 - ds.y(i2);
        exponent += l1 * dy * dy;
      }
      g.a(i2, i1) = std::exp(-exponent);
    }
  });
  if (options.include_diagonal) g.a.diagonal().setOnes();

  // Row sums from the stored lower triangle in one contiguous sweep; each
  // stored pair contributes to both its row and its column.
  Vector row_sums = Vector::Zero(n);
  for (Index j = 0; j < n; ++j) {
    row_sums(j) += g.a(j, j);
    double col_acc = 0.0;
    for (Index i = j + 1; i < n; ++i) {
      double v = g.a(i, j);
      row_sums(i) += v;
      col_acc += v;
    }
    row_sums(j) += col_acc;
  }

  std::vector<std::uint8_t> degenerate(static_cast<std::size_t>(n), 0);
  Index degenerate_count = 0;
  for (Index i = 0; i < n; ++i)
    if (row_sums(i) < kRowUnderflow) {
      degenerate[static_cast<std::size_t>(i)] = 1;
      ++degenerate_count;
    }
  if (degenerate_count == n)
    throw Error(errc::all_rows_degenerate,
                "every weight row underflowed; the scale parameters are far too large");

  // Mirror the triangle and normalize in one column-parallel pass: the upper
  // half of a is written while only the lower half is read.
  g.w.resize(n, n);
  parallel_for(n, options.threads, [&](Index j) {
    for (Index i = 0; i < n; ++i) {
      double v = i > j ? g.a(i, j) : (i < j ? g.a(j, i) : g.a(j, j));
      if (i < j) g.a(i, j) = v;
      g.w(i, j) = degenerate[static_cast<std::size_t>(i)] ? 0.0 : v / row_sums(i);
    }
  });

  // lambda -> infinity limit: all mass on the strongest neighbor.
  for (Index i = 0; i < n; ++i) {
    if (!degenerate[static_cast<std::size_t>(i)]) continue;
    Index best = -1;
    double best_val = -1.0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      if (g.a(i, j) > best_val) {
        best_val = g.a(i, j);
        best = j;
      }
    }
    g.w(i, best) = 1.0;
    g.row_fallbacks.push_back(i);
  }
  return g;
}

}  // namespace ssi
