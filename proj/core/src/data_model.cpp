#include "ssi/data_model.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <unordered_set>

namespace ssi {

namespace {

void check_dimensions(const MissingDataset& ds) {
  const Index n = ds.x.rows();
  const Index p = ds.x.cols();
  if (n < 2) throw Error(errc::dimension_mismatch, "need at least 2 subjects, got " + std::to_string(n));
  if (ds.mask.rows() != n || ds.mask.cols() != p)
    throw Error(errc::dimension_mismatch, "mask shape does not match covariate matrix");
  if (ds.y.size() != n)
    throw Error(errc::dimension_mismatch, "response length does not match subject count");
  if (static_cast<Index>(ds.schema.size()) != p)
    throw Error(errc::dimension_mismatch, "schema covers " + std::to_string(ds.schema.size()) +
                                              " columns, matrix has " + std::to_string(p));
  if (!ds.y_mask.empty() && static_cast<Index>(ds.y_mask.size()) != n)
    throw Error(errc::dimension_mismatch, "response mask length does not match subject count");
  std::unordered_set<std::string> names;
  for (const auto& col : ds.schema) {
    if (!names.insert(col.name).second)
      throw Error(errc::schema_mismatch, "duplicate column name '" + col.name + "'");
    if (col.kind == ColumnKind::discrete && col.classes.size() < 2)
      throw Error(errc::schema_mismatch, "discrete column '" + col.name + "' needs at least 2 classes");
    if (col.kind == ColumnKind::continuous && !col.classes.empty())
      throw Error(errc::schema_mismatch, "continuous column '" + col.name + "' must not declare classes");
  }
}

}  // namespace

PatternIndex validate(const MissingDataset& ds) {
  check_dimensions(ds);
  const Index n = ds.n();
  const Index p = ds.p();

  PatternIndex idx;
  idx.d_sets.resize(static_cast<std::size_t>(n));
  idx.s0.resize(static_cast<std::size_t>(p));
  idx.s1.resize(static_cast<std::size_t>(p));

  for (Index i = 0; i < n; ++i) {
    auto& di = idx.d_sets[static_cast<std::size_t>(i)];
    for (Index j = 0; j < p; ++j) {
      if (ds.observed(i, j)) {
        di.push_back(j);
        idx.s1[static_cast<std::size_t>(j)].push_back(i);
        const auto& col = ds.schema[static_cast<std::size_t>(j)];
        if (col.kind == ColumnKind::discrete && col.class_index(ds.x(i, j)) < 0)
          throw Error(errc::undeclared_class, "subject " + std::to_string(i) + ", column '" + col.name +
                                                  "': value not in declared class list");
      } else {
        idx.s0[static_cast<std::size_t>(j)].push_back(i);
      }
    }
  }

  for (Index j = 0; j < p; ++j) {
    const auto& s1j = idx.s1[static_cast<std::size_t>(j)];
    if (s1j.empty())
      throw Error(errc::fully_missing_column,
                  "column '" + ds.schema[static_cast<std::size_t>(j)].name + "' has no observed entries");
    if (s1j.size() < 2) idx.sparse_columns.push_back(j);
  }

  // d0 over consecutive subjects in the given order; D sets are sorted,
  // so the overlap is a linear merge.
  Index max_overlap = 0;
  for (Index i = 0; i + 1 < n; ++i) {
    const auto& a = idx.d_sets[static_cast<std::size_t>(i)];
    const auto& b = idx.d_sets[static_cast<std::size_t>(i + 1)];
    Index overlap = 0;
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
      if (a[ia] == b[ib]) { ++overlap; ++ia; ++ib; }
      else if (a[ia] < b[ib]) ++ia;
      else ++ib;
    }
    max_overlap = std::max(max_overlap, overlap);
  }
  idx.d0 = 1 + max_overlap;
  return idx;
}

double missing_rate(const MissingDataset& ds) {
  const Index n = ds.x.rows();
  const Index p = ds.x.cols();
  if (n == 0 || p == 0) return 0.0;
  Index zeros = 0;
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < n; ++i)
      if (ds.mask(i, j) == 0) ++zeros;
  return static_cast<double>(zeros) / static_cast<double>(n * p);
}

std::pair<MissingDataset, std::vector<Index>> sort_by_pattern(const MissingDataset& ds) {
  const Index n = ds.n();
  const Index p = ds.p();
  std::map<std::vector<std::uint8_t>, std::vector<Index>> groups;
  for (Index i = 0; i < n; ++i) {
    std::vector<std::uint8_t> key(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) key[static_cast<std::size_t>(j)] = ds.mask(i, j);
    groups[key].push_back(i);
  }
  std::vector<Index> perm;
  perm.reserve(static_cast<std::size_t>(n));
  for (const auto& [key, rows] : groups)
    for (Index i : rows) perm.push_back(i);

  MissingDataset out;
  out.schema = ds.schema;
  out.y.resize(n);
  out.x.resize(n, p);
  out.mask.resize(n, p);
  if (!ds.y_mask.empty()) out.y_mask.resize(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    Index src = perm[static_cast<std::size_t>(k)];
    out.y(k) = ds.y(src);
    out.x.row(k) = ds.x.row(src);
    out.mask.row(k) = ds.mask.row(src);
    if (!ds.y_mask.empty())
      out.y_mask[static_cast<std::size_t>(k)] = ds.y_mask[static_cast<std::size_t>(src)];
  }
  return {std::move(out), std::move(perm)};
}

}  // namespace ssi
