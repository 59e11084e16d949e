#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ssi/data_model.hpp"
#include "ssi/imputer.hpp"
#include "test_util.hpp"

using namespace ssi;
using namespace ssi::test;

namespace {

/// Random instance where every missing subject can reach an observed one, by
/// keeping one fully observed column as a bridge.
MissingDataset connected_instance(Rng& rng, Index n, Index p, double missing_prob) {
  auto ds = random_dataset(rng, n, p, missing_prob, 2);
  ds.mask.col(0).setOnes();
  return ds;
}

}  // namespace

TEST_CASE("single missing subject with 0.5/0.5 weights on {2, 4} imputes 3") {
  Matrix w(3, 3);
  w << 0.0, 0.5, 0.5,
       0.5, 0.0, 0.5,
       0.5, 0.5, 0.0;
  Vector obs(2);
  obs << 2.0, 4.0;
  auto solve = solve_continuous(w, {0}, {1, 2}, obs);
  CHECK(solve.values(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(solve.status == SolveStatus::direct);
}

TEST_CASE("two coupled missing subjects solve the hand 2x2 system") {
  // W_S0 = [[0, .5], [.5, 0]], C = [1, 2] -> x = [8/3, 10/3]
  Matrix w = Matrix::Zero(4, 4);
  w(0, 1) = 0.5; w(0, 2) = 0.5;          // missing 0: half on missing 1, half on observed 2
  w(1, 0) = 0.5; w(1, 3) = 0.5;          // missing 1: half on missing 0, half on observed 3
  w(2, 0) = 1.0; w(3, 1) = 1.0;          // observed rows (content irrelevant)
  Vector obs(2);
  obs << 2.0, 4.0;                        // C = [.5*2, .5*4] = [1, 2]
  auto solve = solve_continuous(w, {0, 1}, {2, 3}, obs);
  CHECK(solve.values(0) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
  CHECK(solve.values(1) == doctest::Approx(10.0 / 3.0).epsilon(1e-12));
  CHECK(solve.status == SolveStatus::direct);

  auto iter = solve_continuous_iterative(w, {0, 1}, {2, 3}, obs, 1e-12, 10000);
  CHECK(iter.values(0) == doctest::Approx(8.0 / 3.0).epsilon(1e-8));
  CHECK(iter.values(1) == doctest::Approx(10.0 / 3.0).epsilon(1e-8));
  CHECK(iter.converged);
}

TEST_CASE("constant observed column is a fixed point") {
  auto ds = make_dataset({1.0, 2.0, 3.0, 4.0},
                         {{5.0, 1.0}, {5.0, 2.0}, {0.0, 3.0}, {0.0, 4.0}},
                         {{1, 1}, {1, 1}, {0, 1}, {0, 1}});
  auto g = build_graph(ds, ScaleParams::from_lambdas(0.3, 0.3));
  auto direct = impute_continuous_column(g, ds, 0);
  for (Index r = 0; r < direct.values.size(); ++r)
    CHECK(direct.values(r) == doctest::Approx(5.0).epsilon(1e-12));

  auto iter = impute_continuous_iterative(g, ds, 0, 1e-10, 1000);
  for (Index r = 0; r < iter.values.size(); ++r)
    CHECK(iter.values(r) == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("decoupled missing subjects converge in one iteration") {
  // missing rows place no weight on each other
  Matrix w = Matrix::Zero(4, 4);
  w(0, 2) = 1.0;
  w(1, 3) = 1.0;
  w(2, 3) = 1.0; w(3, 2) = 1.0;
  Vector obs(2);
  obs << -1.0, 7.0;
  auto iter = solve_continuous_iterative(w, {0, 1}, {2, 3}, obs, 1e-12, 50);
  CHECK(iter.values(0) == doctest::Approx(-1.0));
  CHECK(iter.values(1) == doctest::Approx(7.0));
  CHECK(iter.iterations <= 2);
}

TEST_CASE("direct solve and fixed point agree on random connected instances") {
  Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    Index n = 10 + static_cast<Index>(rng.below(41));
    auto ds = connected_instance(rng, n, 4, 0.4);
    auto g = build_graph(ds, ScaleParams::from_lambdas(0.5, 0.5));
    for (Index j = 1; j < ds.p(); ++j) {
      auto direct = impute_continuous_column(g, ds, j);
      if (direct.status != SolveStatus::direct) continue;
      auto iter = impute_continuous_iterative(g, ds, j, 1e-12, 20000);
      REQUIRE(iter.converged);
      CHECK((direct.values - iter.values).lpNorm<Eigen::Infinity>() < 1e-8);
    }
  }
}

TEST_CASE("isolated missing component falls back to the column mean") {
  // subjects 2 and 3 only reference each other in the missing column
  Matrix w = Matrix::Zero(4, 4);
  w(2, 3) = 1.0;
  w(3, 2) = 1.0;
  w(0, 1) = 1.0;
  w(1, 0) = 1.0;
  Vector obs(2);
  obs << 1.0, 5.0;
  auto solve = solve_continuous(w, {2, 3}, {0, 1}, obs);
  CHECK(solve.status == SolveStatus::mean_fallback);
  CHECK(solve.mean_fallback_count == 2);
  CHECK(solve.values(0) == doctest::Approx(3.0));
  CHECK(solve.values(1) == doctest::Approx(3.0));
}

TEST_CASE("mixed isolated and coupled subjects split correctly") {
  // missing 0 couples to observed 3; missing 1,2 form an isolated pair
  Matrix w = Matrix::Zero(5, 5);
  w(0, 3) = 1.0;
  w(1, 2) = 1.0;
  w(2, 1) = 1.0;
  w(3, 0) = 1.0;
  w(4, 3) = 1.0;
  Vector obs(2);
  obs << 2.0, 8.0;  // subjects 3, 4
  auto solve = solve_continuous(w, {0, 1, 2}, {3, 4}, obs);
  CHECK(solve.status == SolveStatus::mean_fallback);
  CHECK(solve.mean_fallback_count == 2);
  CHECK(solve.values(0) == doctest::Approx(2.0));  // all mass on subject 3
  CHECK(solve.values(1) == doctest::Approx(5.0));  // observed mean
  CHECK(solve.values(2) == doctest::Approx(5.0));
}

TEST_CASE("absorbing discrete labels propagate the single class") {
  auto schema = std::vector<ColumnSchema>{discrete_col("d", {0.0, 1.0, 2.0}),
                                          continuous_col("c")};
  auto ds = make_dataset({1.0, 1.1, 0.9, 1.05},
                         {{1.0, 0.3}, {1.0, 0.1}, {0.0, 0.2}, {0.0, 0.25}},
                         {{1, 1}, {1, 1}, {0, 1}, {0, 1}}, schema);
  auto g = build_graph(ds, ScaleParams::from_lambdas(0.5, 0.5));
  auto solve = impute_discrete_column(g, ds, 0);
  REQUIRE(solve.hard.size() == 2);
  CHECK(solve.hard[0] == 1);
  CHECK(solve.hard[1] == 1);
  for (Index r = 0; r < solve.labels.probs.rows(); ++r)
    CHECK(solve.labels.probs(r, 1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(solve.labels.converged);
}

TEST_CASE("even split ties break to the lowest class index") {
  Matrix w = Matrix::Zero(3, 3);
  w(0, 1) = 0.5;
  w(0, 2) = 0.5;
  w(1, 2) = 1.0;
  w(2, 1) = 1.0;
  auto solve = solve_discrete(w, {0}, {1, 2}, {0, 1}, 2, 1e-10, 100);
  CHECK(solve.labels.probs(0, 0) == doctest::Approx(0.5));
  CHECK(solve.labels.probs(0, 1) == doctest::Approx(0.5));
  CHECK(solve.hard[0] == 0);
}

TEST_CASE("uncoupled rows take the observed class mixture in one sweep") {
  Matrix w = Matrix::Zero(4, 4);
  w(0, 1) = 0.25;
  w(0, 2) = 0.25;
  w(0, 3) = 0.5;
  w(1, 2) = 1.0;
  w(2, 1) = 1.0;
  w(3, 1) = 1.0;
  auto solve = solve_discrete(w, {0}, {1, 2, 3}, {0, 1, 2}, 3, 1e-12, 100);
  CHECK(solve.labels.probs(0, 0) == doctest::Approx(0.25));
  CHECK(solve.labels.probs(0, 1) == doctest::Approx(0.25));
  CHECK(solve.labels.probs(0, 2) == doctest::Approx(0.5));
  CHECK(solve.hard[0] == 2);
}

TEST_CASE("label rows stay on the simplex across random instances") {
  Rng rng(202);
  for (int trial = 0; trial < 25; ++trial) {
    Index n = 8 + static_cast<Index>(rng.below(20));
    auto ds = connected_instance(rng, n, 3, 0.35);
    // recast column 1 as discrete with 3 classes
    ds.schema[1] = discrete_col("d", {0.0, 1.0, 2.0});
    for (Index i = 0; i < n; ++i)
      ds.x(i, 1) = static_cast<double>(rng.below(3));
    auto g = build_graph(ds, ScaleParams::from_lambdas(0.4, 0.4));
    auto solve = impute_discrete_column(g, ds, 1);
    CHECK(solve.labels.converged);
    for (Index r = 0; r < solve.labels.probs.rows(); ++r) {
      CHECK(solve.labels.probs.row(r).sum() == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(solve.labels.probs.row(r).minCoeff() >= 0.0);
      CHECK(solve.labels.probs.row(r).maxCoeff() <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("impute_all is the identity on complete data") {
  Rng rng(303);
  auto ds = random_dataset(rng, 12, 4, 0.0);
  auto result = impute_all(ds, ScaleParams::from_lambdas(0.5, 0.5));
  CHECK((result.x_hat - ds.x).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(result.imputed_mask.cast<int>().sum() == 0);
}

TEST_CASE("impute_all composes per-column imputation") {
  Rng rng(404);
  auto ds = connected_instance(rng, 15, 4, 0.3);
  auto g = build_graph(ds, ScaleParams::from_lambdas(0.5, 0.5));
  auto result = impute_all(ds, ScaleParams::from_lambdas(0.5, 0.5));
  for (Index j = 0; j < ds.p(); ++j) {
    auto solve = impute_continuous_column(g, ds, j);
    for (std::size_t r = 0; r < solve.subjects.size(); ++r)
      CHECK(result.x_hat(solve.subjects[r], j) == solve.values(static_cast<Index>(r)));
  }
  // observed entries untouched
  for (Index j = 0; j < ds.p(); ++j)
    for (Index i = 0; i < ds.n(); ++i)
      if (ds.observed(i, j)) CHECK(result.x_hat(i, j) == ds.x(i, j));
}

TEST_CASE("non-fallback continuous imputations stay in the observed hull") {
  Rng rng(505);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    Index n = 10 + static_cast<Index>(rng.below(30));
    auto ds = connected_instance(rng, n, 5, 0.45);
    auto result = impute_all(ds, ScaleParams::from_lambdas(0.6, 0.6));
    for (Index j = 0; j < ds.p(); ++j) {
      if (result.diagnostics[static_cast<std::size_t>(j)].status != SolveStatus::direct) continue;
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (Index i = 0; i < ds.n(); ++i)
        if (ds.observed(i, j)) {
          lo = std::min(lo, ds.x(i, j));
          hi = std::max(hi, ds.x(i, j));
        }
      for (Index i = 0; i < ds.n(); ++i)
        if (result.imputed_mask(i, j)) {
          CHECK(result.x_hat(i, j) >= lo - 1e-9);
          CHECK(result.x_hat(i, j) <= hi + 1e-9);
          ++checked;
        }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("payload poisoning does not change the imputation") {
  Rng rng(606);
  auto ds = connected_instance(rng, 20, 4, 0.35);
  auto clean = impute_all(ds, ScaleParams::from_lambdas(0.5, 0.5));
  poison_masked_payload(ds);
  auto poisoned = impute_all(ds, ScaleParams::from_lambdas(0.5, 0.5));
  CHECK((clean.x_hat - poisoned.x_hat).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("imputation is deterministic") {
  Rng rng(707);
  auto ds = connected_instance(rng, 25, 5, 0.4);
  auto a = impute_all(ds, ScaleParams::from_lambdas(0.4, 0.7));
  auto b = impute_all(ds, ScaleParams::from_lambdas(0.4, 0.7));
  CHECK((a.x_hat - b.x_hat).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("sssi with p = 1 reduces to impute_all exactly") {
  auto ds = make_dataset({1.0, 2.0, 3.0, 4.0, 5.0},
                         {{0.5}, {1.5}, {0.0}, {2.5}, {0.0}},
                         {{1}, {1}, {0}, {1}, {0}});
  auto params = ScaleParams::from_lambdas(0.8, 0.8);
  auto base = impute_all(ds, params);
  auto sssi = impute_sssi(ds, params, 1);
  CHECK((base.x_hat - sssi.x_hat).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(sssi.sweeps == 1);
}

TEST_CASE("sssi on complete data is the identity for any sweep count") {
  Rng rng(808);
  auto ds = random_dataset(rng, 10, 3, 0.0);
  auto result = impute_sssi(ds, ScaleParams::from_lambdas(0.5, 0.5), 4);
  CHECK((result.x_hat - ds.x).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("sssi uses other columns' imputations inside the kernel") {
  Rng rng(909);
  auto ds = connected_instance(rng, 20, 4, 0.35);
  auto params = ScaleParams::from_lambdas(0.5, 0.5);
  auto base = impute_all(ds, params);
  auto sssi = impute_sssi(ds, params, 2);
  CHECK(sssi.sweeps == 2);
  // same observed entries, generally different imputations
  for (Index j = 0; j < ds.p(); ++j)
    for (Index i = 0; i < ds.n(); ++i)
      if (ds.observed(i, j)) CHECK(sssi.x_hat(i, j) == ds.x(i, j));
  CHECK((base.x_hat - sssi.x_hat).lpNorm<Eigen::Infinity>() > 0.0);
}

TEST_CASE("empty observed set surfaces with the column identity") {
  auto ds = make_dataset({1.0, 2.0}, {{1.0, 0.0}, {2.0, 0.0}}, {{1, 0}, {1, 0}});
  CHECK_THROWS_AS(impute_all(ds, ScaleParams::from_lambdas(0.5, 0.5)), Error);
  auto g = build_graph(ds, ScaleParams::from_lambdas(0.5, 0.5));
  try {
    impute_continuous_column(g, ds, 1);
    FAIL("expected EmptyObservedSet");
  } catch (const Error& e) {
    CHECK(e.code() == errc::empty_observed_set);
  }
}
