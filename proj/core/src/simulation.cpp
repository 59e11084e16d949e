#include "ssi/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Dense>

namespace ssi {

namespace {

constexpr Index kDiscreteColumns = 2;

// The 7 block-wise observed sets (0-based columns, p = 10); the last
// covariate is observed in every pattern.
const std::vector<std::vector<Index>>& blockwise_patterns() {
  static const std::vector<std::vector<Index>> patterns = {
      {0, 1, 2, 9},
      {3, 4, 5, 9},
      {6, 7, 8, 9},
      {0, 1, 2, 3, 4, 5, 9},
      {0, 1, 2, 6, 7, 8, 9},
      {3, 4, 5, 6, 7, 8, 9},
      {0, 1, 2, 3, 4, 5, 6, 7, 8, 9},
  };
  return patterns;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

void SimScenario::check() const {
  if (n < 2) throw Error(errc::invalid_argument, "scenario needs n >= 2");
  if (p < kDiscreteColumns + 1)
    throw Error(errc::invalid_argument, "scenario needs p >= 3 (2 discrete + continuous)");
  if (!(r2 > 0.0 && r2 < 1.0)) throw Error(errc::invalid_argument, "need 0 < r2 < 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error(errc::invalid_argument, "need 0 < train_fraction < 1");
  if (!(target_missing_rate >= 0.0 && target_missing_rate < 1.0))
    throw Error(errc::invalid_argument, "need 0 <= target_missing_rate < 1");
  if (cov_structure == CovStructure::exchangeable) {
    if (!(rho >= 0.0 && rho < 1.0))
      throw Error(errc::invalid_argument, "exchangeable structure needs 0 <= rho < 1");
  } else if (!(rho > -1.0 && rho < 1.0)) {
    throw Error(errc::invalid_argument, "ar1 structure needs |rho| < 1");
  }
  if (pattern_family == PatternFamily::blockwise7) {
    if (p != 10)
      throw Error(errc::invalid_argument, "the 7-pattern family is defined for p = 10");
    if (mechanism == Mechanism::mnar2 || mechanism == Mechanism::mnar3)
      throw Error(errc::invalid_argument,
                  "mnar2/mnar3 are cell-wise mechanisms; use pattern_family = none");
  }
}

Matrix continuous_covariance(const SimScenario& sc) {
  const Index q = sc.p - kDiscreteColumns;
  Matrix sigma(q, q);
  for (Index j1 = 0; j1 < q; ++j1)
    for (Index j2 = 0; j2 < q; ++j2) {
      if (j1 == j2)
        sigma(j1, j2) = 1.0;
      else if (sc.cov_structure == CovStructure::exchangeable)
        sigma(j1, j2) = sc.rho;
      else
        sigma(j1, j2) = std::pow(sc.rho, std::abs(static_cast<double>(j1 - j2)));
    }
  return sigma;
}

Matrix matrix_sqrt(const Matrix& sigma) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
  if (eig.info() != Eigen::Success)
    throw Error(errc::non_positive_definite, "eigendecomposition failed");
  Vector vals = eig.eigenvalues();
  for (Index k = 0; k < vals.size(); ++k) {
    if (vals(k) < -1e-10)
      throw Error(errc::non_positive_definite,
                  "covariance has eigenvalue " + std::to_string(vals(k)));
    vals(k) = std::sqrt(std::max(0.0, vals(k)));
  }
  return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix gen_covariates(const SimScenario& sc, Rng& rng) {
  sc.check();
  const Index n = sc.n;
  const Index q = sc.p - kDiscreteColumns;
  Matrix x(n, sc.p);

  for (Index j = 0; j < kDiscreteColumns; ++j)
    for (Index i = 0; i < n; ++i) x(i, j) = rng.bernoulli(0.5) ? 1.0 : 0.0;

  Matrix z(n, q);
  for (Index j = 0; j < q; ++j)
    for (Index i = 0; i < n; ++i)
      z(i, j) = sc.covariate_law == CovariateLaw::normal ? rng.normal()
                                                         : rng.exponential() - 1.0;
  Matrix root = matrix_sqrt(continuous_covariance(sc));
  x.rightCols(q) = z * root;  // row i becomes Sigma^{1/2} z_i
  return x;
}

double calibrate_sigma2(const SimScenario& sc) {
  sc.check();
  const Index q = sc.p - kDiscreteColumns;
  double var_discrete = 0.25 * static_cast<double>(kDiscreteColumns);
  double var_continuous;
  if (sc.cov_structure == CovStructure::exchangeable) {
    var_continuous = static_cast<double>(q) +
                     static_cast<double>(q) * static_cast<double>(q - 1) * sc.rho;
  } else {
    var_continuous = continuous_covariance(sc).sum();
  }
  double var_signal = var_discrete + var_continuous;
  return var_signal * (1.0 - sc.r2) / sc.r2;
}

double mechanism_score(const SimScenario& sc, const Matrix& x, const Vector& eps, Index i,
                       Index j) {
  switch (sc.mechanism) {
    case Mechanism::mcar:
      return 0.0;
    case Mechanism::mar:
      return 0.5 * x(i, sc.p - 1);
    case Mechanism::mnar:
      return eps(i);
    case Mechanism::mnar2:
      return eps(i) * eps(i);
    case Mechanism::mnar3: {
      double xj = x(i, j);
      double xprev = j > 0 ? x(i, j - 1) : 0.0;  // X_{i0} = 0
      return 0.5 * xj + 0.5 * xj * xj + 0.5 * xj * xprev;
    }
  }
  throw Error(errc::invalid_argument, "unknown mechanism");
}

namespace {

/// Bisection on the intercept of a monotone realized-rate function. Returns
/// the evaluated alpha whose realized rate came closest to the target.
double calibrate_alpha(const std::function<double(double)>& realized, double target) {
  double lo = -8.0, hi = 8.0;
  double step = 8.0;
  while (realized(lo) > target) {
    step *= 2.0;
    lo -= step;
    if (lo < -1e9)
      throw Error(errc::calibration_failed, "cannot bracket the target rate from below");
  }
  step = 8.0;
  while (realized(hi) < target) {
    step *= 2.0;
    hi += step;
    if (hi > 1e9)
      throw Error(errc::calibration_failed, "cannot bracket the target rate from above");
  }
  double best_alpha = lo;
  double best_gap = std::abs(realized(lo) - target);
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    double r = realized(mid);
    double gap = std::abs(r - target);
    if (gap < best_gap) {
      best_gap = gap;
      best_alpha = mid;
    }
    if (gap <= 0.005) return mid;
    if (r < target)
      lo = mid;
    else
      hi = mid;
  }
  return best_alpha;
}

}  // namespace

Mask assign_missing(const SimScenario& sc, const Matrix& x, const Vector& eps, Rng& rng,
                    double* realized_rate) {
  sc.check();
  const Index n = sc.n;
  const Index p = sc.p;
  if (x.rows() != n || x.cols() != p || eps.size() != n)
    throw Error(errc::dimension_mismatch, "covariates or errors do not match the scenario");

  Mask mask = Mask::Ones(n, p);
  if (sc.target_missing_rate == 0.0) {
    if (realized_rate) *realized_rate = 0.0;
    return mask;
  }

  if (sc.pattern_family == PatternFamily::blockwise7) {
    std::vector<double> score(static_cast<std::size_t>(n));
    std::vector<double> u(static_cast<std::size_t>(n));
    std::vector<std::uint64_t> pattern(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      score[static_cast<std::size_t>(i)] = mechanism_score(sc, x, eps, i, -1);
      u[static_cast<std::size_t>(i)] = rng.uniform();
      pattern[static_cast<std::size_t>(i)] = rng.below(7);
    }
    auto realized = [&](double alpha) {
      Index flagged = 0;
      for (Index i = 0; i < n; ++i)
        if (u[static_cast<std::size_t>(i)] < sigmoid(score[static_cast<std::size_t>(i)] + alpha))
          ++flagged;
      return static_cast<double>(flagged) / static_cast<double>(n);
    };
    double alpha = calibrate_alpha(realized, sc.target_missing_rate);
    Index flagged = 0;
    for (Index i = 0; i < n; ++i) {
      if (u[static_cast<std::size_t>(i)] >= sigmoid(score[static_cast<std::size_t>(i)] + alpha))
        continue;
      ++flagged;
      mask.row(i).setZero();
      for (Index j : blockwise_patterns()[static_cast<std::size_t>(pattern[static_cast<std::size_t>(i)])])
        mask(i, j) = 1;
    }
    if (realized_rate) *realized_rate = static_cast<double>(flagged) / static_cast<double>(n);
    return mask;
  }

  // Patternless family: independent cell decisions; the last covariate stays
  // observed except under mnar3, whose formula covers every column.
  const Index maskable = sc.mechanism == Mechanism::mnar3 ? p : p - 1;
  Matrix score(n, maskable);
  Matrix u(n, maskable);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < maskable; ++j) {
      score(i, j) = mechanism_score(sc, x, eps, i, j);
      u(i, j) = rng.uniform();
    }
  const double cells = static_cast<double>(n) * static_cast<double>(p);
  auto realized = [&](double alpha) {
    Index masked = 0;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < maskable; ++j)
        if (u(i, j) < sigmoid(score(i, j) + alpha)) ++masked;
    return static_cast<double>(masked) / cells;
  };
  double alpha = calibrate_alpha(realized, sc.target_missing_rate);
  Index masked = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < maskable; ++j)
      if (u(i, j) < sigmoid(score(i, j) + alpha)) {
        mask(i, j) = 0;
        ++masked;
      }
  if (realized_rate) *realized_rate = static_cast<double>(masked) / cells;
  return mask;
}

SimDraw draw(const SimScenario& sc) {
  sc.check();
  Rng rng(sc.seed);
  const Index n = sc.n;
  const Index p = sc.p;

  SimDraw out;
  out.x_true = gen_covariates(sc, rng);
  out.sigma2 = calibrate_sigma2(sc);
  out.beta_true = Vector::Ones(p);

  Vector eps(n);
  double sd = std::sqrt(out.sigma2);
  for (Index i = 0; i < n; ++i) eps(i) = sd * rng.normal();
  Vector y = out.x_true * out.beta_true + eps;

  Mask mask = assign_missing(sc, out.x_true, eps, rng, &out.realized_missing);

  auto perm = rng.permutation(n);
  Index n_train = static_cast<Index>(std::llround(sc.train_fraction * static_cast<double>(n)));
  n_train = std::clamp<Index>(n_train, 1, n - 1);
  out.train_idx.assign(perm.begin(), perm.begin() + n_train);
  out.test_idx.assign(perm.begin() + n_train, perm.end());
  std::sort(out.train_idx.begin(), out.train_idx.end());
  std::sort(out.test_idx.begin(), out.test_idx.end());

  MissingDataset& ds = out.dataset;
  ds.y = y;
  ds.mask = mask;
  ds.x.resize(n, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < n; ++i) ds.x(i, j) = mask(i, j) ? out.x_true(i, j) : 0.0;
  ds.schema.resize(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) {
    auto& col = ds.schema[static_cast<std::size_t>(j)];
    col.name = "x" + std::to_string(j + 1);
    if (j < kDiscreteColumns) {
      col.kind = ColumnKind::discrete;
      col.classes = {0.0, 1.0};
    } else {
      col.kind = ColumnKind::continuous;
    }
  }
  return out;
}

Mechanism mechanism_from_string(const std::string& name) {
  if (name == "mcar") return Mechanism::mcar;
  if (name == "mar") return Mechanism::mar;
  if (name == "mnar") return Mechanism::mnar;
  if (name == "mnar2") return Mechanism::mnar2;
  if (name == "mnar3") return Mechanism::mnar3;
  throw Error(errc::invalid_argument, "unknown mechanism '" + name + "'");
}

PatternFamily pattern_from_string(const std::string& name) {
  if (name == "blockwise7") return PatternFamily::blockwise7;
  if (name == "none") return PatternFamily::none;
  throw Error(errc::invalid_argument, "unknown pattern family '" + name + "'");
}

CovStructure cov_structure_from_string(const std::string& name) {
  if (name == "exchangeable") return CovStructure::exchangeable;
  if (name == "ar1") return CovStructure::ar1;
  throw Error(errc::invalid_argument, "unknown covariance structure '" + name + "'");
}

CovariateLaw covariate_law_from_string(const std::string& name) {
  if (name == "normal") return CovariateLaw::normal;
  if (name == "exponential") return CovariateLaw::exponential;
  throw Error(errc::invalid_argument, "unknown covariate law '" + name + "'");
}

}  // namespace ssi
