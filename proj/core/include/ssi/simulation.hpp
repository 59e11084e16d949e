#pragma once

#include <string>

#include "ssi/rng.hpp"
#include "ssi/types.hpp"

namespace ssi {

enum class CovStructure { exchangeable, ar1 };
enum class CovariateLaw { normal, exponential };
enum class Mechanism { mcar, mar, mnar, mnar2, mnar3 };
enum class PatternFamily { blockwise7, none };

/// Full generative description of one experiment cell. Defaults follow the
/// main design: p = 10 with 2 binary and 8 correlated continuous covariates,
/// a unit coefficient vector, and a 50% missingness target.
///
/// target_missing_rate is the per-subject missing probability under
/// blockwise7 (each flagged subject then draws one of the 7 patterns) and the
/// fraction of all n*p cells under the patternless family.
struct SimScenario {
  std::string id = "scenario";
  Index n = 500;
  Index p = 10;
  double rho = 0.5;
  CovStructure cov_structure = CovStructure::exchangeable;
  CovariateLaw covariate_law = CovariateLaw::normal;
  double r2 = 0.6;
  Mechanism mechanism = Mechanism::mcar;
  PatternFamily pattern_family = PatternFamily::blockwise7;
  double target_missing_rate = 0.5;
  double train_fraction = 0.7;
  std::uint64_t seed = 1;

  void check() const;
};

struct SimDraw {
  MissingDataset dataset;
  Matrix x_true;
  Vector beta_true;
  double sigma2 = 0.0;
  double realized_missing = 0.0;
  std::vector<Index> train_idx;
  std::vector<Index> test_idx;
};

/// Covariance matrix of the continuous block and its symmetric square root.
Matrix continuous_covariance(const SimScenario& scenario);
Matrix matrix_sqrt(const Matrix& sigma);

/// First two columns iid Bernoulli(0.5) classes {0,1}; remaining p-2 columns
/// have the requested covariance, from normals or centered standard
/// exponentials pushed through the symmetric square root.
Matrix gen_covariates(const SimScenario& scenario, Rng& rng);

/// Error variance hitting the target R^2: sigma^2 = var(X beta) (1-R^2)/R^2
/// with var(X beta) computed analytically for the scenario's covariance.
double calibrate_sigma2(const SimScenario& scenario);

/// Mechanism score b such that the missing probability is
/// 1/(1 + exp(-b - alpha)). For cell-wise mechanisms (mnar2, mnar3) the score
/// depends on (i, j); subject-level mechanisms ignore j.
double mechanism_score(const SimScenario& scenario, const Matrix& x, const Vector& epsilons,
                       Index i, Index j);

/// Draws the observation mask: per-subject decisions with a uniformly chosen
/// pattern under blockwise7, per-cell decisions otherwise. The intercept
/// alpha is calibrated by bisection on this draw's realized rate to within
/// +-0.5% of the target where the sample granularity allows.
Mask assign_missing(const SimScenario& scenario, const Matrix& x, const Vector& epsilons, Rng& rng,
                    double* realized_rate = nullptr);

/// Full pipeline: covariates, response Y = X beta + eps with beta = 1, mask,
/// and a train/test split. Deterministic given the scenario seed.
SimDraw draw(const SimScenario& scenario);

Mechanism mechanism_from_string(const std::string& name);
PatternFamily pattern_from_string(const std::string& name);
CovStructure cov_structure_from_string(const std::string& name);
CovariateLaw covariate_law_from_string(const std::string& name);

}  // namespace ssi
