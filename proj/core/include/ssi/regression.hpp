#pragma once

#include "ssi/types.hpp"

namespace ssi {

/// Ordinary least squares fit on a full-column-rank design.
struct OlsFit {
  Vector beta_hat;
  double sigma2_hat = 0.0;
  Vector leverages;  // hat-matrix diagonal h_ii
  Vector residuals;  // y - x * beta_hat
  Vector fitted;
};

/// Fits y ~ x by Householder QR with column pivoting. No intercept is added;
/// prepend a ones column for one. Throws SingularDesign when n <= p or the
/// revealed rank is deficient at a 1e-12 relative threshold.
OlsFit fit_ols(const Matrix& x, const Vector& y);

double predict(const OlsFit& fit, const Vector& x0);

/// Exact leave-one-out predictions via the leverage identity
/// yhat_i = y_i - e_i / (1 - h_ii). Throws LeverageOne when some
/// h_ii >= 1 - 1e-12 (an interpolating row).
Vector loo_predictions(const OlsFit& fit, const Matrix& x, const Vector& y);

}  // namespace ssi
