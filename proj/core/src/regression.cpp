#include "ssi/regression.hpp"

#include <string>

#include <Eigen/Dense>

namespace ssi {

OlsFit fit_ols(const Matrix& x, const Vector& y) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (y.size() != n) throw Error(errc::dimension_mismatch, "response length does not match design");
  if (n <= p)
    throw Error(errc::singular_design,
                "need n > p, got n=" + std::to_string(n) + ", p=" + std::to_string(p));

  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  qr.setThreshold(1e-12);
  if (qr.rank() < p)
    throw Error(errc::singular_design, "design is rank deficient (rank " +
                                           std::to_string(qr.rank()) + " of " + std::to_string(p) + ")");

  OlsFit fit;
  fit.beta_hat = qr.solve(y);
  fit.fitted = x * fit.beta_hat;
  fit.residuals = y - fit.fitted;
  fit.sigma2_hat = fit.residuals.squaredNorm() / static_cast<double>(n - p);

  // h_ii from the thin Q factor; pivoting permutes columns, not the span.
  Matrix thin_q = qr.householderQ() * Matrix::Identity(n, p);
  fit.leverages = thin_q.rowwise().squaredNorm();
  return fit;
}

double predict(const OlsFit& fit, const Vector& x0) {
  if (x0.size() != fit.beta_hat.size())
    throw Error(errc::dimension_mismatch, "predictor length does not match coefficients");
  return x0.dot(fit.beta_hat);
}

Vector loo_predictions(const OlsFit& fit, const Matrix& x, const Vector& y) {
  const Index n = x.rows();
  if (y.size() != n || fit.residuals.size() != n || fit.leverages.size() != n)
    throw Error(errc::dimension_mismatch, "fit does not match data dimensions");
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    double h = fit.leverages(i);
    if (h >= 1.0 - 1e-12)
      throw Error(errc::leverage_one, "subject " + std::to_string(i) + " has leverage " +
                                          std::to_string(h) + "; row interpolates the fit");
    out(i) = y(i) - fit.residuals(i) / (1.0 - h);
  }
  return out;
}

}  // namespace ssi
