#include "robust_unmix/objective.hpp"

#include "robust_unmix/errors.hpp"

#include <cmath>
#include <string>

namespace robust_unmix {

namespace {

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void check_sigma(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw NonPositiveSigma("sigma2 must be finite and > 0");
}

}  // namespace

void check_shapes(const Matrix& Y, const Matrix& X, const Matrix& W) {
  if (X.rows() != Y.rows() || W.cols() != Y.cols() || X.cols() != W.rows()) {
    throw ShapeMismatch("shapes do not conform: Y " + shape(Y) + ", X " + shape(X) + ", W " + shape(W));
  }
}

double frobenius_loss(const Matrix& Y, const Matrix& X, const Matrix& W) {
  check_shapes(Y, X, W);
  return (Y - X * W).squaredNorm();
}

Vector band_residual_norms(const Matrix& Y, const Matrix& X, const Matrix& W) {
  check_shapes(Y, X, W);
  return (Y - X * W).rowwise().squaredNorm();
}

double cenmf_objective_from_norms(const Vector& band_norms, double w_mass, double sigma2, double lambda) {
  check_sigma(sigma2);
  double loss = 0.0;
  for (Index d = 0; d < band_norms.size(); ++d) loss -= std::exp(-band_norms[d] / sigma2);
  return loss + 2.0 * lambda * w_mass;
}

double correntropy_loss(const Matrix& Y, const Matrix& X, const Matrix& W, double sigma2) {
  check_sigma(sigma2);
  return cenmf_objective_from_norms(band_residual_norms(Y, X, W), 0.0, sigma2, 0.0);
}

double cenmf_objective(const Matrix& Y, const Matrix& X, const Matrix& W, double sigma2, double lambda) {
  check_sigma(sigma2);
  return cenmf_objective_from_norms(band_residual_norms(Y, X, W), W.sum(), sigma2, lambda);
}

double welsch_conjugate(double u) { return u * std::log(u) - u; }

double augmented_objective(const Matrix& Y, const Matrix& X, const Matrix& W, const Vector& u, double sigma2,
                           double lambda) {
  check_sigma(sigma2);
  if (u.size() != Y.rows()) throw ShapeMismatch("band weight vector length differs from band count");
  check_band_weights(u);
  const Vector norms = band_residual_norms(Y, X, W);
  double value = 0.0;
  for (Index d = 0; d < norms.size(); ++d) value += u[d] * norms[d] / sigma2 + welsch_conjugate(u[d]);
  return value + 2.0 * lambda * W.sum();
}

}  // namespace robust_unmix
