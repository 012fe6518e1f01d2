#include "robust_unmix/cenmf.hpp"

#include "robust_unmix/errors.hpp"
#include "robust_unmix/init.hpp"
#include "robust_unmix/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace robust_unmix {

namespace {

double sigma2_from_residual(double residual_norm2, Index D, Index N, double alpha, double floor) {
  const double value = alpha / (2.0 * static_cast<double>(D) * static_cast<double>(N)) * residual_norm2;
  return std::max(value, floor);
}

double augmented_from_norms(const Vector& norms, const Vector& u, double w_mass, double sigma2, double lambda) {
  double value = 0.0;
  for (Index d = 0; d < norms.size(); ++d) value += u[d] * norms[d] / sigma2 + welsch_conjugate(u[d]);
  return value + 2.0 * lambda * w_mass;
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string("non-finite values in ") + what);
}

}  // namespace

Vector band_weights_from_norms(const Vector& band_norms, double sigma2) {
  if (!(sigma2 > 0.0)) throw NonPositiveSigma("sigma2 must be > 0");
  Vector u(band_norms.size());
  for (Index d = 0; d < band_norms.size(); ++d) u[d] = std::max(std::exp(-band_norms[d] / sigma2), kMinBandWeight);
  return u;
}

BandWeights band_weights(const Matrix& Y, const Matrix& X, const Matrix& W, double sigma2) {
  return BandWeights(band_weights_from_norms(band_residual_norms(Y, X, W), sigma2));
}

double update_sigma2(const Matrix& Y, const Matrix& X, const Matrix& W, double alpha, double sigma2_floor) {
  if (!(alpha > 0.0)) throw ValidationError("alpha must be > 0");
  return sigma2_from_residual(frobenius_loss(Y, X, W), Y.rows(), Y.cols(), alpha, sigma2_floor);
}

double default_sigma2_floor(const Matrix& Y) {
  const double mean_square = Y.squaredNorm() / static_cast<double>(Y.size());
  return std::max(1e-10 * mean_square, std::numeric_limits<double>::min());
}

double estimate_lambda(const Matrix& Y) {
  const Index D = Y.rows();
  const Index N = Y.cols();
  if (N < 2) throw ValidationError("lambda estimate needs at least two pixels");
  const double root_n = std::sqrt(static_cast<double>(N));
  double total = 0.0;
  bool any_band = false;
  for (Index d = 0; d < D; ++d) {
    const double l2 = Y.row(d).norm();
    if (!(l2 > 0.0)) continue;
    any_band = true;
    const double l1 = Y.row(d).cwiseAbs().sum();
    const double sparseness = (root_n - l1 / l2) / (root_n - 1.0);
    total += std::clamp(sparseness, 0.0, 1.0);
  }
  if (!any_band) throw DegenerateBand("every band of the data is zero");
  return total / std::sqrt(static_cast<double>(D));
}

double resolve_lambda(const Matrix& Y, const SolverConfig& config) {
  return config.lambda ? *config.lambda : estimate_lambda(Y);
}

SolveReport cenmf_solve_from(const Matrix& Y, const Matrix& X0, const Matrix& W0, const SolverConfig& config,
                             const CenmfControls& controls) {
  config.validate();
  check_shapes(Y, X0, W0);
  check_nonnegative_finite(Y);
  check_nonnegative_finite(X0);
  check_nonnegative_finite(W0);
  if (controls.frozen_sigma2 && !(*controls.frozen_sigma2 > 0.0)) throw NonPositiveSigma("frozen sigma2 must be > 0");

  const Index D = Y.rows();
  const Index N = Y.cols();
  const double lambda = resolve_lambda(Y, config);
  const double floor = config.sigma2_floor.value_or(default_sigma2_floor(Y));
  const double alpha = config.resolved_alpha(N);

  Matrix X = X0;
  Matrix W = W0;
  Vector u = Vector::Ones(D);
  Vector norms = band_residual_norms(Y, X, W);
  double mass = W.sum();
  double sigma2 = controls.frozen_sigma2.value_or(sigma2_from_residual(norms.sum(), D, N, alpha, floor));
  double start = augmented_from_norms(norms, u, mass, sigma2, lambda);
  const double threshold = config.outer_tol * (1.0 + std::abs(start));

  std::vector<double> trace;
  std::vector<double> after_trace;
  std::vector<double> sigma_trace;
  Termination termination = Termination::MaxIterations;
  int outer = 0;
  int inner_total = 0;

  for (int t = 0; t < config.max_outer; ++t) {
    const Vector scale = (u.array() / sigma2).sqrt();
    const Matrix Yhat = scale.asDiagonal() * Y;
    const Matrix Xhat = scale.asDiagonal() * X;
    InnerResult inner =
        inner_solve(Yhat, Xhat, W, lambda, config.inner_tol, config.max_inner, config.denom_eps, Penalty::L1,
                    controls.observer);
    for (Index d = 0; d < D; ++d) {
      // A weight that underflowed to a zero scale leaves that band's endmember row untouched.
      if (scale[d] > 0.0) X.row(d) = inner.X.row(d) / scale[d];
    }
    W = std::move(inner.W);
    require_finite(X, "endmembers");
    require_finite(W, "abundances");

    const Vector next_norms = band_residual_norms(Y, X, W);
    const double next_mass = W.sum();
    const double after = cenmf_objective_from_norms(next_norms, next_mass, sigma2, lambda);
    trace.push_back(start);
    after_trace.push_back(after);
    sigma_trace.push_back(sigma2);
    ++outer;
    inner_total += inner.iterations;

    const double next_sigma2 =
        controls.frozen_sigma2.value_or(sigma2_from_residual(next_norms.sum(), D, N, alpha, floor));
    if (!controls.freeze_weights) u = band_weights_from_norms(next_norms, next_sigma2);

    // Both sides of the stopping test use the refreshed sigma^2.
    const double g_next = cenmf_objective_from_norms(next_norms, next_mass, next_sigma2, lambda);
    const double g_prev = cenmf_objective_from_norms(norms, mass, next_sigma2, lambda);

    norms = next_norms;
    mass = next_mass;
    sigma2 = next_sigma2;
    start = augmented_from_norms(norms, u, mass, sigma2, lambda);

    if (std::abs(g_next - g_prev) < threshold) {
      termination = Termination::ToleranceReached;
      break;
    }
  }

  SolveReport report{Endmembers(std::move(X)), Abundances(std::move(W)), BandWeights(std::move(u)), std::move(trace),
                     std::move(after_trace), std::move(sigma_trace), termination, lambda, outer, inner_total};
  return report;
}

SolveReport solve(const Matrix& Y, Index K, const SolverConfig& config) {
  config.validate();
  validate(Y, K);
  const Endmembers X0 = init_endmembers(Y, K, config.seed);
  const Abundances W0 = init_abundances(Y, X0.data());
  return cenmf_solve_from(Y, X0.data(), W0.data(), config);
}

}  // namespace robust_unmix
