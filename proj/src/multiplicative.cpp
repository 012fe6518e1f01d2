#include "robust_unmix/multiplicative.hpp"

#include "robust_unmix/errors.hpp"
#include "robust_unmix/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace robust_unmix {

double subproblem_objective(const Matrix& Yhat, const Matrix& Xhat, const Matrix& W, double lambda, Penalty penalty) {
  check_shapes(Yhat, Xhat, W);
  const double fit = (Yhat - Xhat * W).squaredNorm();
  switch (penalty) {
    case Penalty::L1:
      return fit + 2.0 * lambda * W.sum();
    case Penalty::HalfNorm:
      return fit + lambda * W.array().sqrt().sum();
  }
  return fit;
}

namespace {

// Products reused between the abundance update and the objective evaluation.
struct AbundanceProducts {
  Matrix xty;   // Xhat^T Yhat
  Matrix gram;  // Xhat^T Xhat
};

AbundanceProducts abundance_products(const Matrix& Yhat, const Matrix& Xhat) {
  return AbundanceProducts{Xhat.transpose() * Yhat, Xhat.transpose() * Xhat};
}

void apply_abundance_update(const AbundanceProducts& p, Matrix& W, double lambda, double denom_eps, Penalty penalty) {
  const Matrix denom = p.gram * W;
  if (penalty == Penalty::L1) {
    W.array() *= p.xty.array() / (denom.array() + lambda + denom_eps);
  } else {
    const auto shrink = (0.5 * lambda) * W.array().max(kHalfNormFloor).rsqrt();
    W.array() *= p.xty.array() / (denom.array() + shrink + denom_eps);
  }
}

// Below this fraction of ||Yhat||^2 the expanded form loses its digits to
// cancellation and the fit is recomputed from the residual.
constexpr double kCancellationLimit = 1e-6;

// ||Yhat - Xhat W||^2 = ||Yhat||^2 - 2 <W, Xhat^T Yhat> + <Xhat^T Xhat, W W^T>, plus the penalty.
double objective_from_products(const Matrix& Yhat, const Matrix& Xhat, double yhat_norm2, const AbundanceProducts& p,
                               const Matrix& W, double lambda, Penalty penalty) {
  const Matrix wwt = W * W.transpose();
  double fit = yhat_norm2 - 2.0 * p.xty.cwiseProduct(W).sum() + p.gram.cwiseProduct(wwt).sum();
  if (fit < kCancellationLimit * yhat_norm2) fit = (Yhat - Xhat * W).squaredNorm();
  return fit + (penalty == Penalty::L1 ? 2.0 * lambda * W.sum() : lambda * W.array().sqrt().sum());
}

}  // namespace

void update_endmembers(const Matrix& Yhat, Matrix& Xhat, const Matrix& W, double denom_eps) {
  const Matrix numer = Yhat * W.transpose();
  const Matrix gram = W * W.transpose();
  const Matrix denom = Xhat * gram;
  Xhat.array() *= numer.array() / (denom.array() + denom_eps);
}

void update_abundances_l1(const Matrix& Yhat, const Matrix& Xhat, Matrix& W, double lambda, double denom_eps) {
  apply_abundance_update(abundance_products(Yhat, Xhat), W, lambda, denom_eps, Penalty::L1);
}

void update_abundances_half(const Matrix& Yhat, const Matrix& Xhat, Matrix& W, double lambda, double denom_eps) {
  apply_abundance_update(abundance_products(Yhat, Xhat), W, lambda, denom_eps, Penalty::HalfNorm);
}

FactorPair weighted_update_step(const Matrix& Yhat, const Matrix& Xhat, const Matrix& W, double lambda,
                                double denom_eps) {
  check_shapes(Yhat, Xhat, W);
  FactorPair next{Xhat, W};
  update_endmembers(Yhat, next.X, next.W, denom_eps);
  update_abundances_l1(Yhat, next.X, next.W, lambda, denom_eps);
  return next;
}

InnerResult inner_solve(const Matrix& Yhat, const Matrix& Xhat0, const Matrix& W0, double lambda, double inner_tol,
                        int max_inner, double denom_eps, Penalty penalty, const StepObserver& observer) {
  check_shapes(Yhat, Xhat0, W0);
  InnerResult result{Xhat0, W0, 0, 0.0};
  const double yhat_norm2 = Yhat.squaredNorm();
  double previous = subproblem_objective(Yhat, result.X, result.W, lambda, penalty);
  for (int step = 1; step <= max_inner; ++step) {
    update_endmembers(Yhat, result.X, result.W, denom_eps);
    const AbundanceProducts products = abundance_products(Yhat, result.X);
    apply_abundance_update(products, result.W, lambda, denom_eps, penalty);
    result.iterations = step;
    if (observer) observer(step, result.X, result.W);

    const double current = objective_from_products(Yhat, result.X, yhat_norm2, products, result.W, lambda, penalty);
    const double scale = std::max({std::abs(previous), kInnerObjectiveFloor * yhat_norm2,
                                   std::numeric_limits<double>::min()});
    const double change = std::abs(previous - current) / scale;
    previous = current;
    if (change < inner_tol) break;
  }
  result.objective = subproblem_objective(Yhat, result.X, result.W, lambda, penalty);
  return result;
}

std::uint64_t inner_step_multiply_adds(Index D, Index N, Index K) {
  const auto d = static_cast<std::uint64_t>(D);
  const auto n = static_cast<std::uint64_t>(N);
  const auto k = static_cast<std::uint64_t>(K);
  const std::uint64_t endmember_update = d * n * k + n * k * k + d * k * k + d * k;
  const std::uint64_t abundance_update = d * n * k + d * k * k + k * k * n + k * n;
  const std::uint64_t objective = k * k * n + 2 * k * n;
  return endmember_update + abundance_update + objective;
}

}  // namespace robust_unmix
