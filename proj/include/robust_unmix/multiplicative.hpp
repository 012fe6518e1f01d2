#pragma once

#include "robust_unmix/types.hpp"

#include <cstdint>
#include <functional>

namespace robust_unmix {

/// Sparsity penalty on W used by the multiplicative updates.
enum class Penalty {
  L1,        ///< 2 * lambda * sum(W)
  HalfNorm,  ///< lambda * sum(W^(1/2))
};

/// Entries of W are floored at this value before W^(-1/2) is taken.
inline constexpr double kHalfNormFloor = 1e-12;

struct FactorPair {
  Matrix X;
  Matrix W;
};

struct InnerResult {
  Matrix X;
  Matrix W;
  int iterations = 0;
  double objective = 0.0;
};

/// Called after every multiplicative step with the step number (1-based) and the fresh iterates.
using StepObserver = std::function<void(int step, const Matrix& X, const Matrix& W)>;

/// ||Yhat - Xhat W||_F^2 plus the penalty term.
double subproblem_objective(const Matrix& Yhat, const Matrix& Xhat, const Matrix& W, double lambda,
                            Penalty penalty = Penalty::L1);

/// In-place endmember update: Xhat <- Xhat o (Yhat W^T) / (Xhat W W^T + eps).
void update_endmembers(const Matrix& Yhat, Matrix& Xhat, const Matrix& W, double denom_eps);

/// In-place abundance update: W <- W o (Xhat^T Yhat) / (Xhat^T Xhat W + lambda + eps).
void update_abundances_l1(const Matrix& Yhat, const Matrix& Xhat, Matrix& W, double lambda, double denom_eps);

/// In-place abundance update for the half-norm penalty:
/// W <- W o (Xhat^T Yhat) / (Xhat^T Xhat W + (lambda/2) max(W, floor)^(-1/2) + eps).
void update_abundances_half(const Matrix& Yhat, const Matrix& Xhat, Matrix& W, double lambda, double denom_eps);

/// One X-then-W multiplicative step of the weighted l1 subproblem. The W
/// update uses the freshly updated Xhat.
FactorPair weighted_update_step(const Matrix& Yhat, const Matrix& Xhat, const Matrix& W, double lambda,
                                double denom_eps);

/// The inner stop test measures the objective change relative to
/// max(|previous|, kInnerObjectiveFloor * ||Yhat||^2), so an exactly fitted
/// subproblem, whose objective is pure rounding noise, still terminates.
inline constexpr double kInnerObjectiveFloor = 1e-14;

/// Repeats multiplicative steps until the relative change of the subproblem
/// objective drops below inner_tol, or max_inner steps have run. The returned
/// objective is evaluated directly from the final residual.
InnerResult inner_solve(const Matrix& Yhat, const Matrix& Xhat0, const Matrix& W0, double lambda, double inner_tol,
                        int max_inner, double denom_eps = 1e-12, Penalty penalty = Penalty::L1,
                        const StepObserver& observer = {});

/// Multiply-add count of one inner step (both updates plus the objective
/// evaluation from cached products) as implemented; the leading term is 2DNK.
std::uint64_t inner_step_multiply_adds(Index D, Index N, Index K);

}  // namespace robust_unmix
