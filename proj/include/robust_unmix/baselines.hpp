#pragma once

#include "robust_unmix/multiplicative.hpp"
#include "robust_unmix/types.hpp"

namespace robust_unmix {

// Comparison solvers. They share the outer/inner iteration structure and
// stopping rules of SolverConfig with the correntropy solver, with U = I:
// every outer iteration is one inner_solve on (Y, X, W) and the loop stops
// once the objective changes by less than outer_tol * (1 + |f(0)|).
//
// The lambda argument of l1_nmf_solve / l12_nmf_solve overrides
// config.lambda; std::nullopt means "auto".

/// Objective of a baseline: ||Y - XW||_F^2 plus its penalty.
double baseline_objective(const Matrix& Y, const Matrix& X, const Matrix& W, double lambda, Penalty penalty);

/// Runs the baseline from (X0, W0).
SolveReport baseline_solve_from(const Matrix& Y, const Matrix& X0, const Matrix& W0, double lambda, Penalty penalty,
                                const SolverConfig& config, const StepObserver& observer = {});

/// Plain Frobenius NMF with multiplicative updates.
SolveReport nmf_solve(const Matrix& Y, Index K, const SolverConfig& config);

/// ||Y - XW||_F^2 + 2 lambda sum(W).
SolveReport l1_nmf_solve(const Matrix& Y, Index K, std::optional<double> lambda, const SolverConfig& config);

/// ||Y - XW||_F^2 + lambda sum(W^(1/2)).
SolveReport l12_nmf_solve(const Matrix& Y, Index K, std::optional<double> lambda, const SolverConfig& config);

}  // namespace robust_unmix
