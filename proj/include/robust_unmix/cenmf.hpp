#pragma once

#include "robust_unmix/multiplicative.hpp"
#include "robust_unmix/types.hpp"

#include <optional>

namespace robust_unmix {

/// Smallest band weight returned by band_weights; keeps weights inside (0, 1] under underflow.
inline constexpr double kMinBandWeight = 1e-300;

/// u_d = exp(-||y^d - (XW)^d||^2 / sigma2), clamped to >= kMinBandWeight.
BandWeights band_weights(const Matrix& Y, const Matrix& X, const Matrix& W, double sigma2);

/// Same weights from precomputed squared band residual norms.
Vector band_weights_from_norms(const Vector& band_norms, double sigma2);

/// max( alpha / (2 D N) * ||Y - XW||_F^2, sigma2_floor ).
double update_sigma2(const Matrix& Y, const Matrix& X, const Matrix& W, double alpha, double sigma2_floor);

/// 1e-10 * mean(Y o Y), or the smallest normal double for an all-zero Y.
double default_sigma2_floor(const Matrix& Y);

/// Sparsity weight from the per-band Hoyer sparseness of the data:
/// (1/sqrt(D)) * sum_d (sqrt(N) - ||y^d||_1/||y^d||_2) / (sqrt(N) - 1).
/// Zero bands are skipped. Requires N >= 2; throws DegenerateBand if every band is zero.
double estimate_lambda(const Matrix& Y);

/// Test and diagnostic hooks for the outer loop.
struct CenmfControls {
  /// Holds sigma^2 at this value instead of applying the data-driven update.
  std::optional<double> frozen_sigma2;
  /// Keeps u at its initial all-ones value.
  bool freeze_weights = false;
  /// Observes every inner multiplicative step (scaled endmembers, abundances).
  StepObserver observer;
};

/// l1-regularised correntropy NMF from a given starting point (X0, W0).
///
/// Each outer iteration forms Yhat = U^(1/2) Y and Xhat = U^(1/2) X with
/// U_dd = u_d / sigma^2, runs the inner multiplicative solver, maps back
/// X = U^(-1/2) Xhat, then refreshes sigma^2 and, at the new sigma^2, the
/// band weights u. The loop stops once the objective at the new sigma^2
/// changes by less than outer_tol * (1 + |G(0)|).
SolveReport cenmf_solve_from(const Matrix& Y, const Matrix& X0, const Matrix& W0, const SolverConfig& config,
                             const CenmfControls& controls = {});

/// Full pipeline: endmember and abundance initialisation, then cenmf_solve_from.
SolveReport solve(const Matrix& Y, Index K, const SolverConfig& config);

/// Resolves an "auto" lambda against the data; returns the configured value otherwise.
double resolve_lambda(const Matrix& Y, const SolverConfig& config);

}  // namespace robust_unmix
