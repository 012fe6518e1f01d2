#pragma once

#include "robust_unmix/types.hpp"

namespace robust_unmix {

// Loss functions of the unmixing model. Shapes must conform (Y: D x N,
// X: D x K, W: K x N); violations throw ShapeMismatch.
//
// The Gaussian kernel is exp(-||r||^2 / sigma2) with no factor 2 in the
// denominator.

void check_shapes(const Matrix& Y, const Matrix& X, const Matrix& W);

/// ||Y - XW||_F^2
double frobenius_loss(const Matrix& Y, const Matrix& X, const Matrix& W);

/// Squared residual norm of every band: ||y^d - (XW)^d||^2, length D.
Vector band_residual_norms(const Matrix& Y, const Matrix& X, const Matrix& W);

/// sum_d -exp(-||y^d - (XW)^d||^2 / sigma2). Lies in [-D, 0].
double correntropy_loss(const Matrix& Y, const Matrix& X, const Matrix& W, double sigma2);

/// correntropy_loss + 2 * lambda * sum(W). W >= 0, so sum(W) is the sum of the pixel l1 norms.
double cenmf_objective(const Matrix& Y, const Matrix& X, const Matrix& W, double sigma2, double lambda);

/// Same objective from precomputed band residual norms and the l1 mass of W.
double cenmf_objective_from_norms(const Vector& band_norms, double w_mass, double sigma2, double lambda);

/// Conjugate term psi(-u) = u log u - u of the Welsch kernel. Minimising
/// u * a + psi(-u) over u in (0, 1] gives u = exp(-a) with value -exp(-a).
double welsch_conjugate(double u);

/// sum_d ( u_d ||r^d||^2 / sigma2 + psi(-u_d) ) + 2 lambda sum(W).
/// Throws WeightOutOfRange if some u_d is outside (0, 1].
double augmented_objective(const Matrix& Y, const Matrix& X, const Matrix& W, const Vector& u, double sigma2,
                           double lambda);

}  // namespace robust_unmix
