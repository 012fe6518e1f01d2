#pragma once

#include "robust_unmix/types.hpp"

#include <vector>

namespace robust_unmix {

/// Spectral angle distance in radians, in [0, pi]. Throws ZeroNormSpectrum
/// if either spectrum has zero norm.
double sad(const Vector& x_true, const Vector& x_est);

/// sqrt(||w_true - w_est||^2 / N).
double rmse(const Vector& w_true, const Vector& w_est);

/// Minimum-cost assignment on a square cost matrix: result[i] is the column assigned to row i.
std::vector<Index> min_cost_assignment(const Matrix& cost);

/// Permutation p minimising sum_k SAD(X_true.col(k), X_est.col(p[k])).
std::vector<Index> match_endmembers(const Matrix& X_true, const Matrix& X_est);

struct EndmemberScore {
  Index true_index = 0;
  Index estimate_index = 0;
  double sad = 0.0;
  double rmse = 0.0;
};

struct EvaluationTable {
  std::vector<EndmemberScore> rows;  // ordered by true_index
  double mean_sad = 0.0;
  double mean_rmse = 0.0;
};

struct EvaluateOptions {
  /// Bands kept for matching and SAD (empty = all bands). Both X matrices must have D rows.
  std::vector<bool> band_mask;
  /// Renormalise each pixel of W_est to sum to one before RMSE (reporting only).
  bool normalize_abundances = false;
};

EvaluationTable evaluate_run(const Matrix& X_true, const Matrix& W_true, const Matrix& X_est, const Matrix& W_est,
                             const EvaluateOptions& options = {});

/// Columns of W scaled to sum to one; all-zero columns are left at zero.
Matrix normalize_columns(const Matrix& W);

}  // namespace robust_unmix
