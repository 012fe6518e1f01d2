#include "robust_unmix/metrics.hpp"

#include "robust_unmix/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace robust_unmix {

double sad(const Vector& x_true, const Vector& x_est) {
  if (x_true.size() != x_est.size()) throw ShapeMismatch("spectra differ in length");
  const double a = x_true.norm();
  const double b = x_est.norm();
  if (!(a > 0.0) || !(b > 0.0)) throw ZeroNormSpectrum("spectral angle needs nonzero spectra");
  const double cosine = std::clamp(x_true.dot(x_est) / (a * b), -1.0, 1.0);
  return std::acos(cosine);
}

double rmse(const Vector& w_true, const Vector& w_est) {
  if (w_true.size() != w_est.size()) throw ShapeMismatch("abundance maps differ in length");
  if (w_true.size() == 0) throw ShapeMismatch("abundance maps are empty");
  return std::sqrt((w_true - w_est).squaredNorm() / static_cast<double>(w_true.size()));
}

// Shortest augmenting path with row/column potentials, O(n^3).
std::vector<Index> min_cost_assignment(const Matrix& cost) {
  const Index n = cost.rows();
  if (cost.cols() != n) throw ShapeMismatch("assignment cost matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> row_pot(n + 1, 0.0), col_pot(n + 1, 0.0);
  std::vector<Index> owner(n + 1, 0), way(n + 1, 0);

  for (Index i = 1; i <= n; ++i) {
    owner[0] = i;
    Index col = 0;
    std::vector<double> slack(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col] = true;
      const Index row = owner[col];
      double delta = inf;
      Index next = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double reduced = cost(row - 1, j - 1) - row_pot[row] - col_pot[j];
        if (reduced < slack[j]) {
          slack[j] = reduced;
          way[j] = col;
        }
        if (slack[j] < delta) {
          delta = slack[j];
          next = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          row_pot[owner[j]] += delta;
          col_pot[j] -= delta;
        } else {
          slack[j] -= delta;
        }
      }
      col = next;
    } while (owner[col] != 0);
    do {
      const Index prev = way[col];
      owner[col] = owner[prev];
      col = prev;
    } while (col != 0);
  }

  std::vector<Index> assignment(n, 0);
  for (Index j = 1; j <= n; ++j) assignment[owner[j] - 1] = j - 1;
  return assignment;
}

std::vector<Index> match_endmembers(const Matrix& X_true, const Matrix& X_est) {
  if (X_true.rows() != X_est.rows() || X_true.cols() != X_est.cols()) {
    throw ShapeMismatch("true and estimated endmember matrices differ in shape");
  }
  const Index K = X_true.cols();
  Matrix cost(K, K);
  for (Index i = 0; i < K; ++i) {
    for (Index j = 0; j < K; ++j) cost(i, j) = sad(X_true.col(i), X_est.col(j));
  }
  return min_cost_assignment(cost);
}

Matrix normalize_columns(const Matrix& W) {
  Matrix out = W;
  for (Index n = 0; n < W.cols(); ++n) {
    const double total = W.col(n).sum();
    if (total > 0.0) out.col(n) /= total;
  }
  return out;
}

EvaluationTable evaluate_run(const Matrix& X_true, const Matrix& W_true, const Matrix& X_est, const Matrix& W_est,
                             const EvaluateOptions& options) {
  if (W_true.rows() != W_est.rows() || W_true.cols() != W_est.cols()) {
    throw ShapeMismatch("true and estimated abundance matrices differ in shape");
  }
  if (X_true.cols() != W_true.rows()) throw ShapeMismatch("endmember count differs between X and W");

  Matrix Xt = X_true;
  Matrix Xe = X_est;
  if (!options.band_mask.empty()) {
    if (static_cast<Index>(options.band_mask.size()) != X_true.rows() || X_est.rows() != X_true.rows()) {
      throw ShapeMismatch("band mask length must equal the band count");
    }
    std::vector<Index> kept;
    for (Index d = 0; d < X_true.rows(); ++d) {
      if (options.band_mask[static_cast<std::size_t>(d)]) kept.push_back(d);
    }
    Xt = X_true(kept, Eigen::all);
    Xe = X_est(kept, Eigen::all);
  }

  const Matrix W_eval = options.normalize_abundances ? normalize_columns(W_est) : W_est;
  const std::vector<Index> perm = match_endmembers(Xt, Xe);

  EvaluationTable table;
  const Index K = X_true.cols();
  for (Index k = 0; k < K; ++k) {
    const Index e = perm[static_cast<std::size_t>(k)];
    EndmemberScore score{k, e, sad(Xt.col(k), Xe.col(e)), rmse(W_true.row(k).transpose(), W_eval.row(e).transpose())};
    table.mean_sad += score.sad;
    table.mean_rmse += score.rmse;
    table.rows.push_back(score);
  }
  table.mean_sad /= static_cast<double>(K);
  table.mean_rmse /= static_cast<double>(K);
  return table;
}

}  // namespace robust_unmix
