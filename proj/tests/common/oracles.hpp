#pragma once

// Reference implementations written as plain scalar loops, independent of
// the matrix-form library code they are compared against.

#include "robust_unmix/types.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using robust_unmix::Index;
using robust_unmix::Matrix;
using robust_unmix::Vector;

inline double residual(const Matrix& Y, const Matrix& X, const Matrix& W, Index d, Index n) {
  double fit = 0.0;
  for (Index k = 0; k < X.cols(); ++k) fit += X(d, k) * W(k, n);
  return Y(d, n) - fit;
}

inline double band_norm(const Matrix& Y, const Matrix& X, const Matrix& W, Index d) {
  double s = 0.0;
  for (Index n = 0; n < Y.cols(); ++n) {
    const double r = residual(Y, X, W, d, n);
    s += r * r;
  }
  return s;
}

inline double frobenius(const Matrix& Y, const Matrix& X, const Matrix& W) {
  double s = 0.0;
  for (Index d = 0; d < Y.rows(); ++d) s += band_norm(Y, X, W, d);
  return s;
}

inline double entry_sum(const Matrix& W) {
  double s = 0.0;
  for (Index k = 0; k < W.rows(); ++k) {
    for (Index n = 0; n < W.cols(); ++n) s += W(k, n);
  }
  return s;
}

inline double correntropy(const Matrix& Y, const Matrix& X, const Matrix& W, double sigma2) {
  double s = 0.0;
  for (Index d = 0; d < Y.rows(); ++d) s -= std::exp(-band_norm(Y, X, W, d) / sigma2);
  return s;
}

inline double cenmf_objective(const Matrix& Y, const Matrix& X, const Matrix& W, double sigma2, double lambda) {
  return correntropy(Y, X, W, sigma2) + 2.0 * lambda * entry_sum(W);
}

inline double augmented(const Matrix& Y, const Matrix& X, const Matrix& W, const Vector& u, double sigma2,
                        double lambda) {
  double s = 0.0;
  for (Index d = 0; d < Y.rows(); ++d) {
    s += u[d] * band_norm(Y, X, W, d) / sigma2 + (u[d] * std::log(u[d]) - u[d]);
  }
  return s + 2.0 * lambda * entry_sum(W);
}

inline std::vector<double> weights(const Matrix& Y, const Matrix& X, const Matrix& W, double sigma2) {
  std::vector<double> u;
  for (Index d = 0; d < Y.rows(); ++d) u.push_back(std::exp(-band_norm(Y, X, W, d) / sigma2));
  return u;
}

inline double sigma2(const Matrix& Y, const Matrix& X, const Matrix& W, double alpha, double floor) {
  const double v = alpha * frobenius(Y, X, W) / (2.0 * static_cast<double>(Y.rows()) * static_cast<double>(Y.cols()));
  return v > floor ? v : floor;
}

inline double lambda(const Matrix& Y) {
  const double N = static_cast<double>(Y.cols());
  double total = 0.0;
  for (Index d = 0; d < Y.rows(); ++d) {
    double l1 = 0.0;
    double l2 = 0.0;
    for (Index n = 0; n < Y.cols(); ++n) {
      l1 += std::abs(Y(d, n));
      l2 += Y(d, n) * Y(d, n);
    }
    if (l2 == 0.0) continue;
    total += (std::sqrt(N) - l1 / std::sqrt(l2)) / (std::sqrt(N) - 1.0);
  }
  return total / std::sqrt(static_cast<double>(Y.rows()));
}

// X_dk <- X_dk * sum_n Y_dn W_kn / (sum_j X_dj sum_n W_jn W_kn + eps)
inline Matrix endmember_step(const Matrix& Y, const Matrix& X, const Matrix& W, double eps) {
  Matrix out = X;
  for (Index d = 0; d < X.rows(); ++d) {
    for (Index k = 0; k < X.cols(); ++k) {
      double num = 0.0;
      for (Index n = 0; n < Y.cols(); ++n) num += Y(d, n) * W(k, n);
      double den = 0.0;
      for (Index j = 0; j < X.cols(); ++j) {
        double g = 0.0;
        for (Index n = 0; n < W.cols(); ++n) g += W(j, n) * W(k, n);
        den += X(d, j) * g;
      }
      out(d, k) = X(d, k) * num / (den + eps);
    }
  }
  return out;
}

// W_kn <- W_kn * sum_d X_dk Y_dn / (sum_j (sum_d X_dk X_dj) W_jn + lambda + eps)
inline Matrix abundance_step(const Matrix& Y, const Matrix& X, const Matrix& W, double lambda, double eps) {
  Matrix out = W;
  for (Index k = 0; k < W.rows(); ++k) {
    for (Index n = 0; n < W.cols(); ++n) {
      double num = 0.0;
      for (Index d = 0; d < Y.rows(); ++d) num += X(d, k) * Y(d, n);
      double den = 0.0;
      for (Index j = 0; j < W.rows(); ++j) {
        double g = 0.0;
        for (Index d = 0; d < X.rows(); ++d) g += X(d, k) * X(d, j);
        den += g * W(j, n);
      }
      out(k, n) = W(k, n) * num / (den + lambda + eps);
    }
  }
  return out;
}

// Same with the half-norm shrinkage (lambda / 2) * max(W, floor)^(-1/2).
inline Matrix abundance_step_half(const Matrix& Y, const Matrix& X, const Matrix& W, double lambda, double eps,
                                  double floor) {
  Matrix out = W;
  for (Index k = 0; k < W.rows(); ++k) {
    for (Index n = 0; n < W.cols(); ++n) {
      double num = 0.0;
      for (Index d = 0; d < Y.rows(); ++d) num += X(d, k) * Y(d, n);
      double den = 0.0;
      for (Index j = 0; j < W.rows(); ++j) {
        double g = 0.0;
        for (Index d = 0; d < X.rows(); ++d) g += X(d, k) * X(d, j);
        den += g * W(j, n);
      }
      const double w = W(k, n) > floor ? W(k, n) : floor;
      out(k, n) = W(k, n) * num / (den + 0.5 * lambda / std::sqrt(w) + eps);
    }
  }
  return out;
}

inline double sad(const Vector& a, const Vector& b) {
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return std::acos(std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0));
}

inline double rmse(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (Index i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

inline double snr_db(const Vector& clean, const Vector& noisy) {
  double signal = 0.0;
  double noise = 0.0;
  for (Index i = 0; i < clean.size(); ++i) {
    signal += clean[i] * clean[i];
    noise += (noisy[i] - clean[i]) * (noisy[i] - clean[i]);
  }
  return 10.0 * std::log10(signal / noise);
}

inline double noise_variance(const Vector& band, double snr) {
  double ms = 0.0;
  for (Index i = 0; i < band.size(); ++i) ms += band[i] * band[i];
  ms /= static_cast<double>(band.size());
  return ms / std::pow(10.0, snr / 10.0);
}

/// Permutation minimising sum_k SAD(X_true.col(k), X_est.col(p[k])) by enumeration.
inline std::vector<Index> brute_force_match(const Matrix& X_true, const Matrix& X_est) {
  std::vector<Index> perm(static_cast<std::size_t>(X_true.cols()));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::vector<Index> best = perm;
  double best_cost = INFINITY;
  do {
    double cost = 0.0;
    for (std::size_t k = 0; k < perm.size(); ++k) {
      cost += sad(X_true.col(static_cast<Index>(k)), X_est.col(perm[k]));
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// argmin_{w >= 0} ||y - X w||^2 by enumerating every active set (K <= 4).
inline Vector exhaustive_nnls(const Matrix& X, const Vector& y) {
  const Index K = X.cols();
  Vector best = Vector::Zero(K);
  double best_res = y.squaredNorm();
  for (unsigned mask = 1; mask < (1u << K); ++mask) {
    std::vector<Index> cols;
    for (Index k = 0; k < K; ++k) {
      if (mask & (1u << k)) cols.push_back(k);
    }
    Matrix sub(X.rows(), static_cast<Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) sub.col(static_cast<Index>(j)) = X.col(cols[j]);
    const Vector coef = sub.colPivHouseholderQr().solve(y);
    if ((coef.array() < 0.0).any()) continue;
    Vector w = Vector::Zero(K);
    for (std::size_t j = 0; j < cols.size(); ++j) w[cols[j]] = coef[static_cast<Index>(j)];
    const double res = (y - X * w).squaredNorm();
    if (res < best_res) {
      best_res = res;
      best = w;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Comparison and random-instance helpers.

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

/// Max-abs difference relative to the largest entry magnitude.
inline double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), 1e-300});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline Matrix random_nonneg(Index rows, Index cols, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  }
  return m;
}

inline Index random_dim(std::mt19937_64& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

}  // namespace oracle
