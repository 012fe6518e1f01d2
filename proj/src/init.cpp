#include "robust_unmix/init.hpp"

#include "robust_unmix/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace robust_unmix {

namespace {

constexpr std::uint64_t kEndmemberStream = 0x766361;  // "vca"

Index furthest_pixel(const Matrix& Y, const std::vector<Index>& chosen) {
  Index best = 0;
  double best_distance = -1.0;
  for (Index n = 0; n < Y.cols(); ++n) {
    double nearest = std::numeric_limits<double>::infinity();
    if (chosen.empty()) {
      nearest = Y.col(n).squaredNorm();
    } else {
      for (Index s : chosen) nearest = std::min(nearest, (Y.col(n) - Y.col(s)).squaredNorm());
    }
    if (nearest > best_distance) {
      best_distance = nearest;
      best = n;
    }
  }
  return best;
}

}  // namespace

EndmemberSelection select_endmembers(const Matrix& Y, Index K, std::uint64_t seed) {
  validate(Y, K);
  const Index D = Y.rows();

  Matrix gram = Matrix::Zero(D, D);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(Y);
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  // Eigenvalues are ascending; the signal subspace is the last K vectors.
  const Matrix basis = eig.eigenvectors().rightCols(K).rowwise().reverse();
  const Matrix projected = basis.transpose() * Y;
  const double data_scale = projected.colwise().norm().maxCoeff();

  auto rng = make_rng(seed, {kEndmemberStream});
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<Index> chosen;
  chosen.reserve(static_cast<std::size_t>(K));
  Matrix selected(K, 0);
  bool used_fallback = false;

  for (Index i = 0; i < K; ++i) {
    Vector direction(K);
    for (Index j = 0; j < K; ++j) direction[j] = normal(rng);
    const double drawn_norm = direction.norm();

    if (i > 0) {
      const Eigen::ColPivHouseholderQR<Matrix> qr(selected);
      const Index r = qr.rank();
      if (r > 0) {
        const Matrix q = Matrix(qr.householderQ()).leftCols(r);
        direction -= q * (q.transpose() * direction);
      }
    }

    Index pick = -1;
    const double norm = direction.norm();
    if (norm > 1e-10 * drawn_norm && data_scale > 0.0) {
      const Vector scores = (direction.transpose() * projected).transpose().cwiseAbs() / norm;
      Index arg = 0;
      const double best = scores.maxCoeff(&arg);
      if (best > 1e-10 * data_scale) pick = arg;
    }
    if (pick < 0) {
      pick = furthest_pixel(Y, chosen);
      used_fallback = true;
    }
    chosen.push_back(pick);
    selected.conservativeResize(K, i + 1);
    selected.col(i) = projected.col(pick);
  }

  Matrix X(D, K);
  for (Index k = 0; k < K; ++k) X.col(k) = Y.col(chosen[static_cast<std::size_t>(k)]);
  return EndmemberSelection{Endmembers(std::move(X)), std::move(chosen), used_fallback};
}

Vector nnls(const Matrix& gram, const Vector& xty, const NnlsOptions& options) {
  const Index K = gram.rows();
  Vector w = Vector::Zero(K);
  Vector gradient = -xty;  // gram * w - xty at w = 0
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    double largest_step = 0.0;
    for (Index k = 0; k < K; ++k) {
      const double curvature = gram(k, k);
      if (!(curvature > 0.0)) continue;
      const double updated = std::max(0.0, w[k] - gradient[k] / curvature);
      const double step = updated - w[k];
      if (step != 0.0) {
        gradient += step * gram.col(k);
        w[k] = updated;
        largest_step = std::max(largest_step, std::abs(step));
      }
    }
    if (largest_step <= options.tol * (1.0 + w.cwiseAbs().maxCoeff())) break;
  }
  return w;
}

Abundances init_abundances(const Matrix& Y, const Matrix& X, const NnlsOptions& options) {
  if (X.rows() != Y.rows()) throw ShapeMismatch("endmember band count differs from data band count");
  const Matrix gram = X.transpose() * X;
  const Matrix xty = X.transpose() * Y;
  Matrix W(X.cols(), Y.cols());
  for (Index n = 0; n < Y.cols(); ++n) W.col(n) = nnls(gram, xty.col(n), options);
  return Abundances(std::move(W));
}

}  // namespace robust_unmix
