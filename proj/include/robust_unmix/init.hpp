#pragma once

#include "robust_unmix/types.hpp"

#include <cstdint>
#include <vector>

namespace robust_unmix {

struct EndmemberSelection {
  Endmembers endmembers;
  /// Pixel (column) index of Y chosen for each endmember, in selection order.
  std::vector<Index> pixels;
  /// True when the data had rank < K in its top-K subspace and some columns
  /// were filled by the furthest-point rule.
  bool used_fallback = false;
};

/// Orthogonal-subspace vertex search: projects Y onto its top-K left singular
/// subspace, then repeatedly picks the pixel with the largest |projection| on
/// a random direction orthogonal to the pixels already chosen. The returned
/// endmembers are columns of Y.
EndmemberSelection select_endmembers(const Matrix& Y, Index K, std::uint64_t seed);

inline Endmembers init_endmembers(const Matrix& Y, Index K, std::uint64_t seed) {
  return select_endmembers(Y, K, seed).endmembers;
}

struct NnlsOptions {
  int max_sweeps = 2000;
  double tol = 1e-13;
};

/// argmin_{w >= 0} ||y - X w||^2 by cyclic projected coordinate descent
/// started from w = 0. Every sweep is non-increasing in the residual.
Vector nnls(const Matrix& gram, const Vector& xty, const NnlsOptions& options = {});

/// Per-pixel nonnegative least squares (no sum-to-one constraint).
Abundances init_abundances(const Matrix& Y, const Matrix& X, const NnlsOptions& options = {});

}  // namespace robust_unmix
