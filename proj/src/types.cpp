#include "robust_unmix/types.hpp"

#include "robust_unmix/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace robust_unmix {

void check_nonnegative_finite(const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      const double v = m(i, j);
      if (!std::isfinite(v)) throw NonFinite(i, j);
      if (v < 0.0) throw NegativeEntry(i, j);
    }
  }
}

void validate(const Matrix& Y, Index K) {
  if (Y.rows() < 1 || Y.cols() < 1) throw ShapeMismatch("data matrix must have at least one band and one pixel");
  check_nonnegative_finite(Y);
  const Index limit = std::min(Y.rows(), Y.cols());
  if (K < 1 || K > limit) throw BadRank(K, limit);
}

SpectraMatrix::SpectraMatrix(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) throw ShapeMismatch("data matrix must have at least one band and one pixel");
  check_nonnegative_finite(data_);
}

Endmembers::Endmembers(Matrix data) : data_(std::move(data)) {
  if (data_.cols() < 1) throw BadRank(0, data_.rows());
  check_nonnegative_finite(data_);
}

Abundances::Abundances(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 1) throw BadRank(0, data_.cols());
  check_nonnegative_finite(data_);
}

void check_band_weights(const Vector& u) {
  for (Index d = 0; d < u.size(); ++d) {
    if (!(u[d] > 0.0 && u[d] <= 1.0)) throw WeightOutOfRange("band weight " + std::to_string(d) + " outside (0, 1]");
  }
}

BandWeights::BandWeights(Vector u) : u_(std::move(u)) { check_band_weights(u_); }

void SolverConfig::validate() const {
  if (lambda && !(*lambda >= 0.0 && std::isfinite(*lambda))) throw ValidationError("lambda must be finite and >= 0");
  if (alpha && !(*alpha > 0.0)) throw ValidationError("alpha must be > 0");
  if (!(outer_tol > 0.0)) throw ValidationError("outer_tol must be > 0");
  if (!(inner_tol > 0.0)) throw ValidationError("inner_tol must be > 0");
  if (!(denom_eps > 0.0)) throw ValidationError("denom_eps must be > 0");
  if (sigma2_floor && !(*sigma2_floor > 0.0)) throw ValidationError("sigma2_floor must be > 0");
  if (max_outer < 1) throw ValidationError("max_outer must be >= 1");
  if (max_inner < 1) throw ValidationError("max_inner must be >= 1");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::ToleranceReached:
      return "tolerance_reached";
    case Termination::MaxIterations:
      return "max_iterations";
  }
  return "unknown";
}

double max_objective_increase(const SolveReport& report) {
  double worst = -std::numeric_limits<double>::infinity();
  const std::size_t n = std::min(report.objective_trace.size(), report.objective_after.size());
  for (std::size_t t = 0; t < n; ++t) worst = std::max(worst, report.objective_after[t] - report.objective_trace[t]);
  return worst;
}

Index effective_rank(const SolveReport& report) {
  const Matrix& X = report.endmembers.data();
  const Matrix& W = report.abundances.data();
  Index rank = 0;
  for (Index k = 0; k < X.cols(); ++k) {
    if (X.col(k).maxCoeff() > 0.0 && W.row(k).maxCoeff() > 0.0) ++rank;
  }
  return rank;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * stream.size());
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto s : stream) push(s);
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace robust_unmix
