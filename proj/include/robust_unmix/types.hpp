#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace robust_unmix {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// All matrices are bands-by-pixels: Y is D x N, X is D x K, W is K x N.

/// Throws NonFinite / NegativeEntry for the first offending entry (column-major scan).
void check_nonnegative_finite(const Matrix& m);

/// Checks the data invariants of Y and that 1 <= K <= min(D, N).
void validate(const Matrix& Y, Index K);

/// Observed data Y (D bands x N pixels), nonnegative and finite.
class SpectraMatrix {
 public:
  explicit SpectraMatrix(Matrix data);

  const Matrix& data() const { return data_; }
  Index bands() const { return data_.rows(); }
  Index pixels() const { return data_.cols(); }

 private:
  Matrix data_;
};

/// Endmember signatures X (D x K), one column per material.
class Endmembers {
 public:
  explicit Endmembers(Matrix data);

  const Matrix& data() const { return data_; }
  Index bands() const { return data_.rows(); }
  Index count() const { return data_.cols(); }

 private:
  Matrix data_;
};

/// Abundances W (K x N). Row k is the abundance map of endmember k; columns are not forced onto the simplex.
class Abundances {
 public:
  explicit Abundances(Matrix data);

  const Matrix& data() const { return data_; }
  Index count() const { return data_.rows(); }
  Index pixels() const { return data_.cols(); }

 private:
  Matrix data_;
};

/// Per-band weights u, each in (0, 1].
class BandWeights {
 public:
  explicit BandWeights(Vector u);
  static BandWeights ones(Index bands) { return BandWeights(Vector::Ones(bands)); }

  const Vector& values() const { return u_; }
  Index size() const { return u_.size(); }

 private:
  Vector u_;
};

/// Throws WeightOutOfRange unless every entry lies in (0, 1].
void check_band_weights(const Vector& u);

struct SolverConfig {
  /// Sparsity weight; std::nullopt means "auto" (estimated from the data).
  std::optional<double> lambda = 0.0;
  /// Kernel scale factor in the sigma^2 update; std::nullopt means the pixel
  /// count N, which puts sigma^2 at the mean squared band residual / 2.
  std::optional<double> alpha;
  /// Outer stop: |G(t+1) - G(t)| < outer_tol * (1 + |G(0)|).
  double outer_tol = 1e-6;
  int max_outer = 100;
  /// Inner stop: relative change of the weighted subproblem objective.
  double inner_tol = 1e-6;
  int max_inner = 50;
  double denom_eps = 1e-12;
  /// std::nullopt means 1e-10 * mean(Y o Y).
  std::optional<double> sigma2_floor;
  std::uint64_t seed = 0;

  void validate() const;
  /// alpha with the pixel-count default applied.
  double resolved_alpha(Index pixels) const { return alpha.value_or(static_cast<double>(pixels)); }
};

enum class Termination { ToleranceReached, MaxIterations };

std::string_view to_string(Termination t);

/// Result of any solver in the library.
///
/// objective_trace[t] is the objective at the start of outer iteration t and
/// objective_after[t] the objective after that iteration's inner solve, both
/// evaluated at sigma2_trace[t]. For the correntropy solver the start value is
/// the augmented objective at the current band weights, which coincides with
/// the correntropy objective once the weights have been refreshed. Descent
/// means objective_after[t] <= objective_trace[t] for every t.
struct SolveReport {
  Endmembers endmembers;
  Abundances abundances;
  BandWeights band_weights;
  std::vector<double> objective_trace;
  std::vector<double> objective_after;
  std::vector<double> sigma2_trace;
  Termination termination = Termination::MaxIterations;
  double lambda = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
};

/// Largest per-iteration increase objective_after[t] - objective_trace[t] (<= 0 for a descent run).
double max_objective_increase(const SolveReport& report);

/// Number of endmembers whose column of X and row of W are both not identically zero.
Index effective_rank(const SolveReport& report);

/// Deterministic generator for a (seed, stream...) pair. Independent streams
/// are derived through std::seed_seq so parallel consumers never share state.
std::mt19937_64 make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {});

}  // namespace robust_unmix
