#include "robust_unmix/baselines.hpp"

#include "robust_unmix/cenmf.hpp"
#include "robust_unmix/errors.hpp"
#include "robust_unmix/init.hpp"
#include "robust_unmix/objective.hpp"

#include <cmath>

namespace robust_unmix {

double baseline_objective(const Matrix& Y, const Matrix& X, const Matrix& W, double lambda, Penalty penalty) {
  return subproblem_objective(Y, X, W, lambda, penalty);
}

SolveReport baseline_solve_from(const Matrix& Y, const Matrix& X0, const Matrix& W0, double lambda, Penalty penalty,
                                const SolverConfig& config, const StepObserver& observer) {
  config.validate();
  check_shapes(Y, X0, W0);
  check_nonnegative_finite(Y);
  check_nonnegative_finite(X0);
  check_nonnegative_finite(W0);
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be >= 0");

  Matrix X = X0;
  Matrix W = W0;
  double start = baseline_objective(Y, X, W, lambda, penalty);
  const double threshold = config.outer_tol * (1.0 + std::abs(start));

  std::vector<double> trace;
  std::vector<double> after_trace;
  Termination termination = Termination::MaxIterations;
  int outer = 0;
  int inner_total = 0;

  for (int t = 0; t < config.max_outer; ++t) {
    InnerResult inner =
        inner_solve(Y, X, W, lambda, config.inner_tol, config.max_inner, config.denom_eps, penalty, observer);
    X = std::move(inner.X);
    W = std::move(inner.W);
    if (!X.allFinite() || !W.allFinite()) throw NumericalError("non-finite factors");

    const double after = inner.objective;
    trace.push_back(start);
    after_trace.push_back(after);
    ++outer;
    inner_total += inner.iterations;
    const double change = std::abs(after - start);
    start = after;
    if (change < threshold) {
      termination = Termination::ToleranceReached;
      break;
    }
  }

  return SolveReport{Endmembers(std::move(X)),
                     Abundances(std::move(W)),
                     BandWeights::ones(Y.rows()),
                     std::move(trace),
                     std::move(after_trace),
                     {},
                     termination,
                     lambda,
                     outer,
                     inner_total};
}

namespace {

SolveReport run_baseline(const Matrix& Y, Index K, double lambda, Penalty penalty, const SolverConfig& config) {
  config.validate();
  validate(Y, K);
  const Endmembers X0 = init_endmembers(Y, K, config.seed);
  const Abundances W0 = init_abundances(Y, X0.data());
  return baseline_solve_from(Y, X0.data(), W0.data(), lambda, penalty, config);
}

double lambda_or_auto(const Matrix& Y, std::optional<double> lambda) {
  return lambda ? *lambda : estimate_lambda(Y);
}

}  // namespace

SolveReport nmf_solve(const Matrix& Y, Index K, const SolverConfig& config) {
  return run_baseline(Y, K, 0.0, Penalty::L1, config);
}

SolveReport l1_nmf_solve(const Matrix& Y, Index K, std::optional<double> lambda, const SolverConfig& config) {
  validate(Y, K);
  return run_baseline(Y, K, lambda_or_auto(Y, lambda), Penalty::L1, config);
}

SolveReport l12_nmf_solve(const Matrix& Y, Index K, std::optional<double> lambda, const SolverConfig& config) {
  validate(Y, K);
  return run_baseline(Y, K, lambda_or_auto(Y, lambda), Penalty::HalfNorm, config);
}

}  // namespace robust_unmix
