#pragma once

#include "robust_unmix/metrics.hpp"
#include "robust_unmix/synthgen.hpp"
#include "robust_unmix/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace robust_unmix {

enum class Method { Nmf, L1Nmf, L12Nmf, Cenmf };

/// "nmf", "l1nmf", "l12nmf", "cenmf". Throws ValidationError for anything else.
Method parse_method(std::string_view name);
std::string_view to_string(Method method);

/// Comma-separated method names, duplicates rejected.
std::vector<Method> parse_method_list(std::string_view list);

/// Runs one solver from the standard initialisation. config.lambda is used by
/// the sparse methods (std::nullopt = auto) and ignored by plain NMF.
SolveReport run_method(Method method, const Matrix& Y, Index K, const SolverConfig& config);

/// 64-bit seed derived from a base seed and a stream path.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> stream);

/// Bands forced to a fixed SNR on top of the randomly drawn per-band SNRs.
struct Corruption {
  int count = 0;
  double snr_db = 0.0;
};

/// count distinct band indices in [0, D), sorted, drawn from the scene seed.
std::vector<Index> choose_corrupted_bands(Index D, int count, std::uint64_t seed);

struct CorruptedScene {
  Scene scene;
  std::vector<Index> corrupted_bands;
};

/// generate_scene followed by overriding the SNR of the chosen bands. Bands
/// outside the corrupted set receive exactly the noise generate_scene gives them.
CorruptedScene generate_corrupted_scene(const SceneSpec& spec, const Corruption& corruption);

/// Worker count: hardware concurrency, capped by requested (> 0) and by the
/// ROBUST_UNMIX_THREADS environment variable when it holds a positive integer.
int worker_count(int requested = 0);

/// Runs task(i) for i in [0, count) on up to `threads` workers. Exceptions are
/// collected per index; the first one by index is rethrown after all tasks finish.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

struct SweepSpec {
  std::vector<double> snr_list{50, 40, 30, 20, 10};
  std::vector<Method> methods{Method::Nmf, Method::L1Nmf, Method::L12Nmf, Method::Cenmf};
  int repeats = 10;
  std::uint64_t seed_base = 0;
  /// Scene template; its mean_snr_db and seed are overwritten per cell.
  SceneSpec scene;
  /// Solver template; its seed is overwritten per cell.
  SolverConfig solver;
  bool normalize_abundances = false;
  int threads = 0;
};

struct SweepCell {
  std::size_t snr_index = 0;
  double snr_db = 0.0;
  Method method = Method::Nmf;
  int repeat = 0;
  std::uint64_t scene_seed = 0;
  EvaluationTable table;
  std::vector<double> band_weights;
  double lambda = 0.0;
  Termination termination = Termination::MaxIterations;
  int outer_iterations = 0;
  int inner_iterations = 0;
  /// Empty on success; the error message otherwise.
  std::string error;
};

/// Cells in (snr, method, repeat) order. The scene of a (snr, repeat) pair is
/// shared by every method and the solver starts from the same initialisation.
std::vector<SweepCell> sweep_cells(const SweepSpec& spec);

/// Runs one cell, filling table and diagnostics (errors propagate).
void run_sweep_cell(const SweepSpec& spec, SweepCell& cell);

/// Runs every cell on the worker pool. Failed cells keep their error message;
/// on_cell_done is called from the worker thread that finished the cell.
std::vector<SweepCell> run_sweep(const SweepSpec& spec, const std::function<void(const SweepCell&)>& on_cell_done = {});

struct SweepAggregate {
  double snr_db = 0.0;
  Method method = Method::Nmf;
  int repeats = 0;
  double mean_sad = 0.0;
  double mean_rmse = 0.0;
};

/// Mean over repeats of the per-run mean SAD / RMSE, per (snr, method), in sweep order. Failed cells are skipped.
std::vector<SweepAggregate> aggregate_sweep(const SweepSpec& spec, const std::vector<SweepCell>& cells);

/// Rows of Y kept after removing the listed bands; throws ValidationError on out-of-range or duplicate indices.
std::vector<bool> keep_mask(Index D, const std::vector<Index>& removed);
Matrix select_rows(const Matrix& m, const std::vector<bool>& keep);

struct BandmaskSpec {
  std::vector<Method> methods{Method::Nmf, Method::Cenmf};
  Index K = 0;
  SolverConfig solver;
  bool normalize_abundances = false;
  int threads = 0;
};

struct BandmaskRow {
  Method method = Method::Nmf;
  EvaluationTable full;
  EvaluationTable masked;
};

/// Unmixes Y with all bands and with the removed bands dropped, and scores
/// both on the kept bands only, so the two columns are directly comparable.
std::vector<BandmaskRow> bandmask_compare(const Matrix& Y, const Matrix& X_true, const Matrix& W_true,
                                          const std::vector<Index>& removed, const BandmaskSpec& spec);

}  // namespace robust_unmix
