#include "robust_unmix/experiment.hpp"

#include "robust_unmix/baselines.hpp"
#include "robust_unmix/cenmf.hpp"
#include "robust_unmix/errors.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <thread>

namespace robust_unmix {

Method parse_method(std::string_view name) {
  if (name == "nmf") return Method::Nmf;
  if (name == "l1nmf") return Method::L1Nmf;
  if (name == "l12nmf") return Method::L12Nmf;
  if (name == "cenmf") return Method::Cenmf;
  throw ValidationError("unknown method '" + std::string(name) + "' (expected nmf, l1nmf, l12nmf or cenmf)");
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Nmf:
      return "nmf";
    case Method::L1Nmf:
      return "l1nmf";
    case Method::L12Nmf:
      return "l12nmf";
    case Method::Cenmf:
      return "cenmf";
  }
  return "?";
}

std::vector<Method> parse_method_list(std::string_view list) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = std::min(list.find(',', start), list.size());
    const Method m = parse_method(list.substr(start, comma - start));
    if (std::find(out.begin(), out.end(), m) != out.end()) {
      throw ValidationError("method '" + std::string(to_string(m)) + "' listed twice");
    }
    out.push_back(m);
    start = comma + 1;
  }
  return out;
}

SolveReport run_method(Method method, const Matrix& Y, Index K, const SolverConfig& config) {
  switch (method) {
    case Method::Nmf:
      return nmf_solve(Y, K, config);
    case Method::L1Nmf:
      return l1_nmf_solve(Y, K, config.lambda, config);
    case Method::L12Nmf:
      return l12_nmf_solve(Y, K, config.lambda, config);
    case Method::Cenmf:
      return solve(Y, K, config);
  }
  throw ValidationError("unknown method");
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> stream) {
  return make_rng(base, stream)();
}

std::vector<Index> choose_corrupted_bands(Index D, int count, std::uint64_t seed) {
  if (count < 0 || count > D) {
    throw ValidationError("cannot corrupt " + std::to_string(count) + " of " + std::to_string(D) + " bands");
  }
  std::vector<Index> bands(static_cast<std::size_t>(D));
  std::iota(bands.begin(), bands.end(), Index{0});
  auto rng = make_rng(seed, {4});
  // Partial Fisher-Yates with an explicit index draw keeps the choice identical across standard libraries.
  for (int i = 0; i < count; ++i) {
    const auto span = static_cast<std::uint64_t>(D - i);
    const auto j = static_cast<std::size_t>(i) + static_cast<std::size_t>(rng() % span);
    std::swap(bands[static_cast<std::size_t>(i)], bands[j]);
  }
  bands.resize(static_cast<std::size_t>(count));
  std::sort(bands.begin(), bands.end());
  return bands;
}

CorruptedScene generate_corrupted_scene(const SceneSpec& spec, const Corruption& corruption) {
  Scene scene = generate_scene(spec);
  std::vector<Index> bands = choose_corrupted_bands(scene.Y_clean.bands(), corruption.count, spec.seed);
  if (bands.empty()) return {std::move(scene), {}};
  std::vector<double> snr = scene.band_snr_db;
  for (const Index d : bands) snr[static_cast<std::size_t>(d)] = corruption.snr_db;
  NoisyData noisy = add_band_noise_with_snr(scene.Y_clean.data(), snr, spec.seed);
  scene.Y_noisy = SpectraMatrix(std::move(noisy.Y_noisy));
  scene.band_snr_db = std::move(noisy.band_snr_db);
  return {std::move(scene), std::move(bands)};
}

int worker_count(int requested) {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (requested > 0) n = std::min(n, requested);
  if (const char* env = std::getenv("ROBUST_UNMIX_THREADS")) {
    const std::string_view s(env);
    int cap = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
    if (ec == std::errc() && ptr == s.data() + s.size() && cap > 0) n = std::min(n, cap);
  }
  return n;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto pool_size = static_cast<std::size_t>(std::max(1, threads));
  if (pool_size == 1 || count <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(pool_size, count); ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<SweepCell> sweep_cells(const SweepSpec& spec) {
  if (spec.repeats < 1) throw ValidationError("repeats must be >= 1");
  if (spec.snr_list.empty()) throw ValidationError("empty SNR list");
  if (spec.methods.empty()) throw ValidationError("empty method list");
  std::vector<SweepCell> cells;
  for (std::size_t s = 0; s < spec.snr_list.size(); ++s) {
    for (const Method m : spec.methods) {
      for (int r = 0; r < spec.repeats; ++r) {
        SweepCell cell;
        cell.snr_index = s;
        cell.snr_db = spec.snr_list[s];
        cell.method = m;
        cell.repeat = r;
        cell.scene_seed = derive_seed(spec.seed_base, {s, static_cast<std::uint64_t>(r)});
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

void run_sweep_cell(const SweepSpec& spec, SweepCell& cell) {
  SceneSpec scene_spec = spec.scene;
  scene_spec.mean_snr_db = cell.snr_db;
  scene_spec.seed = cell.scene_seed;
  const Scene scene = generate_scene(scene_spec);

  SolverConfig config = spec.solver;
  config.seed = cell.scene_seed;
  const SolveReport report = run_method(cell.method, scene.Y_noisy.data(), scene.X_true.count(), config);

  EvaluateOptions options;
  options.normalize_abundances = spec.normalize_abundances;
  cell.table = evaluate_run(scene.X_true.data(), scene.W_true.data(), report.endmembers.data(),
                            report.abundances.data(), options);
  const Vector& u = report.band_weights.values();
  cell.band_weights.assign(u.data(), u.data() + u.size());
  cell.lambda = report.lambda;
  cell.termination = report.termination;
  cell.outer_iterations = report.outer_iterations;
  cell.inner_iterations = report.inner_iterations;
}

std::vector<SweepCell> run_sweep(const SweepSpec& spec, const std::function<void(const SweepCell&)>& on_cell_done) {
  spec.scene.validate();
  spec.solver.validate();
  std::vector<SweepCell> cells = sweep_cells(spec);
  parallel_for(cells.size(), worker_count(spec.threads), [&](std::size_t i) {
    try {
      run_sweep_cell(spec, cells[i]);
    } catch (const std::exception& e) {
      cells[i].error = e.what();
    }
    if (on_cell_done) on_cell_done(cells[i]);
  });
  return cells;
}

std::vector<SweepAggregate> aggregate_sweep(const SweepSpec& spec, const std::vector<SweepCell>& cells) {
  std::vector<SweepAggregate> out;
  for (std::size_t s = 0; s < spec.snr_list.size(); ++s) {
    for (const Method m : spec.methods) {
      SweepAggregate agg;
      agg.snr_db = spec.snr_list[s];
      agg.method = m;
      for (const SweepCell& cell : cells) {
        if (cell.snr_index != s || cell.method != m || !cell.error.empty()) continue;
        ++agg.repeats;
        agg.mean_sad += cell.table.mean_sad;
        agg.mean_rmse += cell.table.mean_rmse;
      }
      if (agg.repeats > 0) {
        agg.mean_sad /= agg.repeats;
        agg.mean_rmse /= agg.repeats;
      }
      out.push_back(agg);
    }
  }
  return out;
}

std::vector<bool> keep_mask(Index D, const std::vector<Index>& removed) {
  std::vector<bool> keep(static_cast<std::size_t>(D), true);
  for (const Index d : removed) {
    if (d < 0 || d >= D) {
      throw ValidationError("band index " + std::to_string(d) + " outside [0, " + std::to_string(D) + ")");
    }
    if (!keep[static_cast<std::size_t>(d)]) throw ValidationError("band index " + std::to_string(d) + " listed twice");
    keep[static_cast<std::size_t>(d)] = false;
  }
  return keep;
}

Matrix select_rows(const Matrix& m, const std::vector<bool>& keep) {
  if (static_cast<Index>(keep.size()) != m.rows()) throw ShapeMismatch("row mask length differs from row count");
  const auto rows = static_cast<Index>(std::count(keep.begin(), keep.end(), true));
  Matrix out(rows, m.cols());
  Index r = 0;
  for (Index i = 0; i < m.rows(); ++i) {
    if (keep[static_cast<std::size_t>(i)]) out.row(r++) = m.row(i);
  }
  return out;
}

std::vector<BandmaskRow> bandmask_compare(const Matrix& Y, const Matrix& X_true, const Matrix& W_true,
                                          const std::vector<Index>& removed, const BandmaskSpec& spec) {
  spec.solver.validate();
  if (X_true.rows() != Y.rows() || W_true.cols() != Y.cols() || X_true.cols() != W_true.rows()) {
    throw ShapeMismatch("reference endmembers/abundances do not match the data");
  }
  const Index K = spec.K > 0 ? spec.K : X_true.cols();
  if (K != X_true.cols()) throw ShapeMismatch("K differs from the number of reference endmembers");
  const std::vector<bool> keep = keep_mask(Y.rows(), removed);
  const Matrix Y_masked = select_rows(Y, keep);
  const Matrix X_true_masked = select_rows(X_true, keep);
  validate(Y, K);
  validate(Y_masked, K);

  EvaluateOptions full_options;
  full_options.band_mask = keep;
  full_options.normalize_abundances = spec.normalize_abundances;
  EvaluateOptions masked_options;
  masked_options.normalize_abundances = spec.normalize_abundances;

  const std::size_t jobs = spec.methods.size() * 2;
  std::vector<EvaluationTable> tables(jobs);
  parallel_for(jobs, worker_count(spec.threads), [&](std::size_t j) {
    const Method method = spec.methods[j / 2];
    if (j % 2 == 0) {
      const SolveReport r = run_method(method, Y, K, spec.solver);
      tables[j] = evaluate_run(X_true, W_true, r.endmembers.data(), r.abundances.data(), full_options);
    } else {
      const SolveReport r = run_method(method, Y_masked, K, spec.solver);
      tables[j] = evaluate_run(X_true_masked, W_true, r.endmembers.data(), r.abundances.data(), masked_options);
    }
  });

  std::vector<BandmaskRow> rows;
  for (std::size_t m = 0; m < spec.methods.size(); ++m) {
    rows.push_back(BandmaskRow{spec.methods[m], std::move(tables[2 * m]), std::move(tables[2 * m + 1])});
  }
  return rows;
}

}  // namespace robust_unmix
