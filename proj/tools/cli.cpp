#include "cli.hpp"

#include "svg_plot.hpp"

#include "robust_unmix/robust_unmix.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>

namespace robust_unmix::cli {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kCommands = {"generate", "unmix", "sweep", "bandmask-compare"};

/// Bad flag values detected after CLI11 has parsed them.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Flag groups

std::optional<double> parse_auto_number(const std::string& text, const std::string& flag) {
  if (text == "auto") return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError(flag + " expects a number or 'auto', got '" + text + "'");
  }
  return value;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) {
    const auto value = parse_auto_number(token, flag);
    if (!value) throw UsageError(flag + " does not accept 'auto'");
    out.push_back(*value);
  }
  if (out.empty()) throw UsageError(flag + " is empty");
  return out;
}

struct SolverFlags {
  std::string lambda = "auto";
  std::string alpha = "auto";
  std::string sigma2_floor = "auto";
  SolverConfig config;

  void add_to(CLI::App* app, bool with_seed) {
    app->add_option("--lambda", lambda, "Sparsity weight, or 'auto' to estimate it from the data")
        ->capture_default_str();
    app->add_option("--alpha", alpha, "Kernel scale factor, or 'auto' for the pixel count")->capture_default_str();
    app->add_option("--outer-tol", config.outer_tol, "Outer stop tolerance")->capture_default_str();
    app->add_option("--max-outer", config.max_outer, "Maximum outer iterations")->capture_default_str();
    app->add_option("--inner-tol", config.inner_tol, "Inner stop tolerance (relative change)")->capture_default_str();
    app->add_option("--max-inner", config.max_inner, "Maximum inner steps per outer iteration")
        ->capture_default_str();
    app->add_option("--denom-eps", config.denom_eps, "Denominator guard of the multiplicative updates")
        ->capture_default_str();
    app->add_option("--sigma2-floor", sigma2_floor, "Lower bound of sigma^2, or 'auto'")->capture_default_str();
    if (with_seed) app->add_option("--seed", config.seed, "Initialisation seed")->capture_default_str();
  }

  SolverConfig resolve() const {
    SolverConfig out = config;
    out.lambda = parse_auto_number(lambda, "--lambda");
    out.alpha = parse_auto_number(alpha, "--alpha");
    out.sigma2_floor = parse_auto_number(sigma2_floor, "--sigma2-floor");
    try {
      out.validate();
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
    return out;
  }
};

struct SceneFlags {
  int z = 8;
  int k = 6;
  std::string library = "builtin";
  double snr_std = 5.0;
  double purity = 0.8;

  void add_to(CLI::App* app) {
    app->add_option("--z", z, "Block size (>= 2); the image is z^2 x z^2 pixels")->capture_default_str()->check(
        CLI::Range(2, 1 << 10));
    app->add_option("--k", k, "Number of endmembers (at least 2)")->capture_default_str()->check(
        CLI::Range(2, 1 << 20));
    app->add_option("--endmember-lib", library, "'builtin' or a bands x materials matrix file")
        ->capture_default_str();
    app->add_option("--snr-std", snr_std, "Standard deviation of the per-band SNR in dB")->capture_default_str();
    app->add_option("--purity", purity, "Largest abundance allowed before a pixel is remixed")
        ->capture_default_str();
  }

  SceneSpec resolve() const {
    SceneSpec spec;
    spec.z = z;
    spec.snr_std_db = snr_std;
    spec.purity_threshold = purity;
    Matrix lib = library == "builtin" ? builtin_library().data() : io::load_matrix(library);
    if (k > lib.cols()) {
      throw ValidationError("--k " + std::to_string(k) + " exceeds the " + std::to_string(lib.cols()) +
                            " spectra of the endmember library");
    }
    spec.endmember_library = Endmembers(lib.leftCols(k));
    return spec;
  }
};

// ---------------------------------------------------------------------------
// Output helpers

io::Format parse_output_format(const std::string& name) {
  try {
    return io::parse_format(name);
  } catch (const UnsupportedFormat& e) {
    throw UsageError(e.what());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

class CsvFile {
 public:
  CsvFile(const fs::path& path, const std::string& header) : path_(path), out_(path) {
    if (!out_) throw IoError("cannot write " + path.string());
    if (!header.empty()) out_ << header << '\n';
  }

  template <typename... Fields>
  void row(const Fields&... fields) {
    std::string line;
    ((line += (line.empty() ? "" : ","), line += field(fields)), ...);
    out_ << line << '\n';
  }

  void raw(const std::string& text) { out_ << text; }

  ~CsvFile() { out_.flush(); }

  void close() {
    out_.close();
    if (!out_) throw IoError("write failed for " + path_.string());
  }

 private:
  static std::string field(double v) { return io::format_double(v); }
  static std::string field(int v) { return std::to_string(v); }
  static std::string field(long v) { return std::to_string(v); }
  static std::string field(unsigned long v) { return std::to_string(v); }
  static std::string field(const std::string& v) { return v; }
  static std::string field(std::string_view v) { return std::string(v); }
  static std::string field(const char* v) { return v; }

  fs::path path_;
  std::ofstream out_;
};

void add_solver_metadata(io::Metadata& meta, const SolverConfig& c) {
  meta["lambda_setting"] = c.lambda ? io::format_shortest(*c.lambda) : "auto";
  meta["alpha_setting"] = c.alpha ? io::format_shortest(*c.alpha) : "auto";
  meta["outer_tol"] = io::format_shortest(c.outer_tol);
  meta["max_outer"] = std::to_string(c.max_outer);
  meta["inner_tol"] = io::format_shortest(c.inner_tol);
  meta["max_inner"] = std::to_string(c.max_inner);
  meta["denom_eps"] = io::format_shortest(c.denom_eps);
  meta["sigma2_floor_setting"] = c.sigma2_floor ? io::format_shortest(*c.sigma2_floor) : "auto";
}

fs::path find_matrix(const fs::path& dir, const std::string& stem) {
  for (const char* ext : {".csv", ".f64"}) {
    const fs::path candidate = dir / (stem + ext);
    if (fs::exists(candidate)) return candidate;
  }
  throw IoError("no " + stem + ".csv or " + stem + ".f64 in " + dir.string());
}

std::vector<Index> read_index_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Index> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = line.substr(0, line.find('#'));
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream tokens(line);
    std::string token;
    while (tokens >> token) {
      long value = 0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
      if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw ParseError("band index '" + token + "' is not an integer", line_no);
      }
      out.push_back(static_cast<Index>(value));
    }
  }
  return out;
}

void write_index_list(const fs::path& path, const std::vector<Index>& indices) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const Index i : indices) out << i << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

Matrix column(const std::vector<double>& values) {
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

// ---------------------------------------------------------------------------
// generate

struct GenerateFlags {
  SceneFlags scene;
  double mean_snr = 30.0;
  std::uint64_t seed = 0;
  int corrupt_bands = 0;
  double corrupt_snr = 0.0;
  std::string format = "csv";
  std::string out_dir;
};

void setup_generate(CLI::App& app, GenerateFlags& f) {
  auto* cmd = app.add_subcommand("generate", "Generate a synthetic scene with per-band noise");
  f.scene.add_to(cmd);
  cmd->add_option("--mean-snr", f.mean_snr, "Mean per-band SNR in dB")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Scene seed")->capture_default_str();
  cmd->add_option("--corrupt-bands", f.corrupt_bands, "Number of bands forced to --corrupt-snr")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--corrupt-snr", f.corrupt_snr, "SNR in dB of the corrupted bands")->capture_default_str();
  cmd->add_option("--format", f.format, "Matrix format: csv or rawf64")->capture_default_str();
  cmd->add_option("--out-dir", f.out_dir, "Output directory")->required();
}

int cmd_generate(const GenerateFlags& f) {
  const io::Format format = parse_output_format(f.format);
  SceneSpec spec = f.scene.resolve();
  spec.mean_snr_db = f.mean_snr;
  spec.seed = f.seed;
  spec.validate();
  const CorruptedScene result = generate_corrupted_scene(spec, Corruption{f.corrupt_bands, f.corrupt_snr});
  const Scene& scene = result.scene;

  const fs::path dir(f.out_dir);
  ensure_dir(dir);
  const std::string ext = io::file_extension(format);
  const io::Metadata seed_meta{{"seed", std::to_string(f.seed)}};
  io::save_matrix(scene.Y_noisy.data(), dir / ("Y_noisy" + ext), format, seed_meta);
  io::save_matrix(scene.Y_clean.data(), dir / ("Y_clean" + ext), format, seed_meta);
  io::save_matrix(scene.X_true.data(), dir / ("X_true" + ext), format, seed_meta);
  io::save_matrix(scene.W_true.data(), dir / ("W_true" + ext), format, seed_meta);
  io::save_matrix(column(scene.band_snr_db), dir / ("band_snr" + ext), format, seed_meta);
  write_index_list(dir / "corrupted_bands.txt", result.corrupted_bands);

  io::Metadata meta{
      {"command", "generate"},
      {"z", std::to_string(f.scene.z)},
      {"k", std::to_string(f.scene.k)},
      {"endmember_lib", f.scene.library},
      {"mean_snr", io::format_shortest(f.mean_snr)},
      {"snr_std", io::format_shortest(f.scene.snr_std)},
      {"purity", io::format_shortest(f.scene.purity)},
      {"seed", std::to_string(f.seed)},
      {"corrupt_bands", std::to_string(f.corrupt_bands)},
      {"corrupt_snr", io::format_shortest(f.corrupt_snr)},
      {"bands", std::to_string(scene.Y_noisy.bands())},
      {"pixels", std::to_string(scene.Y_noisy.pixels())},
      {"format", f.format},
  };
  io::write_key_values(dir / "metadata.txt", meta);
  std::cout << "generated " << scene.Y_noisy.bands() << " x " << scene.Y_noisy.pixels() << " scene with "
            << scene.X_true.count() << " endmembers in " << dir.string() << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------------------
// unmix

struct UnmixFlags {
  std::string input;
  std::string method;
  int k = 0;
  SolverFlags solver;
  std::string format = "csv";
  std::string out_dir;
};

void setup_unmix(CLI::App& app, UnmixFlags& f) {
  auto* cmd = app.add_subcommand("unmix", "Unmix a bands x pixels data matrix");
  cmd->add_option("--input", f.input, "Data matrix file (bands x pixels)")->required();
  cmd->add_option("--method", f.method, "nmf, l1nmf, l12nmf or cenmf")->required();
  cmd->add_option("--k", f.k, "Number of endmembers")->required()->check(CLI::PositiveNumber);
  f.solver.add_to(cmd, true);
  cmd->add_option("--format", f.format, "Matrix format of the outputs: csv or rawf64")->capture_default_str();
  cmd->add_option("--out-dir", f.out_dir, "Output directory")->required();
}

int cmd_unmix(const UnmixFlags& f) {
  Method method;
  try {
    method = parse_method(f.method);
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  const io::Format format = parse_output_format(f.format);
  const SolverConfig config = f.solver.resolve();
  const Matrix Y = io::load_matrix(f.input);

  const auto t0 = std::chrono::steady_clock::now();
  const SolveReport report = run_method(method, Y, f.k, config);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path dir(f.out_dir);
  ensure_dir(dir);
  const std::string ext = io::file_extension(format);
  io::save_matrix(report.endmembers.data(), dir / ("X_est" + ext), format);
  io::save_matrix(report.abundances.data(), dir / ("W_est" + ext), format);
  if (method == Method::Cenmf) io::save_matrix(report.band_weights.values(), dir / ("band_weights" + ext), format);

  CsvFile trace(dir / "objective_trace.csv", "iteration,objective_start,objective_after,sigma2");
  for (std::size_t t = 0; t < report.objective_trace.size(); ++t) {
    const std::string sigma2 = t < report.sigma2_trace.size() ? io::format_double(report.sigma2_trace[t]) : "";
    trace.row(static_cast<int>(t), report.objective_trace[t], report.objective_after[t], sigma2);
  }
  trace.close();

  io::Metadata summary{
      {"method", std::string(to_string(method))},
      {"k", std::to_string(f.k)},
      {"bands", std::to_string(Y.rows())},
      {"pixels", std::to_string(Y.cols())},
      {"seed", std::to_string(config.seed)},
      {"lambda", io::format_shortest(report.lambda)},
      {"termination", std::string(to_string(report.termination))},
      {"outer_iterations", std::to_string(report.outer_iterations)},
      {"inner_iterations", std::to_string(report.inner_iterations)},
      {"effective_rank", std::to_string(effective_rank(report))},
      {"final_objective", report.objective_after.empty() ? "" : io::format_shortest(report.objective_after.back())},
  };
  if (method == Method::Cenmf) summary["alpha"] = io::format_shortest(config.resolved_alpha(Y.cols()));
  add_solver_metadata(summary, config);
  io::write_key_values(dir / "summary.txt", summary);
  io::write_key_values(dir / "timing.txt", {{"wall_time_s", io::format_shortest(seconds)}});

  std::cout << to_string(method) << ": " << to_string(report.termination) << " after " << report.outer_iterations
            << " outer / " << report.inner_iterations << " inner iterations, lambda=" << report.lambda
            << ", effective rank " << effective_rank(report) << ", " << seconds << " s\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepFlags {
  std::string snr_list = "50,40,30,20,10";
  std::string methods = "nmf,l1nmf,l12nmf,cenmf";
  int repeats = 10;
  std::uint64_t seed_base = 0;
  SceneFlags scene;
  SolverFlags solver;
  bool normalize = false;
  int threads = 0;
  std::string out_dir;
};

void setup_sweep(CLI::App& app, SweepFlags& f) {
  auto* cmd = app.add_subcommand("sweep", "Noise sweep: generate, unmix and score every (SNR, method, repeat) cell");
  cmd->add_option("--snr-list", f.snr_list, "Comma-separated mean SNRs in dB")->capture_default_str();
  cmd->add_option("--methods", f.methods, "Comma-separated methods")->capture_default_str();
  cmd->add_option("--repeats", f.repeats, "Scenes per SNR")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--seed-base", f.seed_base, "Base seed of the scene seeds")->capture_default_str();
  f.scene.add_to(cmd);
  f.solver.add_to(cmd, false);
  cmd->add_flag("--normalize-abundances", f.normalize, "Rescale estimated abundances to sum to one before RMSE");
  cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)")->capture_default_str()->check(
      CLI::NonNegativeNumber);
  cmd->add_option("--out-dir", f.out_dir, "Output directory")->required();
}

std::string cell_file_name(const SweepCell& cell) {
  return "cell_" + std::to_string(cell.snr_index) + '_' + std::string(to_string(cell.method)) + '_' +
         std::to_string(cell.repeat) + ".csv";
}

void write_sweep_plots(const SweepSpec& spec, const std::vector<SweepCell>& cells,
                       const std::vector<SweepAggregate>& aggregate, const fs::path& dir) {
  const Index K = spec.scene.endmember_library.count();
  for (const Method m : spec.methods) {
    LinePlot sad_plot{"SAD vs SNR (" + std::string(to_string(m)) + ")", "SNR (dB)", "SAD (rad)", {}, true, true};
    LinePlot rmse_plot{"RMSE vs SNR (" + std::string(to_string(m)) + ")", "SNR (dB)", "RMSE", {}, true, true};
    for (Index k = 0; k < K; ++k) {
      Series sad_series{"endmember " + std::to_string(k + 1), {}, {}};
      Series rmse_series = sad_series;
      for (std::size_t s = 0; s < spec.snr_list.size(); ++s) {
        double sad_sum = 0.0;
        double rmse_sum = 0.0;
        int n = 0;
        for (const SweepCell& c : cells) {
          if (c.snr_index != s || c.method != m || !c.error.empty()) continue;
          sad_sum += c.table.rows[static_cast<std::size_t>(k)].sad;
          rmse_sum += c.table.rows[static_cast<std::size_t>(k)].rmse;
          ++n;
        }
        if (n == 0) continue;
        sad_series.x.push_back(spec.snr_list[s]);
        sad_series.y.push_back(sad_sum / n);
        rmse_series.x.push_back(spec.snr_list[s]);
        rmse_series.y.push_back(rmse_sum / n);
      }
      sad_plot.series.push_back(std::move(sad_series));
      rmse_plot.series.push_back(std::move(rmse_series));
    }
    write_svg(sad_plot, (dir / ("sad_" + std::string(to_string(m)) + ".svg")).string());
    write_svg(rmse_plot, (dir / ("rmse_" + std::string(to_string(m)) + ".svg")).string());
  }

  LinePlot mean_sad{"Mean SAD vs SNR", "SNR (dB)", "mean SAD (rad)", {}, true, true};
  LinePlot mean_rmse{"Mean RMSE vs SNR", "SNR (dB)", "mean RMSE", {}, true, true};
  for (const Method m : spec.methods) {
    Series sad_series{std::string(to_string(m)), {}, {}};
    Series rmse_series = sad_series;
    for (const SweepAggregate& a : aggregate) {
      if (a.method != m || a.repeats == 0) continue;
      sad_series.x.push_back(a.snr_db);
      sad_series.y.push_back(a.mean_sad);
      rmse_series.x.push_back(a.snr_db);
      rmse_series.y.push_back(a.mean_rmse);
    }
    mean_sad.series.push_back(std::move(sad_series));
    mean_rmse.series.push_back(std::move(rmse_series));
  }
  write_svg(mean_sad, (dir / "mean_sad.svg").string());
  write_svg(mean_rmse, (dir / "mean_rmse.svg").string());

  if (std::find(spec.methods.begin(), spec.methods.end(), Method::Cenmf) != spec.methods.end()) {
    LinePlot weights{"Band weights (cenmf, repeat 0)", "band index", "u", {}, false, false};
    for (const SweepCell& c : cells) {
      if (c.method != Method::Cenmf || c.repeat != 0 || !c.error.empty()) continue;
      Series s{"SNR " + io::format_shortest(c.snr_db) + " dB", {}, c.band_weights};
      for (std::size_t d = 0; d < c.band_weights.size(); ++d) s.x.push_back(static_cast<double>(d));
      weights.series.push_back(std::move(s));
    }
    write_svg(weights, (dir / "band_weights_cenmf.svg").string());
  }
}

int cmd_sweep(const SweepFlags& f) {
  SweepSpec spec;
  try {
    spec.methods = parse_method_list(f.methods);
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  spec.snr_list = parse_number_list(f.snr_list, "--snr-list");
  spec.repeats = f.repeats;
  spec.seed_base = f.seed_base;
  spec.scene = f.scene.resolve();
  spec.solver = f.solver.resolve();
  spec.normalize_abundances = f.normalize;
  spec.threads = f.threads;

  const fs::path dir(f.out_dir);
  const fs::path cell_dir = dir / "cells";
  ensure_dir(cell_dir);

  std::mutex console;
  std::size_t done = 0;
  const std::size_t total = spec.snr_list.size() * spec.methods.size() * static_cast<std::size_t>(spec.repeats);
  const std::vector<SweepCell> cells = run_sweep(spec, [&](const SweepCell& cell) {
    if (cell.error.empty()) {
      CsvFile out(cell_dir / cell_file_name(cell), "");
      for (const EndmemberScore& row : cell.table.rows) {
        out.row(cell.snr_db, to_string(cell.method), cell.repeat, static_cast<long>(row.true_index), row.sad,
                row.rmse);
      }
      out.close();
    }
    const std::lock_guard lock(console);
    ++done;
    std::cerr << '[' << done << '/' << total << "] snr=" << cell.snr_db << ' ' << to_string(cell.method)
              << " repeat=" << cell.repeat
              << (cell.error.empty() ? " mean_sad=" + io::format_shortest(cell.table.mean_sad) : " FAILED: " + cell.error)
              << '\n';
  });

  // Merge the per-cell files in (snr, method, repeat) order.
  CsvFile merged(dir / "sweep.csv", "snr,method,repeat,endmember,sad,rmse");
  for (const SweepCell& cell : cells) {
    if (!cell.error.empty()) continue;
    std::ifstream in(cell_dir / cell_file_name(cell));
    if (!in) throw IoError("missing cell file " + cell_file_name(cell));
    std::ostringstream body;
    body << in.rdbuf();
    merged.raw(body.str());
  }
  merged.close();

  CsvFile runs(dir / "runs.csv", "snr,method,repeat,scene_seed,lambda,termination,outer_iterations,inner_iterations,error");
  for (const SweepCell& c : cells) {
    std::string error = c.error;
    std::replace(error.begin(), error.end(), ',', ';');
    runs.row(c.snr_db, to_string(c.method), c.repeat, static_cast<unsigned long>(c.scene_seed),
             c.error.empty() ? io::format_double(c.lambda) : "", c.error.empty() ? to_string(c.termination) : "",
             c.outer_iterations, c.inner_iterations, error);
  }
  runs.close();

  const std::vector<SweepAggregate> aggregate = aggregate_sweep(spec, cells);
  CsvFile summary(dir / "summary.csv", "snr,method,repeats,mean_sad,mean_rmse");
  for (const SweepAggregate& a : aggregate) summary.row(a.snr_db, to_string(a.method), a.repeats, a.mean_sad, a.mean_rmse);
  summary.close();

  CsvFile weights(dir / "band_weights.csv", "snr,repeat,band,u");
  for (const SweepCell& c : cells) {
    if (c.method != Method::Cenmf || !c.error.empty()) continue;
    for (std::size_t d = 0; d < c.band_weights.size(); ++d) {
      weights.row(c.snr_db, c.repeat, static_cast<unsigned long>(d), c.band_weights[d]);
    }
  }
  weights.close();

  write_sweep_plots(spec, cells, aggregate, dir);

  io::Metadata meta{{"command", "sweep"},
                    {"snr_list", f.snr_list},
                    {"methods", f.methods},
                    {"repeats", std::to_string(f.repeats)},
                    {"seed_base", std::to_string(f.seed_base)},
                    {"z", std::to_string(f.scene.z)},
                    {"k", std::to_string(f.scene.k)},
                    {"endmember_lib", f.scene.library},
                    {"snr_std", io::format_shortest(f.scene.snr_std)},
                    {"purity", io::format_shortest(f.scene.purity)},
                    {"normalize_abundances", f.normalize ? "true" : "false"}};
  add_solver_metadata(meta, spec.solver);
  io::write_key_values(dir / "metadata.txt", meta);

  std::cout << "snr,method,repeats,mean_sad,mean_rmse\n";
  for (const SweepAggregate& a : aggregate) {
    std::cout << a.snr_db << ',' << to_string(a.method) << ',' << a.repeats << ',' << a.mean_sad << ',' << a.mean_rmse
              << '\n';
  }
  const bool failed = std::any_of(cells.begin(), cells.end(), [](const SweepCell& c) { return !c.error.empty(); });
  if (failed) {
    std::cerr << "some sweep cells failed; see runs.csv\n";
    return kNumericalFailure;
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------
// bandmask-compare

struct BandmaskFlags {
  std::string scene_dir;
  std::string input;
  std::string x_true;
  std::string w_true;
  std::string mask;
  std::string methods = "nmf,cenmf";
  int k = 0;
  SolverFlags solver;
  bool normalize = false;
  int threads = 0;
  std::string out_dir;
};

void setup_bandmask(CLI::App& app, BandmaskFlags& f) {
  auto* cmd = app.add_subcommand("bandmask-compare", "Score methods on all bands and with listed bands removed");
  auto* scene = cmd->add_option("--scene-dir", f.scene_dir, "Directory written by 'generate'");
  auto* input = cmd->add_option("--input", f.input, "Data matrix file (bands x pixels)");
  auto* x_true = cmd->add_option("--x-true", f.x_true, "Reference endmembers (bands x K)");
  auto* w_true = cmd->add_option("--w-true", f.w_true, "Reference abundances (K x pixels)");
  scene->excludes(input)->excludes(x_true)->excludes(w_true);
  input->needs(x_true)->needs(w_true);
  cmd->add_option("--mask", f.mask, "File listing the 0-based band indices to remove")->required();
  cmd->add_option("--methods", f.methods, "Comma-separated methods")->capture_default_str();
  cmd->add_option("--k", f.k, "Number of endmembers (default: columns of the reference endmembers)")
      ->check(CLI::PositiveNumber);
  f.solver.add_to(cmd, true);
  cmd->add_flag("--normalize-abundances", f.normalize, "Rescale estimated abundances to sum to one before RMSE");
  cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)")->capture_default_str()->check(
      CLI::NonNegativeNumber);
  cmd->add_option("--out-dir", f.out_dir, "Output directory")->required();
}

int cmd_bandmask(const BandmaskFlags& f) {
  if (f.scene_dir.empty() && f.input.empty()) throw UsageError("give --scene-dir or --input/--x-true/--w-true");
  BandmaskSpec spec;
  try {
    spec.methods = parse_method_list(f.methods);
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  spec.K = f.k;
  spec.solver = f.solver.resolve();
  spec.normalize_abundances = f.normalize;
  spec.threads = f.threads;

  const fs::path scene_dir(f.scene_dir);
  const Matrix Y = io::load_matrix(f.scene_dir.empty() ? fs::path(f.input) : find_matrix(scene_dir, "Y_noisy"));
  const Matrix X_true = io::load_matrix(f.scene_dir.empty() ? fs::path(f.x_true) : find_matrix(scene_dir, "X_true"));
  const Matrix W_true = io::load_matrix(f.scene_dir.empty() ? fs::path(f.w_true) : find_matrix(scene_dir, "W_true"));
  const std::vector<Index> removed = read_index_list(f.mask);

  const std::vector<BandmaskRow> rows = bandmask_compare(Y, X_true, W_true, removed, spec);

  const fs::path dir(f.out_dir);
  ensure_dir(dir);
  CsvFile detail(dir / "bandmask.csv", "method,variant,endmember,sad,rmse");
  for (const BandmaskRow& r : rows) {
    for (const auto& [variant, table] : {std::pair{"full", &r.full}, std::pair{"masked", &r.masked}}) {
      for (const EndmemberScore& s : table->rows) {
        detail.row(to_string(r.method), variant, static_cast<long>(s.true_index), s.sad, s.rmse);
      }
    }
  }
  detail.close();

  const std::string header = "method,full_mean_sad,masked_mean_sad,sad_relative_change,full_mean_rmse,masked_mean_rmse";
  CsvFile summary(dir / "bandmask_summary.csv", header);
  std::cout << header << '\n';
  for (const BandmaskRow& r : rows) {
    const double change = r.masked.mean_sad > 0.0 ? (r.full.mean_sad - r.masked.mean_sad) / r.masked.mean_sad : 0.0;
    summary.row(to_string(r.method), r.full.mean_sad, r.masked.mean_sad, change, r.full.mean_rmse, r.masked.mean_rmse);
    std::cout << to_string(r.method) << ',' << r.full.mean_sad << ',' << r.masked.mean_sad << ',' << change << ','
              << r.full.mean_rmse << ',' << r.masked.mean_rmse << '\n';
  }
  summary.close();

  io::Metadata meta{{"command", "bandmask-compare"},
                    {"methods", f.methods},
                    {"removed_bands", std::to_string(removed.size())},
                    {"bands", std::to_string(Y.rows())},
                    {"pixels", std::to_string(Y.cols())},
                    {"seed", std::to_string(spec.solver.seed)},
                    {"normalize_abundances", f.normalize ? "true" : "false"}};
  add_solver_metadata(meta, spec.solver);
  io::write_key_values(dir / "metadata.txt", meta);
  return kSuccess;
}

}  // namespace

std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw std::invalid_argument("--config needs a file path");
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!config_path) return args;

  const io::Metadata values = io::read_key_values(*config_path);
  const auto command = std::find_if(args.begin() + 1, args.end(), [](const std::string& a) { return kCommands.count(a) > 0; });
  if (command == args.end()) return args;

  std::vector<std::string> inserted;
  for (const auto& [key, value] : values) {
    const std::string flag = key.rfind("--", 0) == 0 ? key : "--" + key;
    const bool given = std::any_of(command + 1, args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (!given) inserted.push_back(flag + "=" + value);
  }
  args.insert(command + 1, inserted.begin(), inserted.end());
  return args;
}

int run(std::vector<std::string> args) {
  CLI::App app{"Robust hyperspectral unmixing: scene generation, unmixing, noise sweeps and band-mask comparisons"};
  app.name(args.empty() ? "robust_unmix" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);
  app.add_option("--config", "Flat key=value file of default flag values (command-line flags win)");

  GenerateFlags generate;
  UnmixFlags unmix;
  SweepFlags sweep;
  BandmaskFlags bandmask;
  setup_generate(app, generate);
  setup_unmix(app, unmix);
  setup_sweep(app, sweep);
  setup_bandmask(app, bandmask);

  try {
    try {
      args = expand_config(std::move(args));
    } catch (const IoError& e) {
      throw UsageError(std::string("config file: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return kUsage;
    }

    if (app.got_subcommand("generate")) return cmd_generate(generate);
    if (app.got_subcommand("unmix")) return cmd_unmix(unmix);
    if (app.got_subcommand("sweep")) return cmd_sweep(sweep);
    if (app.got_subcommand("bandmask-compare")) return cmd_bandmask(bandmask);
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ValidationError& e) {
    std::cerr << "invalid data: " << e.what() << '\n';
    return kDataValidation;
  } catch (const IoError& e) {
    std::cerr << "input/output error: " << e.what() << '\n';
    return kDataValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace robust_unmix::cli
