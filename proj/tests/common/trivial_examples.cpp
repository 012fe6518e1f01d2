#include "harness.hpp"

#include "cli.hpp"
#include "oracles.hpp"
#include "robust_unmix/robust_unmix.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace harness {

namespace fs = std::filesystem;
using namespace robust_unmix;

fs::path scratch_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const fs::path dir = fs::temp_directory_path() /
                       ("robust_unmix_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  std::vector<std::string> argv{"robust_unmix"};
  argv.insert(argv.end(), args.begin(), args.end());
  int code = -1;
  try {
    code = robust_unmix::cli::run(argv);
  } catch (...) {
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    throw;
  }
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str(), err.str()};
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (const double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (const double x : values) v[i++] = x;
  return v;
}

bool near(double a, double b, double tol = 1e-15) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

struct Factorized {
  Matrix Y, X, W;
};

Factorized exact_instance(std::uint64_t seed, Index D = 5, Index N = 7, Index K = 3) {
  auto rng = make_rng(seed, {77});
  Matrix X = oracle::random_nonneg(D, K, rng, 0.2, 1.0);
  Matrix W = oracle::random_nonneg(K, N, rng, 0.2, 1.0);
  Matrix Y = X * W;
  return {Y, X, W};
}

std::size_t count_polylines(const std::string& svg) {
  std::size_t count = 0;
  for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++count;
  return count;
}

}  // namespace

std::vector<NamedCheck> trivial_examples() {
  std::vector<NamedCheck> checks;
  auto add = [&](std::string module, std::string name, std::function<void()> f) {
    checks.push_back({std::move(module), std::move(name), std::move(f)});
  };

  // --- data contract -------------------------------------------------------
  add("core_model", "2x2 matrix with K=2 validates", [] { validate(mat({{1, 2}, {3, 4}}), 2); });
  add("core_model", "negative entry rejected", [] {
    expect(throws_as<NegativeEntry>([] { validate(mat({{1, -0.5}, {3, 4}}), 1); }), "expected NegativeEntry");
  });
  add("core_model", "K above min(D,N) rejected", [] {
    expect(throws_as<BadRank>([] { validate(Matrix::Ones(3, 5), 4); }), "expected BadRank");
  });

  // --- losses --------------------------------------------------------------
  add("objective", "frobenius loss of an exact factorisation is 0", [] {
    const auto f = exact_instance(1);
    expect(frobenius_loss(f.X * f.W, f.X, f.W) == 0.0, "nonzero loss");
  });
  add("objective", "frobenius loss of identity against zero factors is 2", [] {
    expect(frobenius_loss(Matrix::Identity(2, 2), Matrix::Zero(2, 1), Matrix::Zero(1, 2)) == 2.0, "expected 2");
  });
  add("objective", "correntropy loss of an exact factorisation is -D", [] {
    const auto f = exact_instance(2);
    expect(correntropy_loss(f.Y, f.X, f.W, 0.3) == -5.0, "expected -D");
  });
  add("objective", "single band with residual norm sigma2 gives -exp(-1)", [] {
    const Matrix Y = mat({{3.0, 4.0}});
    expect(near(correntropy_loss(Y, Matrix::Zero(1, 1), Matrix::Zero(1, 2), 25.0), -std::exp(-1.0)), "kernel value");
  });
  add("objective", "cenmf objective with lambda 0 on exact data is -D", [] {
    const auto f = exact_instance(3);
    expect(cenmf_objective(f.Y, f.X, f.W, 1.0, 0.0) == -5.0, "expected -D");
  });
  add("objective", "cenmf objective with lambda 0.5 and all-ones W is -D + KN", [] {
    const Matrix X = mat({{1, 2}, {0.5, 1}, {2, 0}});
    const Matrix W = Matrix::Ones(2, 4);
    expect(near(cenmf_objective(X * W, X, W, 1.0, 0.5), -3.0 + 8.0), "expected -D + K N");
  });
  add("objective", "augmented objective at the optimal weights equals the correntropy objective", [] {
    auto rng = make_rng(4);
    const Matrix Y = oracle::random_nonneg(6, 5, rng);
    const Matrix X = oracle::random_nonneg(6, 2, rng);
    const Matrix W = oracle::random_nonneg(2, 5, rng);
    const double s2 = 0.7;
    const Vector u = band_weights(Y, X, W, s2).values();
    expect(oracle::rel_diff(augmented_objective(Y, X, W, u, s2, 0.2), cenmf_objective(Y, X, W, s2, 0.2)) <= 1e-12,
           "identity at the minimiser");
  });
  add("objective", "perturbed weights never go below the correntropy objective", [] {
    auto rng = make_rng(5);
    const Matrix Y = oracle::random_nonneg(6, 5, rng);
    const Matrix X = oracle::random_nonneg(6, 2, rng);
    const Matrix W = oracle::random_nonneg(2, 5, rng);
    const double s2 = 0.7;
    const double g = cenmf_objective(Y, X, W, s2, 0.2);
    Vector u = band_weights(Y, X, W, s2).values();
    for (Index d = 0; d < u.size(); ++d) {
      Vector p = u;
      p[d] = std::min(1.0, p[d] * 1.5 + 0.01);
      expect(augmented_objective(Y, X, W, p, s2, 0.2) >= g, "perturbation lowered the objective");
    }
  });

  // --- band weights / sigma / lambda ----------------------------------------
  add("cenmf_solver", "zero-residual band has weight 1", [] {
    const auto f = exact_instance(6);
    expect((band_weights(f.Y, f.X, f.W, 0.5).values().array() == 1.0).all(), "expected all ones");
  });
  add("cenmf_solver", "band with residual norm sigma2 has weight exp(-1)", [] {
    expect(near(band_weights_from_norms(vec({2.5}), 2.5)[0], std::exp(-1.0)), "expected exp(-1)");
  });
  add("cenmf_solver", "exact data puts sigma2 at the floor", [] {
    const auto f = exact_instance(7);
    expect(update_sigma2(f.Y, f.X, f.W, 1.0, 1e-9) == 1e-9, "expected the floor");
  });
  add("cenmf_solver", "constant residual c gives sigma2 = c^2/2 for alpha 1", [] {
    const double c = 0.75;
    const Matrix Y = Matrix::Constant(4, 6, c);
    expect(near(update_sigma2(Y, Matrix::Zero(4, 1), Matrix::Zero(1, 6), 1.0, 1e-12), c * c / 2.0), "c^2/2");
  });
  add("cenmf_solver", "constant positive bands give lambda 0", [] {
    expect(std::abs(estimate_lambda(Matrix::Constant(3, 8, 2.5))) <= 1e-15, "expected 0");
  });
  add("cenmf_solver", "one-hot bands give lambda sqrt(D)", [] {
    Matrix Y = Matrix::Zero(4, 9);
    for (Index d = 0; d < 4; ++d) Y(d, 2 * d) = 1.0;
    expect(near(estimate_lambda(Y), 2.0), "expected sqrt(D)");
  });

  // --- multiplicative updates -------------------------------------------------
  add("cenmf_solver", "exact fit is a fixed point of one update step", [] {
    const auto f = exact_instance(8);
    const FactorPair next = weighted_update_step(f.Y, f.X, f.W, 0.0, 1e-12);
    expect(oracle::rel_diff(next.X, f.X) <= 1e-10 && oracle::rel_diff(next.W, f.W) <= 1e-10, "moved off the fixed point");
  });
  add("cenmf_solver", "inner solve stops after one step at a fixed point", [] {
    const auto f = exact_instance(9);
    const InnerResult r = inner_solve(f.Y, f.X, f.W, 0.0, 1e-6, 50);
    expect(r.iterations == 1, "took " + std::to_string(r.iterations) + " steps");
  });

  // --- baselines ----------------------------------------------------------------
  add("baselines", "NMF leaves an exact factorisation unchanged", [] {
    const auto f = exact_instance(10);
    SolverConfig cfg;
    const SolveReport r = baseline_solve_from(f.Y, f.X, f.W, 0.0, Penalty::L1, cfg);
    expect(oracle::rel_diff(r.endmembers.data(), f.X) <= 1e-9 && oracle::rel_diff(r.abundances.data(), f.W) <= 1e-9,
           "factors moved");
  });
  add("baselines", "l1-NMF with lambda 0 repeats the NMF iterates exactly", [] {
    auto rng = make_rng(11);
    const Matrix Y = oracle::random_nonneg(12, 30, rng);
    SolverConfig cfg;
    cfg.max_outer = 5;
    cfg.max_inner = 7;
    const SolveReport a = nmf_solve(Y, 3, cfg);
    const SolveReport b = l1_nmf_solve(Y, 3, 0.0, cfg);
    expect(a.endmembers.data() == b.endmembers.data() && a.abundances.data() == b.abundances.data() &&
               a.objective_trace == b.objective_trace,
           "sequences differ");
  });
  add("baselines", "l1/2-NMF with lambda 0 repeats the NMF iterates exactly", [] {
    auto rng = make_rng(12);
    const Matrix Y = oracle::random_nonneg(12, 30, rng);
    SolverConfig cfg;
    cfg.max_outer = 5;
    cfg.max_inner = 7;
    const SolveReport a = nmf_solve(Y, 3, cfg);
    const SolveReport b = l12_nmf_solve(Y, 3, 0.0, cfg);
    expect(a.endmembers.data() == b.endmembers.data() && a.abundances.data() == b.abundances.data(), "sequences differ");
  });

  // --- init -----------------------------------------------------------------------
  add("init", "same seed gives the same endmember selection", [] {
    auto rng = make_rng(13);
    const Matrix Y = oracle::random_nonneg(10, 40, rng);
    const auto a = select_endmembers(Y, 4, 99);
    const auto b = select_endmembers(Y, 4, 99);
    expect(a.pixels == b.pixels && a.endmembers.data() == b.endmembers.data(), "selection differs");
  });
  add("init", "single-endmember NNLS has the clipped closed form", [] {
    const Vector x = vec({1.0, 2.0, 0.5});
    const Vector y = vec({0.3, 1.1, 0.2});
    Matrix X(3, 1);
    X.col(0) = x;
    const Vector w = init_abundances(y, X).data().col(0);
    expect(near(w[0], std::max(0.0, x.dot(y) / x.dot(x)), 1e-12), "closed form");
    const Vector neg = init_abundances(Matrix::Zero(3, 1), X).data().col(0);
    expect(neg[0] == 0.0, "zero pixel");
  });
  add("init", "zero pixel gets zero abundances", [] {
    auto rng = make_rng(14);
    const Matrix X = oracle::random_nonneg(5, 3, rng);
    expect(init_abundances(Matrix::Zero(5, 1), X).data().isZero(0.0), "expected zeros");
  });

  // --- generator --------------------------------------------------------------------
  add("synthgen", "uniform block labels remix every pixel into two halves", [] {
    const int z = 4;
    const std::vector<int> labels(16, 0);
    const Matrix smooth = smooth_abundances(block_abundances(z, 3, labels), z);
    expect((smooth.row(0).array() == 1.0).all() && smooth.bottomRows(2).isZero(0.0), "pure before remixing");
    const Matrix W = replace_pure_pixels(smooth, 0.8, 5);
    for (Index n = 0; n < W.cols(); ++n) {
      int nonzero = 0;
      for (Index k = 0; k < W.rows(); ++k) {
        if (W(k, n) != 0.0) {
          ++nonzero;
          expect(W(k, n) == 0.5, "abundance differs from 0.5");
        }
      }
      expect(nonzero == 2, "pixel has " + std::to_string(nonzero) + " nonzero abundances");
    }
  });
  add("synthgen", "0 dB noise variance equals the band mean square", [] {
    expect(noise_variance_for_snr(0.37, 0.0) == 0.37, "expected the mean square");
  });
  add("synthgen", "10 dB noise variance is a tenth of the band mean square", [] {
    expect(near(noise_variance_for_snr(0.37, 10.0), 0.037), "expected a tenth");
  });

  // --- metrics -----------------------------------------------------------------------
  add("metrics", "SAD of identical spectra is 0", [] { expect(sad(vec({1, 2, 3}), vec({1, 2, 3})) == 0.0, "nonzero"); });
  add("metrics", "SAD of orthogonal spectra is pi/2", [] {
    expect(near(sad(vec({1, 0, 0}), vec({0, 3, 0})), std::numbers::pi / 2), "expected pi/2");
  });
  add("metrics", "SAD of [1,1,0] and [1,0,0] is pi/4", [] {
    expect(near(sad(vec({1, 1, 0}), vec({1, 0, 0})), std::numbers::pi / 4), "expected pi/4");
  });
  add("metrics", "RMSE of identical maps is 0", [] { expect(rmse(vec({1, 2}), vec({1, 2})) == 0.0, "nonzero"); });
  add("metrics", "RMSE under a constant offset is the offset", [] {
    expect(near(rmse(vec({0.1, 0.4, 0.3}), vec({0.35, 0.65, 0.55})), 0.25), "expected |c|");
  });
  add("metrics", "RMSE of a single unit difference over 4 pixels is 0.5", [] {
    expect(rmse(vec({1, 0, 0, 0}), vec({0, 0, 0, 0})) == 0.5, "expected 0.5");
  });
  add("metrics", "swapped columns are matched back", [] {
    const Matrix X = mat({{1, 0, 0.2}, {0, 1, 0.3}, {0.1, 0.1, 1}});
    Matrix S = X;
    S.col(0).swap(S.col(2));
    expect(match_endmembers(X, S) == std::vector<Index>{2, 1, 0}, "expected the inverse swap");
  });
  add("metrics", "column scaling keeps the identity matching", [] {
    const Matrix X = mat({{1, 0, 0.2}, {0, 1, 0.3}, {0.1, 0.1, 1}});
    const Matrix S = X * vec({2.0, 0.3, 7.0}).asDiagonal();
    expect(match_endmembers(X, S) == std::vector<Index>{0, 1, 2}, "expected identity");
  });
  add("metrics", "perfect permuted recovery scores zero", [] {
    const Matrix X = mat({{1, 0, 0.2}, {0, 1, 0.3}, {0.1, 0.1, 1}});
    const Matrix W = mat({{0.2, 0.5}, {0.3, 0.1}, {0.5, 0.4}});
    Eigen::PermutationMatrix<Eigen::Dynamic> p(3);
    p.indices() << 2, 0, 1;
    const EvaluationTable t = evaluate_run(X, W, X * p, p.transpose() * W);
    expect(t.mean_sad == 0.0 && t.mean_rmse == 0.0, "nonzero score");
  });
  add("metrics", "zero abundance estimate scores the rms of the true map", [] {
    const Matrix X = mat({{1, 0}, {0, 1}});
    const Matrix W = mat({{0.2, 0.6, 0.1}, {0.8, 0.4, 0.9}});
    const EvaluationTable t = evaluate_run(X, W, X, Matrix::Zero(2, 3));
    for (Index k = 0; k < 2; ++k) {
      expect(near(t.rows[static_cast<std::size_t>(k)].rmse, std::sqrt(W.row(k).squaredNorm() / 3.0)), "rms");
    }
  });

  // --- io --------------------------------------------------------------------------
  add("io", "CSV text parses into a 2x2 matrix", [] {
    const fs::path dir = scratch_dir("csv");
    std::ofstream(dir / "m.csv") << "1,2\n3,4";
    expect(io::load_matrix(dir / "m.csv") == mat({{1, 2}, {3, 4}}), "wrong values");
  });
  add("io", "ragged CSV is a shape mismatch", [] {
    const fs::path dir = scratch_dir("ragged");
    std::ofstream(dir / "m.csv") << "1,2,3\n4,5\n";
    expect(throws_as<ShapeMismatch>([&] { io::load_matrix(dir / "m.csv"); }), "expected ShapeMismatch");
  });
  add("io", "RAWF64 round trip of a 3x4 matrix is bit-identical", [] {
    const fs::path dir = scratch_dir("raw");
    auto rng = make_rng(15);
    const Matrix m = oracle::random_nonneg(3, 4, rng) * 1e3;
    io::save_matrix(m, dir / "m.f64");
    const Matrix back = io::load_matrix(dir / "m.f64");
    expect(back.rows() == 3 && back.cols() == 4 && std::memcmp(back.data(), m.data(), sizeof(double) * 12) == 0,
           "bits differ");
  });
  add("io", "CSV round trip has zero max-abs difference", [] {
    const fs::path dir = scratch_dir("csvrt");
    auto rng = make_rng(16);
    const Matrix m = oracle::random_nonneg(5, 3, rng) / 3.0;
    io::save_matrix(m, dir / "m.csv");
    expect((io::load_matrix(dir / "m.csv") - m).cwiseAbs().maxCoeff() == 0.0, "lost digits");
  });
  add("io", "saving to an unwritable path is an I/O error", [] {
    expect(throws_as<IoError>([] { io::save_matrix(Matrix::Ones(2, 2), "/nonexistent_dir/x/m.csv"); }),
           "expected IoError");
  });

  // --- command line ------------------------------------------------------------------
  add("cli", "generate twice with the same flags gives identical D x 4096 files", [] {
    const fs::path dir = scratch_dir("gen");
    const std::vector<std::string> flags{"--z", "8", "--k", "6", "--mean-snr", "30", "--snr-std", "5", "--seed", "1"};
    auto a = flags;
    a.insert(a.begin(), "generate");
    a.insert(a.end(), {"--format", "rawf64", "--out-dir", (dir / "a").string()});
    auto b = a;
    b.back() = (dir / "b").string();
    expect(run_cli(a).exit_code == 0 && run_cli(b).exit_code == 0, "generate failed");
    const Matrix Y = io::load_matrix(dir / "a" / "Y_noisy.f64");
    expect(Y.cols() == 4096 && Y.rows() == kBuiltinBands, "unexpected shape");
    for (const auto& entry : fs::directory_iterator(dir / "a")) {
      expect(read_file(entry.path()) == read_file(dir / "b" / entry.path().filename()),
             entry.path().filename().string() + " differs");
    }
  });
  add("cli", "generate with --k 1 is a usage error", [] {
    const fs::path dir = scratch_dir("k1");
    expect(run_cli({"generate", "--k", "1", "--out-dir", dir.string()}).exit_code == 2, "expected exit 2");
  });
  add("cli", "unmix without --k is a usage error", [] {
    const fs::path dir = scratch_dir("nok");
    io::save_matrix(Matrix::Ones(3, 4), dir / "y.csv");
    expect(run_cli({"unmix", "--input", (dir / "y.csv").string(), "--method", "nmf", "--out-dir", dir.string()})
                   .exit_code == 2,
           "expected exit 2");
  });
  add("cli", "l1nmf with lambda 0 writes the same factors as nmf", [] {
    const fs::path dir = scratch_dir("red");
    auto rng = make_rng(17);
    io::save_matrix(oracle::random_nonneg(20, 50, rng), dir / "y.csv");
    auto base = std::vector<std::string>{"unmix", "--input", (dir / "y.csv").string(), "--k", "3", "--seed", "4",
                                         "--max-outer", "4", "--max-inner", "6"};
    auto a = base;
    a.insert(a.end(), {"--method", "l1nmf", "--lambda", "0", "--out-dir", (dir / "a").string()});
    auto b = base;
    b.insert(b.end(), {"--method", "nmf", "--out-dir", (dir / "b").string()});
    expect(run_cli(a).exit_code == 0 && run_cli(b).exit_code == 0, "unmix failed");
    for (const char* f : {"X_est.csv", "W_est.csv"}) {
      expect(read_file(dir / "a" / f) == read_file(dir / "b" / f), std::string(f) + " differs");
    }
  });
  add("cli", "one-repeat single-method sweep plots one line per endmember", [] {
    const fs::path dir = scratch_dir("sweep1");
    const auto r = run_cli({"sweep", "--snr-list", "30,20", "--methods", "nmf", "--repeats", "1", "--z", "2", "--k",
                            "3", "--max-outer", "2", "--max-inner", "3", "--out-dir", dir.string()});
    expect(r.exit_code == 0, "sweep failed: " + r.err);
    expect(count_polylines(read_file(dir / "sad_nmf.svg")) == 3, "expected 3 lines");
  });
  add("cli", "empty band mask gives identical full and masked scores", [] {
    const fs::path dir = scratch_dir("mask0");
    expect(run_cli({"generate", "--z", "3", "--k", "3", "--seed", "2", "--out-dir", (dir / "s").string()}).exit_code == 0,
           "generate failed");
    std::ofstream(dir / "mask.txt") << "";
    const auto r = run_cli({"bandmask-compare", "--scene-dir", (dir / "s").string(), "--mask",
                            (dir / "mask.txt").string(), "--methods", "nmf,cenmf", "--max-outer", "3", "--max-inner",
                            "4", "--out-dir", (dir / "o").string()});
    expect(r.exit_code == 0, "bandmask-compare failed: " + r.err);
    std::istringstream lines(read_file(dir / "o" / "bandmask_summary.csv"));
    std::string line;
    std::getline(lines, line);
    int rows = 0;
    while (std::getline(lines, line)) {
      std::vector<std::string> f;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
      expect(f.size() == 6 && f[1] == f[2] && f[4] == f[5], "columns differ: " + line);
      ++rows;
    }
    expect(rows == 2, "expected two methods");
  });
  add("cli", "mask leaving 2 bands with K=3 surfaces a rank error", [] {
    const fs::path dir = scratch_dir("maskrank");
    expect(run_cli({"generate", "--z", "3", "--k", "3", "--seed", "2", "--out-dir", (dir / "s").string()}).exit_code == 0,
           "generate failed");
    {
      std::ofstream mask(dir / "mask.txt");
      for (Index d = 2; d < kBuiltinBands; ++d) mask << d << '\n';
    }
    const auto r = run_cli({"bandmask-compare", "--scene-dir", (dir / "s").string(), "--mask",
                            (dir / "mask.txt").string(), "--out-dir", (dir / "o").string()});
    expect(r.exit_code == 3 && r.err.find("rank") != std::string::npos, "exit " + std::to_string(r.exit_code) + ": " + r.err);
  });

  return checks;
}

}  // namespace harness
