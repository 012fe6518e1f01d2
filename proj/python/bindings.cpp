#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "robust_unmix/robust_unmix.hpp"

namespace py = pybind11;
using namespace robust_unmix;

namespace {

SolverConfig make_config(std::optional<double> lambda, std::optional<double> alpha, double outer_tol, int max_outer,
                         double inner_tol, int max_inner, double denom_eps, std::optional<double> sigma2_floor,
                         std::uint64_t seed) {
  SolverConfig c;
  c.lambda = lambda;
  c.alpha = alpha;
  c.outer_tol = outer_tol;
  c.max_outer = max_outer;
  c.inner_tol = inner_tol;
  c.max_inner = max_inner;
  c.denom_eps = denom_eps;
  c.sigma2_floor = sigma2_floor;
  c.seed = seed;
  c.validate();
  return c;
}

py::dict report_dict(const SolveReport& r) {
  py::dict d;
  d["endmembers"] = r.endmembers.data();
  d["abundances"] = r.abundances.data();
  d["band_weights"] = r.band_weights.values();
  d["objective_trace"] = r.objective_trace;
  d["objective_after"] = r.objective_after;
  d["sigma2_trace"] = r.sigma2_trace;
  d["termination"] = std::string(to_string(r.termination));
  d["lambda"] = r.lambda;
  d["outer_iterations"] = r.outer_iterations;
  d["inner_iterations"] = r.inner_iterations;
  d["effective_rank"] = effective_rank(r);
  return d;
}

py::dict table_dict(const EvaluationTable& t) {
  py::list rows;
  for (const auto& s : t.rows) {
    py::dict row;
    row["true_index"] = s.true_index;
    row["estimate_index"] = s.estimate_index;
    row["sad"] = s.sad;
    row["rmse"] = s.rmse;
    rows.append(row);
  }
  py::dict d;
  d["rows"] = rows;
  d["mean_sad"] = t.mean_sad;
  d["mean_rmse"] = t.mean_rmse;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Robust hyperspectral unmixing (correntropy NMF with l1 sparsity) and its baselines";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  (void)base;

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init(&make_config), py::kw_only(), py::arg("lambda_") = 0.0, py::arg("alpha") = py::none(),
           py::arg("outer_tol") = 1e-6, py::arg("max_outer") = 100, py::arg("inner_tol") = 1e-6,
           py::arg("max_inner") = 50, py::arg("denom_eps") = 1e-12, py::arg("sigma2_floor") = py::none(),
           py::arg("seed") = 0)
      .def_readwrite("lambda_", &SolverConfig::lambda)
      .def_readwrite("alpha", &SolverConfig::alpha)
      .def_readwrite("outer_tol", &SolverConfig::outer_tol)
      .def_readwrite("max_outer", &SolverConfig::max_outer)
      .def_readwrite("inner_tol", &SolverConfig::inner_tol)
      .def_readwrite("max_inner", &SolverConfig::max_inner)
      .def_readwrite("denom_eps", &SolverConfig::denom_eps)
      .def_readwrite("sigma2_floor", &SolverConfig::sigma2_floor)
      .def_readwrite("seed", &SolverConfig::seed);

  m.def("frobenius_loss", &frobenius_loss, py::arg("Y"), py::arg("X"), py::arg("W"));
  m.def("correntropy_loss", &correntropy_loss, py::arg("Y"), py::arg("X"), py::arg("W"), py::arg("sigma2"));
  m.def("cenmf_objective", &cenmf_objective, py::arg("Y"), py::arg("X"), py::arg("W"), py::arg("sigma2"),
        py::arg("lambda_"));
  m.def("augmented_objective", &augmented_objective, py::arg("Y"), py::arg("X"), py::arg("W"), py::arg("u"),
        py::arg("sigma2"), py::arg("lambda_"));
  m.def(
      "band_weights",
      [](const Matrix& Y, const Matrix& X, const Matrix& W, double sigma2) {
        return Vector(band_weights(Y, X, W, sigma2).values());
      },
      py::arg("Y"), py::arg("X"), py::arg("W"), py::arg("sigma2"));
  m.def("update_sigma2", &update_sigma2, py::arg("Y"), py::arg("X"), py::arg("W"), py::arg("alpha"),
        py::arg("sigma2_floor"));
  m.def("estimate_lambda", &estimate_lambda, py::arg("Y"));

  m.def(
      "unmix",
      [](const Matrix& Y, Index K, const std::string& method, const SolverConfig& config) {
        const Method which = parse_method(method);
        SolveReport report = [&] {
          py::gil_scoped_release release;
          return run_method(which, Y, K, config);
        }();
        return report_dict(report);
      },
      py::arg("Y"), py::arg("K"), py::arg("method") = "cenmf", py::arg("config") = SolverConfig{},
      "Runs nmf, l1nmf, l12nmf or cenmf from the standard initialisation and returns a report dict.");
  m.def(
      "cenmf_solve_from",
      [](const Matrix& Y, const Matrix& X0, const Matrix& W0, const SolverConfig& config) {
        SolveReport report = [&] {
          py::gil_scoped_release release;
          return cenmf_solve_from(Y, X0, W0, config);
        }();
        return report_dict(report);
      },
      py::arg("Y"), py::arg("X0"), py::arg("W0"), py::arg("config") = SolverConfig{});
  m.def(
      "init_endmembers",
      [](const Matrix& Y, Index K, std::uint64_t seed) {
        const EndmemberSelection sel = select_endmembers(Y, K, seed);
        return py::make_tuple(sel.endmembers.data(), sel.pixels, sel.used_fallback);
      },
      py::arg("Y"), py::arg("K"), py::arg("seed") = 0, "Returns (X0, chosen pixel indices, used_fallback).");
  m.def(
      "init_abundances", [](const Matrix& Y, const Matrix& X) { return Matrix(init_abundances(Y, X).data()); },
      py::arg("Y"), py::arg("X"));

  m.def(
      "generate_scene",
      [](int z, Index k, double mean_snr_db, double snr_std_db, std::uint64_t seed, int corrupt_bands,
         double corrupt_snr_db, std::optional<Matrix> library) {
        SceneSpec spec;
        spec.z = z;
        spec.mean_snr_db = mean_snr_db;
        spec.snr_std_db = snr_std_db;
        spec.seed = seed;
        const Matrix lib = library ? *library : builtin_library().data();
        if (k > lib.cols()) throw ValidationError("k exceeds the number of library spectra");
        spec.endmember_library = Endmembers(lib.leftCols(k));
        spec.validate();
        const CorruptedScene out = generate_corrupted_scene(spec, Corruption{corrupt_bands, corrupt_snr_db});
        py::dict d;
        d["Y_noisy"] = out.scene.Y_noisy.data();
        d["Y_clean"] = out.scene.Y_clean.data();
        d["X_true"] = out.scene.X_true.data();
        d["W_true"] = out.scene.W_true.data();
        d["band_snr_db"] = out.scene.band_snr_db;
        d["corrupted_bands"] = out.corrupted_bands;
        return d;
      },
      py::kw_only(), py::arg("z") = 8, py::arg("k") = 6, py::arg("mean_snr_db") = 30.0, py::arg("snr_std_db") = 5.0,
      py::arg("seed") = 0, py::arg("corrupt_bands") = 0, py::arg("corrupt_snr_db") = 0.0,
      py::arg("library") = py::none());
  m.def("builtin_library", [] { return builtin_library().data(); });

  m.def("sad", &sad, py::arg("x_true"), py::arg("x_est"));
  m.def("rmse", &rmse, py::arg("w_true"), py::arg("w_est"));
  m.def("match_endmembers", &match_endmembers, py::arg("X_true"), py::arg("X_est"));
  m.def(
      "evaluate_run",
      [](const Matrix& X_true, const Matrix& W_true, const Matrix& X_est, const Matrix& W_est,
         std::vector<bool> band_mask, bool normalize_abundances) {
        EvaluateOptions options{std::move(band_mask), normalize_abundances};
        return table_dict(evaluate_run(X_true, W_true, X_est, W_est, options));
      },
      py::arg("X_true"), py::arg("W_true"), py::arg("X_est"), py::arg("W_est"),
      py::arg("band_mask") = std::vector<bool>{}, py::arg("normalize_abundances") = false);

  m.def(
      "load_matrix", [](const std::filesystem::path& path) { return io::load_matrix(path); }, py::arg("path"));
  m.def(
      "save_matrix",
      [](const Matrix& matrix, const std::filesystem::path& path) { io::save_matrix(matrix, path); },
      py::arg("matrix"), py::arg("path"));
}
