#include <optional>
#include <string>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dmusic/bounds_oracle.hpp"
#include "dmusic/cluster.hpp"
#include "dmusic/error.hpp"
#include "dmusic/hankel_music.hpp"
#include "dmusic/io.hpp"
#include "dmusic/model.hpp"
#include "dmusic/multipole.hpp"
#include "dmusic/pipeline.hpp"

namespace py = pybind11;
using namespace dmusic;

namespace {

SampledMeasurement as_measurement(const Eigen::VectorXd& grid, const Eigen::VectorXcd& values, double omega,
                                  double sigma, bool modulated) {
  require(grid.size() == values.size(), ErrorKind::invalid_input, "grid and values differ in length");
  SampledMeasurement m{grid, values, omega, sigma, modulated};
  m.validate();
  return m;
}

SourceMeasure as_measure(const std::vector<double>& locations, const std::vector<cplx>& amplitudes) {
  require(locations.size() == amplitudes.size(), ErrorKind::invalid_input,
          "locations and amplitudes differ in length");
  std::vector<PointSource> sources;
  for (std::size_t q = 0; q < locations.size(); ++q) sources.push_back({locations[q], amplitudes[q], -1});
  return SourceMeasure(std::move(sources));
}

}  // namespace

PYBIND11_MODULE(_dmusic, mod) {
  mod.doc() = "Decoupled MUSIC for clustered line spectra";

  // Held for the lifetime of the interpreter.
  static py::handle error_type = py::exception<Error>(mod, "Error", PyExc_ValueError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error_type(e.what());
      exc.attr("kind") = to_string(e.kind());
      py::set_error(error_type, exc);
    }
  });

  mod.def("uniform_grid", &uniform_grid, py::arg("n"));

  mod.def(
      "synthesize",
      [](const std::vector<double>& locations, const std::vector<cplx>& amplitudes, int n, double omega, double sigma,
         std::optional<std::uint64_t> seed) {
        const auto m = synthesize(as_measure(locations, amplitudes), n, omega, sigma, seed);
        return py::make_tuple(m.grid, m.values);
      },
      py::arg("locations"), py::arg("amplitudes"), py::arg("n"), py::arg("omega") = 1.0, py::arg("sigma") = 0.0,
      py::arg("seed") = py::none());

  mod.def(
      "modulate",
      [](const Eigen::VectorXd& grid, const Eigen::VectorXcd& values) {
        return modulate(as_measurement(grid, values, 1.0, 0.0, false)).values;
      },
      py::arg("grid"), py::arg("values"));

  mod.def("multipole_order", &multipole_order, py::arg("D"), py::arg("sigma"), py::arg("m") = 1.0,
          py::arg("s_max") = kMaxMultipoleOrder);

  mod.def(
      "standard_music",
      [](const Eigen::VectorXd& grid, const Eigen::VectorXcd& values, double ts, double te, double tps, double sigma,
         double omega, std::optional<int> order) {
        MusicOptions opts;
        opts.order_override = order;
        return standard_music(as_measurement(grid, values, omega, sigma, false), ts, te, tps, sigma, opts).locations;
      },
      py::arg("grid"), py::arg("values"), py::arg("ts"), py::arg("te"), py::arg("tps"), py::arg("sigma"),
      py::arg("omega") = 1.0, py::arg("order") = py::none());

  mod.def(
      "music_with_prior",
      [](const Eigen::VectorXd& grid, const Eigen::VectorXcd& values, double center, double half_width, double tps,
         double sigma, double omega) {
        return music_with_prior(as_measurement(grid, values, omega, sigma, false), center, half_width, tps, sigma)
            .locations;
      },
      py::arg("grid"), py::arg("values"), py::arg("center"), py::arg("half_width"), py::arg("tps"), py::arg("sigma"),
      py::arg("omega") = 1.0);

  mod.def(
      "detect_clusters_json",
      [](const Eigen::VectorXd& grid, const Eigen::VectorXcd& values, double o_init, double d_init, double ict,
         double sigma, double omega, double lambda) {
        DetectOptions opts;
        opts.lambda = lambda;
        return to_json(detect_clusters(as_measurement(grid, values, omega, sigma, false), o_init, d_init, ict, sigma,
                                       opts))
            .dump();
      },
      py::arg("grid"), py::arg("values"), py::arg("o_init"), py::arg("d_init"), py::arg("ict"), py::arg("sigma"),
      py::arg("omega") = 1.0, py::arg("lambda_") = 0.5);

  mod.def(
      "decouple",
      [](const Eigen::VectorXd& grid, const Eigen::VectorXcd& values, const std::vector<double>& centers, double D,
         double sigma, double omega, bool modulated, double c_mea, double c_msf) {
        DecoupleOptions opts;
        opts.modulated = modulated;
        opts.c_mea = c_mea;
        opts.c_msf = c_msf;
        const auto r = decouple(as_measurement(grid, values, omega, sigma, modulated), centers, D, sigma, opts);
        py::list locals;
        for (const auto& lm : r.local_measurements) locals.append(py::make_tuple(lm.grid, lm.values));
        py::dict out;
        out["success"] = r.success;
        out["order"] = r.order_count;
        out["residual_norm"] = r.residual_norm;
        out["rank"] = r.rank;
        out["coefficients"] = r.coefficients;
        out["local_measurements"] = locals;
        out["warnings"] = r.warnings;
        return out;
      },
      py::arg("grid"), py::arg("values"), py::arg("centers"), py::arg("D"), py::arg("sigma"), py::arg("omega") = 1.0,
      py::arg("modulated") = true, py::arg("c_mea") = 3.0, py::arg("c_msf") = 0.9);

  mod.def(
      "run_json",
      [](const Eigen::VectorXd& grid, const Eigen::VectorXcd& values, double sigma, double omega,
         const std::string& config) {
        PipelineConfig base;
        base.sigma = sigma;
        const PipelineConfig cfg =
            config.empty() ? base : pipeline_config_from_json(json::parse(config), base);
        cfg.validate();
        return to_json(run(as_measurement(grid, values, omega, sigma, false), cfg)).dump();
      },
      py::arg("grid"), py::arg("values"), py::arg("sigma"), py::arg("omega") = 1.0, py::arg("config") = "");

  mod.def(
      "sweep_json",
      [](const std::string& kind, int draws, std::uint64_t seed) {
        SweepReport r;
        if (kind == "markov") r = sweep_markov(draws, seed);
        else if (kind == "linf_l1") r = sweep_linf_l1(draws, seed);
        else if (kind == "oscillatory") r = sweep_oscillatory(draws, false, seed);
        else if (kind == "oscillatory_second") r = sweep_oscillatory(draws, true, seed);
        else if (kind == "correlation") r = sweep_correlation(draws, true, seed);
        else if (kind == "correlation_plain") r = sweep_correlation(draws, false, seed);
        else if (kind == "residual") r = sweep_residual(draws, seed);
        else fail(ErrorKind::invalid_input, "kind: unknown sweep '" + kind + "'");
        return to_json(r).dump();
      },
      py::arg("kind"), py::arg("draws"), py::arg("seed"));
}
