// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wffr/dataset.hpp"
#include "wffr/dlm.hpp"
#include "wffr/ffr.hpp"
#include "wffr/inference.hpp"
#include "wffr/sim.hpp"
#include "wffr/wavelet.hpp"

namespace py = pybind11;
using namespace wffr;

namespace {

py::array_t<double> cube_to_numpy(const DrawCube& c) {
  py::array_t<double> out({c.M, c.T, c.S});
  std::copy(c.data.begin(), c.data.end(), out.mutable_data());
  return out;
}

DrawCube cube_from_numpy(const py::array_t<double, py::array::c_style |
                                                        py::array::forcecast>& arr) {
  if (arr.ndim() != 3) throw ValidationError("draw cube must be a (M, T, S) array");
  DrawCube c(int(arr.shape(0)), int(arr.shape(1)), int(arr.shape(2)));
  std::copy(arr.data(), arr.data() + arr.size(), c.data.begin());
  return c;
}

WaveletSpec make_spec(int vanishing_moments, int levels, int original_length,
                      const std::string& boundary) {
  WaveletSpec spec;
  spec.vanishing_moments = vanishing_moments;
  spec.levels = levels;
  spec.original_length = original_length;
  if (boundary == "zero_pad") {
    spec.boundary = BoundaryRule::zero_pad;
  } else if (boundary == "periodic") {
    spec.boundary = BoundaryRule::periodic;
  } else if (boundary == "reflect") {
    spec.boundary = BoundaryRule::reflect;
  } else {
    throw ValidationError("unknown boundary rule: " + boundary);
  }
  spec.validate();
  return spec;
}

FunctionalDataset make_dataset(const MatrixXd& y, const MatrixXd& x,
                               const std::optional<MatrixXd>& w,
                               const std::vector<bool>& w_continuous) {
  FunctionalDataset ds;
  ds.Y = y;
  ds.X = x;
  if (w) ds.W = *w;
  ds.w_continuous = w_continuous;
  ds.validate();
  return ds;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bayesian wavelet-space function-on-function regression";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<WaveletSpec>(m, "WaveletSpec")
      .def(py::init(&make_spec), py::arg("vanishing_moments") = 4,
           py::arg("levels") = 6, py::arg("original_length") = 0,
           py::arg("boundary") = "zero_pad")
      .def_readonly("vanishing_moments", &WaveletSpec::vanishing_moments)
      .def_readonly("levels", &WaveletSpec::levels)
      .def_readonly("original_length", &WaveletSpec::original_length)
      .def_property_readonly("padded_length", &WaveletSpec::padded_length);

  py::class_<WaveletOperator>(m, "WaveletOperator")
      .def(py::init<WaveletSpec>())
      .def_property_readonly("padded_length", &WaveletOperator::padded_length)
      .def_property_readonly("original_length", &WaveletOperator::original_length)
      .def("matrix", [](const WaveletOperator& op) -> MatrixXd { return op.matrix(); })
      .def("level_of", &WaveletOperator::level_of)
      .def("forward", &WaveletOperator::forward)
      .def("inverse", &WaveletOperator::inverse);

  m.def("build_operator", &build_operator);
  m.def("dwt_rows", &dwt_rows, py::arg("data"), py::arg("op"));
  m.def("idwt_rows", &idwt_rows, py::arg("coeffs"), py::arg("op"));
  m.def("project_surface", &project_surface, py::arg("beta_star"), py::arg("t_op"),
        py::arg("s_op"));

  py::class_<McmcConfig>(m, "McmcConfig")
      .def(py::init([](int total_draws, int burn_in, int thin, uint64_t seed) {
             McmcConfig c;
             c.total_draws = total_draws;
             c.burn_in = burn_in;
             c.thin = thin;
             c.seed = seed;
             c.validate();
             return c;
           }),
           py::arg("total_draws") = 2000, py::arg("burn_in") = 1000,
           py::arg("thin") = 1, py::arg("seed") = 1)
      .def_readonly("total_draws", &McmcConfig::total_draws)
      .def_readonly("burn_in", &McmcConfig::burn_in)
      .def_property_readonly("retained", &McmcConfig::retained);

  py::class_<PreprocessReport>(m, "PreprocessReport")
      .def_readonly("retained_components", &PreprocessReport::retained_components)
      .def_readonly("variance_fraction", &PreprocessReport::variance_fraction)
      .def_readonly("y_mean", &PreprocessReport::y_mean)
      .def_readonly("y_sd", &PreprocessReport::y_sd)
      .def_readonly("x_mean", &PreprocessReport::x_mean)
      .def_readonly("x_sd", &PreprocessReport::x_sd)
      .def("to_json", [](const PreprocessReport& r) { return r.to_json().dump(); });

  py::class_<FunctionalDataset>(m, "FunctionalDataset")
      .def(py::init(&make_dataset), py::arg("Y"), py::arg("X"),
           py::arg("W") = std::nullopt,
           py::arg("w_continuous") = std::vector<bool>{})
      .def_readonly("Y", &FunctionalDataset::Y)
      .def_readonly("X", &FunctionalDataset::X)
      .def_readonly("W", &FunctionalDataset::W);

  m.def(
      "preprocess",
      [](const FunctionalDataset& ds, bool scale, double pca_fraction) {
        PreprocessOptions opts;
        opts.scale = scale;
        opts.pca_fraction = pca_fraction;
        return preprocess(ds, opts);
      },
      py::arg("dataset"), py::arg("scale") = false, py::arg("pca_fraction") = 0.95);

  py::class_<PosteriorDraws>(m, "PosteriorDraws")
      .def_property_readonly("surface",
                             [](const PosteriorDraws& d) { return cube_to_numpy(d.surface); })
      .def_property_readonly("gamma_curves",
                             [](const PosteriorDraws& d) { return cube_to_numpy(d.gamma_curves); })
      .def_readonly("sigma2", &PosteriorDraws::sigma2)
      .def_readonly("seed", &PosteriorDraws::seed)
      .def_readonly("config_hash", &PosteriorDraws::config_hash)
      .def("surface_mean", &PosteriorDraws::surface_mean);

  m.def(
      "fit_ffr",
      [](const FunctionalDataset& ds, const WaveletSpec& t_spec,
         const WaveletSpec& s_spec, const McmcConfig& mcmc, int threads) {
        FfrOptions opts;
        opts.threads = threads;
        return fit_ffr(ds, t_spec, s_spec, mcmc, opts);
      },
      py::arg("dataset"), py::arg("t_spec"), py::arg("s_spec"), py::arg("mcmc"),
      py::arg("threads") = 0);

  py::class_<DlmFit>(m, "DlmFit")
      .def_property_readonly("surface",
                             [](const DlmFit& d) { return cube_to_numpy(d.surface); })
      .def_readonly("sigma2", &DlmFit::sigma2)
      .def("surface_mean", &DlmFit::surface_mean);

  m.def(
      "fit_dlm_surface",
      [](const FunctionalDataset& ds, const WaveletSpec& t_spec,
         const McmcConfig& mcmc, int threads) {
        DlmOptions opts;
        opts.threads = threads;
        return fit_dlm_surface(ds, t_spec, mcmc, opts);
      },
      py::arg("dataset"), py::arg("t_spec"), py::arg("mcmc"), py::arg("threads") = 0);

  m.def(
      "pointwise_probability",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& draws,
         double delta) { return pointwise_probability(cube_from_numpy(draws), delta); },
      py::arg("draws"), py::arg("delta"));

  py::class_<BFDRResult>(m, "BFDRResult")
      .def_readonly("p_grid", &BFDRResult::p_grid)
      .def_readonly("delta", &BFDRResult::delta)
      .def_readonly("alpha", &BFDRResult::alpha)
      .def_readonly("nu_alpha", &BFDRResult::nu_alpha)
      .def_readonly("lambda_count", &BFDRResult::lambda)
      .def_property_readonly("flags", [](const BFDRResult& r) {
        py::array_t<bool> out({int(r.flags.rows()), int(r.flags.cols())});
        auto buf = out.mutable_unchecked<2>();
        for (int t = 0; t < r.flags.rows(); ++t)
          for (int s = 0; s < r.flags.cols(); ++s) buf(t, s) = r.flags(t, s);
        return out;
      });

  m.def("bfdr_flag", &bfdr_flag, py::arg("p_grid"), py::arg("alpha"),
        py::arg("delta") = std::numeric_limits<double>::quiet_NaN());

  py::class_<SimBaSResult>(m, "SimBaSResult")
      .def_readonly("simbas", &SimBaSResult::simbas)
      .def_readonly("mean", &SimBaSResult::mean)
      .def_readonly("sd", &SimBaSResult::sd)
      .def_readonly("rho", &SimBaSResult::rho)
      .def_readonly("band_alphas", &SimBaSResult::band_alphas)
      .def_readonly("lower", &SimBaSResult::lower)
      .def_readonly("upper", &SimBaSResult::upper);

  m.def(
      "simbas",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& draws,
         const std::vector<double>& band_alphas) {
        return simbas(cube_from_numpy(draws), band_alphas);
      },
      py::arg("draws"), py::arg("band_alphas") = std::vector<double>{0.05});

  m.def(
      "generate_dataset",
      [](const std::string& scenario_json, int replicate) {
        Scenario sc = Scenario::from_json(nlohmann::json::parse(scenario_json));
        auto [ds, truth] = generate_dataset(sc, replicate);
        return py::make_tuple(ds.Y, ds.X, truth.values);
      },
      py::arg("scenario_json"), py::arg("replicate") = 0);

  m.def(
      "run_replicates",
      [](const std::string& scenario_json, int threads) {
        Scenario sc = Scenario::from_json(nlohmann::json::parse(scenario_json));
        return run_replicates(sc, threads).to_json().dump();
      },
      py::arg("scenario_json"), py::arg("threads") = 0);

  m.attr("__version__") = "0.1.0";
}
