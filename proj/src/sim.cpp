// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#include "wffr/sim.hpp"

#include <cmath>
#include <filesystem>

#include "wffr/dlm.hpp"
#include "wffr/ffr.hpp"
#include "wffr/inference.hpp"
#include "wffr/io.hpp"
#include "wffr/rng.hpp"
#include "wffr/threading.hpp"

namespace wffr {

namespace {
// stream purposes under the scenario seed
constexpr uint64_t kTagExposure = 101;
constexpr uint64_t kTagNoise = 102;
constexpr uint64_t kTagMcmc = 103;
}  // namespace

int TrueSurface::signal_cells() const {
  int c = 0;
  for (int t = 0; t < signal_mask.rows(); ++t)
    for (int s = 0; s < signal_mask.cols(); ++s)
      if (signal_mask(t, s)) ++c;
  return c;
}

TrueSurface TrueSurface::custom(MatrixXd values) {
  TrueSurface ts;
  ts.kind = Kind::custom;
  ts.signal_mask = BoolGrid::Constant(values.rows(), values.cols(), false);
  for (int t = 0; t < values.rows(); ++t)
    for (int s = 0; s < values.cols(); ++s) ts.signal_mask(t, s) = values(t, s) != 0.0;
  ts.values = std::move(values);
  return ts;
}

TrueSurface TrueSurface::vertical_band(int T, int S) {
  MatrixXd v = MatrixXd::Zero(T, S);
  for (int t = 39; t <= 43 && t < T; ++t)
    for (int s = 0; s < S; ++s) v(t, s) = 0.2;
  TrueSurface ts = custom(std::move(v));
  ts.kind = Kind::vertical_band;
  return ts;
}

TrueSurface TrueSurface::horizontal_band(int T, int S) {
  MatrixXd v = MatrixXd::Zero(T, S);
  const int site = std::min(49, S - 1);
  for (int t = 0; t <= 44 && t < T; ++t) v(t, site) = 0.2;
  TrueSurface ts = custom(std::move(v));
  ts.kind = Kind::horizontal_band;
  return ts;
}

TrueSurface TrueSurface::null_surface(int T, int S) {
  return custom(MatrixXd::Zero(T, S));
}

void Scenario::validate() const {
  if (truth.T() < 2 || truth.S() < 2) throw ValidationError("scenario: grid must be at least 2x2");
  if (!(noise.sigma2 > 0.0)) throw ValidationError("scenario: sigma2 must be positive");
  if (noise.rho_ar1 < 0.0 || noise.rho_ar1 >= 1.0) {
    throw ValidationError("scenario: rho_ar1 must be in [0,1)");
  }
  if (n < 2) throw ValidationError("scenario: n must be >= 2");
  if (replicates < 1) throw ValidationError("scenario: replicates must be >= 1");
  if (inference.alpha <= 0.0 || inference.alpha >= 1.0) {
    throw ValidationError("scenario: alpha must be in (0,1)");
  }
  for (double d : inference.deltas) {
    if (d < 0.0) throw ValidationError("scenario: deltas must be >= 0");
  }
  if (exposure.kind == ExposureSource::Kind::resample_csv && exposure.pool.rows() == 0) {
    throw ValidationError("scenario: resample exposure source has no rows");
  }
  mcmc.validate();
  WaveletSpec t_spec{WaveletFamily::daubechies, wavelet_vm, wavelet_levels,
                     BoundaryRule::zero_pad, truth.T()};
  t_spec.validate();
  WaveletSpec s_spec = t_spec;
  s_spec.original_length = truth.S();
  s_spec.validate();
}

std::pair<FunctionalDataset, TrueSurface> generate_dataset(const Scenario& sc,
                                                           int replicate) {
  sc.validate();
  const int T = sc.truth.T(), S = sc.truth.S(), n = sc.n;
  FunctionalDataset ds;
  ds.X.resize(n, T);
  Rng xrng = Rng::stream(sc.seed, {kTagExposure, uint64_t(replicate)});
  if (sc.exposure.kind == ExposureSource::Kind::synthetic_ar1) {
    const double rho = sc.exposure.rho;
    const double innov = std::sqrt(1.0 - rho * rho);
    for (int i = 0; i < n; ++i) {
      double a = xrng.normal();
      ds.X(i, 0) = std::max(sc.exposure.floor, sc.exposure.mean + sc.exposure.sd * a);
      for (int t = 1; t < T; ++t) {
        a = rho * a + innov * xrng.normal();
        ds.X(i, t) = std::max(sc.exposure.floor, sc.exposure.mean + sc.exposure.sd * a);
      }
    }
  } else {
    const int pool_rows = int(sc.exposure.pool.rows());
    if (int(sc.exposure.pool.cols()) != T) {
      throw ValidationError("scenario: exposure pool has " +
                            std::to_string(sc.exposure.pool.cols()) +
                            " columns, grid needs " + std::to_string(T));
    }
    for (int i = 0; i < n; ++i) {
      ds.X.row(i) = sc.exposure.pool.row(xrng.uniform_int(pool_rows));
    }
  }
  Rng erng = Rng::stream(sc.seed, {kTagNoise, uint64_t(replicate)});
  const double rho = sc.noise.rho_ar1;
  const double sig = std::sqrt(sc.noise.sigma2);
  const double innov = std::sqrt(1.0 - rho * rho);
  MatrixXd E(n, S);
  for (int i = 0; i < n; ++i) {
    double a = erng.normal();
    E(i, 0) = sig * a;
    for (int s = 1; s < S; ++s) {
      a = rho * a + innov * erng.normal();
      E(i, s) = sig * a;
    }
  }
  ds.Y = ds.X * sc.truth.values + E;
  ds.t_labels = index_labels(T);
  ds.s_labels = index_labels(S);
  return {std::move(ds), sc.truth};
}

MatrixXd rmse_map(const std::vector<MatrixXd>& estimates, const MatrixXd& truth) {
  if (estimates.empty()) throw ValidationError("rmse_map: need at least one estimate");
  MatrixXd acc = MatrixXd::Zero(truth.rows(), truth.cols());
  for (const auto& est : estimates) {
    if (est.rows() != truth.rows() || est.cols() != truth.cols()) {
      throw ValidationError("rmse_map: estimate dimensions do not match truth");
    }
    acc += (est - truth).cwiseAbs2();
  }
  return (acc / double(estimates.size())).cwiseSqrt();
}

namespace {

struct RepFlags {
  double sensitivity = std::numeric_limits<double>::quiet_NaN();
  double fdr = 0.0;
  double flagged_fraction = 0.0;
  BoolGrid flags;
};

RepFlags score_flags(const BoolGrid& flags, const BoolGrid& mask) {
  RepFlags out;
  out.flags = flags;
  int flagged = 0, hit = 0, signal = 0;
  for (int t = 0; t < flags.rows(); ++t) {
    for (int s = 0; s < flags.cols(); ++s) {
      if (mask(t, s)) ++signal;
      if (flags(t, s)) {
        ++flagged;
        if (mask(t, s)) ++hit;
      }
    }
  }
  const int cells = int(flags.rows() * flags.cols());
  out.flagged_fraction = double(flagged) / cells;
  out.fdr = flagged > 0 ? double(flagged - hit) / flagged : 0.0;
  if (signal > 0) out.sensitivity = double(hit) / signal;
  return out;
}

struct RepResult {
  MatrixXd mean_surface;
  std::map<double, RepFlags> bfdr;
  RepFlags simbas_rep;
  double signal_mean_abs = 0.0;
};

RepResult evaluate_method(const DrawCube& draws, const Scenario& sc) {
  RepResult res;
  MatrixXd mean = MatrixXd::Zero(draws.T, draws.S);
  for (int m = 0; m < draws.M; ++m) mean += draws.draw(m);
  mean /= double(draws.M);
  res.mean_surface = mean;
  const BoolGrid& mask = sc.truth.signal_mask;
  for (double delta : sc.inference.deltas) {
    MatrixXd p = pointwise_probability(draws, delta);
    BFDRResult b = bfdr_flag(p, sc.inference.alpha, delta);
    res.bfdr[delta] = score_flags(b.flags, mask);
  }
  SimBaSResult sb = simbas(draws, {sc.inference.alpha});
  res.simbas_rep = score_flags(simbas_flags(sb, sc.inference.alpha), mask);
  int nsig = 0;
  double acc = 0.0;
  for (int t = 0; t < mask.rows(); ++t) {
    for (int s = 0; s < mask.cols(); ++s) {
      if (mask(t, s)) {
        acc += std::abs(mean(t, s));
        ++nsig;
      }
    }
  }
  res.signal_mean_abs = nsig > 0 ? acc / nsig : 0.0;
  return res;
}

void aggregate(const std::vector<RepResult>& reps, const TrueSurface& truth,
               const std::vector<double>& deltas, MethodMetrics& mm) {
  const int R = int(reps.size());
  std::vector<MatrixXd> means;
  means.reserve(R);
  for (const auto& r : reps) means.push_back(r.mean_surface);
  mm.rmse = rmse_map(means, truth.values);
  mm.rmse_total = mm.rmse.sum();
  mm.mean_estimate = MatrixXd::Zero(truth.T(), truth.S());
  for (const auto& m : means) mm.mean_estimate += m;
  mm.mean_estimate /= double(R);
  double sig_acc = 0.0;
  for (const auto& r : reps) sig_acc += r.signal_mean_abs;
  mm.signal_mean_abs = sig_acc / R;

  auto agg_proc = [&](auto get) {
    ProcedureMetrics pm;
    pm.flag_freq = MatrixXd::Zero(truth.T(), truth.S());
    double s1 = 0, s2 = 0, f1 = 0, f2 = 0, c1 = 0, c2 = 0;
    int sens_n = 0;
    for (const auto& r : reps) {
      const RepFlags& rf = get(r);
      if (!std::isnan(rf.sensitivity)) {
        s1 += rf.sensitivity;
        s2 += rf.sensitivity * rf.sensitivity;
        ++sens_n;
      }
      f1 += rf.fdr;
      f2 += rf.fdr * rf.fdr;
      c1 += rf.flagged_fraction;
      c2 += rf.flagged_fraction * rf.flagged_fraction;
      for (int t = 0; t < rf.flags.rows(); ++t)
        for (int s = 0; s < rf.flags.cols(); ++s)
          if (rf.flags(t, s)) pm.flag_freq(t, s) += 1.0;
    }
    pm.flag_freq /= double(R);
    // with a single replicate the spread is unknowable; NaN serializes to
    // null so the report marks variance fields absent
    auto moments = [](double a, double b, int n, double& mean, double& sd) {
      if (n == 0) {
        mean = std::numeric_limits<double>::quiet_NaN();
        sd = std::numeric_limits<double>::quiet_NaN();
        return;
      }
      mean = a / n;
      sd = n > 1 ? std::sqrt(std::max(0.0, (b - n * mean * mean) / (n - 1)))
                 : std::numeric_limits<double>::quiet_NaN();
    };
    moments(s1, s2, sens_n, pm.sensitivity_mean, pm.sensitivity_sd);
    moments(f1, f2, R, pm.fdr_mean, pm.fdr_sd);
    moments(c1, c2, R, pm.flagged_fraction_mean, pm.flagged_fraction_sd);
    return pm;
  };
  for (double d : deltas) {
    mm.bfdr[d] = agg_proc([d](const RepResult& r) -> const RepFlags& {
      return r.bfdr.at(d);
    });
  }
  mm.simbas = agg_proc([](const RepResult& r) -> const RepFlags& {
    return r.simbas_rep;
  });
}

}  // namespace

MetricsReport run_replicates(const Scenario& sc, int threads) {
  sc.validate();
  const int R = sc.replicates;
  std::vector<RepResult> ffr_reps(R), dlm_reps(R);
  parallel_for(R, threads, [&](int rep) {
    auto [raw, truth] = generate_dataset(sc, rep);
    PreprocessOptions popts;
    popts.scale = sc.scale;
    auto [ds, report] = preprocess(raw, popts);
    McmcConfig mcmc = sc.mcmc;
    {
      // per-replicate sampler seed derived from the scenario seed
      uint64_t s = sc.seed;
      s ^= kTagMcmc * 0x9E3779B97F4A7C15ULL;
      (void)splitmix64(s);
      s ^= uint64_t(rep) * 0x9E3779B97F4A7C15ULL;
      mcmc.seed = splitmix64(s);
    }
    WaveletSpec t_spec{WaveletFamily::daubechies, sc.wavelet_vm, sc.wavelet_levels,
                       BoundaryRule::zero_pad, ds.T()};
    WaveletSpec s_spec = t_spec;
    s_spec.original_length = ds.S();
    try {
      if (sc.run_ffr) {
        FfrOptions fopts;
        fopts.threads = 1;  // replicate-level parallelism only
        PosteriorDraws pd = fit_ffr(ds, t_spec, s_spec, mcmc, fopts);
        if (sc.scale) rescale_to_original(pd, report);
        ffr_reps[rep] = evaluate_method(pd.surface, sc);
      }
      if (sc.run_dlm) {
        DlmOptions dopts;
        dopts.threads = 1;
        DlmFit df = fit_dlm_surface(ds, t_spec, mcmc, dopts);
        if (sc.scale) {
          for (int m = 0; m < df.surface.M; ++m) {
            double* d = df.surface.draw_ptr(m);
            for (int t = 0; t < df.surface.T; ++t)
              for (int s = 0; s < df.surface.S; ++s)
                d[size_t(t) * df.surface.S + s] *= report.y_sd[s] / report.x_sd[t];
          }
        }
        dlm_reps[rep] = evaluate_method(df.surface, sc);
      }
    } catch (const std::exception& e) {
      throw NumericalError("replicate " + std::to_string(rep) + ": " + e.what());
    }
  });

  MetricsReport report;
  report.scenario_name = sc.name;
  report.replicates = R;
  report.stnr = sc.noise.stnr();
  report.alpha = sc.inference.alpha;
  report.deltas = sc.inference.deltas;
  if (sc.run_ffr) {
    MethodMetrics mm;
    aggregate(ffr_reps, sc.truth, sc.inference.deltas, mm);
    report.ffr = std::move(mm);
  }
  if (sc.run_dlm) {
    MethodMetrics mm;
    aggregate(dlm_reps, sc.truth, sc.inference.deltas, mm);
    report.dlm = std::move(mm);
  }
  if (report.ffr && report.dlm && report.dlm->rmse_total > 0.0) {
    report.rmse_reduction_pct =
        100.0 * (1.0 - report.ffr->rmse_total / report.dlm->rmse_total);
  }
  return report;
}

namespace {

nlohmann::json proc_json(const ProcedureMetrics& pm) {
  nlohmann::json j;
  j["sensitivity_mean"] = pm.sensitivity_mean;
  j["sensitivity_sd"] = pm.sensitivity_sd;
  j["fdr_mean"] = pm.fdr_mean;
  j["fdr_sd"] = pm.fdr_sd;
  j["flagged_fraction_mean"] = pm.flagged_fraction_mean;
  j["flagged_fraction_sd"] = pm.flagged_fraction_sd;
  return j;
}

nlohmann::json method_json(const MethodMetrics& mm, const std::vector<double>& deltas) {
  nlohmann::json j;
  j["rmse_total"] = mm.rmse_total;
  j["signal_mean_abs"] = mm.signal_mean_abs;
  j["bfdr"] = nlohmann::json::array();
  for (double d : deltas) {
    nlohmann::json row = proc_json(mm.bfdr.at(d));
    row["delta"] = d;
    j["bfdr"].push_back(row);
  }
  j["simbas"] = proc_json(mm.simbas);
  return j;
}

}  // namespace

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["scenario"] = scenario_name;
  j["replicates"] = replicates;
  j["stnr"] = stnr;
  j["alpha"] = alpha;
  j["deltas"] = deltas;
  if (ffr) j["ffr"] = method_json(*ffr, deltas);
  if (dlm) j["dlm"] = method_json(*dlm, deltas);
  if (ffr && dlm) j["rmse_reduction_pct"] = rmse_reduction_pct;
  return j;
}

void write_metrics(const std::string& out_dir, const MetricsReport& report) {
  std::filesystem::create_directories(out_dir);
  write_json_file(out_dir + "/metrics.json", report.to_json());
  auto dump_method = [&](const MethodMetrics& mm, const std::string& name) {
    write_grid_csv(out_dir + "/rmse_" + name + ".csv", mm.rmse, "t", "s");
    write_grid_csv(out_dir + "/mean_estimate_" + name + ".csv", mm.mean_estimate,
                   "t", "s");
    for (const auto& [delta, pm] : mm.bfdr) {
      write_grid_csv(out_dir + "/bfdr_freq_" + name + "_" + format_short(delta) +
                         ".csv",
                     pm.flag_freq, "t", "s");
    }
    write_grid_csv(out_dir + "/simbas_freq_" + name + ".csv", mm.simbas.flag_freq,
                   "t", "s");
  };
  if (report.ffr) dump_method(*report.ffr, "ffr");
  if (report.dlm) dump_method(*report.dlm, "dlm");
}

Scenario Scenario::from_json(const nlohmann::json& j) {
  require_keys(j, {"name", "truth", "noise", "exposure", "n", "replicates", "seed",
                   "mcmc", "wavelet", "inference", "methods", "scale"},
               "scenario");
  Scenario sc;
  sc.name = j.value("name", "scenario");
  if (j.contains("truth")) {
    const auto& t = j["truth"];
    require_keys(t, {"kind", "T", "S", "values_csv"}, "scenario.truth");
    std::string kind = t.value("kind", "vertical_band");
    int T = t.value("T", 90), S = t.value("S", 100);
    if (kind == "vertical_band") {
      sc.truth = TrueSurface::vertical_band(T, S);
    } else if (kind == "horizontal_band") {
      sc.truth = TrueSurface::horizontal_band(T, S);
    } else if (kind == "null") {
      sc.truth = TrueSurface::null_surface(T, S);
    } else if (kind == "custom") {
      if (!t.contains("values_csv")) {
        throw ValidationError("scenario.truth: custom surface needs values_csv");
      }
      sc.truth = TrueSurface::custom(read_grid_csv(t["values_csv"]).grid);
    } else {
      throw ValidationError("scenario.truth: unknown kind '" + kind + "'");
    }
  }
  if (j.contains("noise")) {
    const auto& n = j["noise"];
    require_keys(n, {"sigma2", "rho_ar1"}, "scenario.noise");
    sc.noise.sigma2 = n.value("sigma2", 4.0);
    sc.noise.rho_ar1 = n.value("rho_ar1", 0.5);
  }
  if (j.contains("exposure")) {
    const auto& e = j["exposure"];
    require_keys(e, {"kind", "mean", "sd", "rho", "floor", "path"},
                 "scenario.exposure");
    std::string kind = e.value("kind", "synthetic_ar1");
    if (kind == "synthetic_ar1") {
      sc.exposure.kind = ExposureSource::Kind::synthetic_ar1;
      sc.exposure.mean = e.value("mean", 10.0);
      sc.exposure.sd = e.value("sd", 5.0);
      sc.exposure.rho = e.value("rho", 0.6);
      sc.exposure.floor = e.value("floor", 0.1);
    } else if (kind == "resample_csv") {
      sc.exposure.kind = ExposureSource::Kind::resample_csv;
      sc.exposure.path = e.value("path", "");
      if (sc.exposure.path.empty()) {
        throw ValidationError("scenario.exposure: resample_csv needs a path");
      }
      sc.exposure.pool = read_matrix_csv(sc.exposure.path).values;
    } else {
      throw ValidationError("scenario.exposure: unknown kind '" + kind + "'");
    }
  }
  sc.n = j.value("n", 400);
  sc.replicates = j.value("replicates", 20);
  sc.seed = j.value("seed", uint64_t(1));
  if (j.contains("mcmc")) {
    const auto& m = j["mcmc"];
    require_keys(m, {"total_draws", "burn_in", "thin"}, "scenario.mcmc");
    sc.mcmc.total_draws = m.value("total_draws", 2000);
    sc.mcmc.burn_in = m.value("burn_in", 1000);
    sc.mcmc.thin = m.value("thin", 1);
  }
  if (j.contains("wavelet")) {
    const auto& w = j["wavelet"];
    require_keys(w, {"vanishing_moments", "levels"}, "scenario.wavelet");
    sc.wavelet_vm = w.value("vanishing_moments", 4);
    sc.wavelet_levels = w.value("levels", 6);
  }
  if (j.contains("inference")) {
    const auto& i = j["inference"];
    require_keys(i, {"alpha", "deltas"}, "scenario.inference");
    sc.inference.alpha = i.value("alpha", 0.05);
    if (i.contains("deltas")) {
      sc.inference.deltas = i["deltas"].get<std::vector<double>>();
    }
  }
  if (j.contains("methods")) {
    sc.run_ffr = false;
    sc.run_dlm = false;
    for (const auto& m : j["methods"]) {
      std::string name = m.get<std::string>();
      if (name == "ffr") {
        sc.run_ffr = true;
      } else if (name == "dlm") {
        sc.run_dlm = true;
      } else {
        throw ValidationError("scenario.methods: unknown method '" + name + "'");
      }
    }
  }
  sc.scale = j.value("scale", false);
  sc.validate();
  return sc;
}

nlohmann::json Scenario::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  switch (truth.kind) {
    case TrueSurface::Kind::vertical_band:
      j["truth"] = {{"kind", "vertical_band"}, {"T", truth.T()}, {"S", truth.S()}};
      break;
    case TrueSurface::Kind::horizontal_band:
      j["truth"] = {{"kind", "horizontal_band"}, {"T", truth.T()}, {"S", truth.S()}};
      break;
    default:
      j["truth"] = {{"kind", truth.signal_cells() == 0 ? "null" : "custom"},
                    {"T", truth.T()},
                    {"S", truth.S()}};
  }
  j["noise"] = {{"sigma2", noise.sigma2}, {"rho_ar1", noise.rho_ar1}};
  if (exposure.kind == ExposureSource::Kind::synthetic_ar1) {
    j["exposure"] = {{"kind", "synthetic_ar1"}, {"mean", exposure.mean},
                     {"sd", exposure.sd}, {"rho", exposure.rho},
                     {"floor", exposure.floor}};
  } else {
    j["exposure"] = {{"kind", "resample_csv"}, {"path", exposure.path}};
  }
  j["n"] = n;
  j["replicates"] = replicates;
  j["seed"] = seed;
  j["mcmc"] = {{"total_draws", mcmc.total_draws}, {"burn_in", mcmc.burn_in},
               {"thin", mcmc.thin}};
  j["wavelet"] = {{"vanishing_moments", wavelet_vm}, {"levels", wavelet_levels}};
  j["inference"] = {{"alpha", inference.alpha}, {"deltas", inference.deltas}};
  std::vector<std::string> methods;
  if (run_ffr) methods.push_back("ffr");
  if (run_dlm) methods.push_back("dlm");
  j["methods"] = methods;
  j["scale"] = scale;
  return j;
}

}  // namespace wffr
