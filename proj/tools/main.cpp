// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "wffr/dataset.hpp"
#include "wffr/dlm.hpp"
#include "wffr/ffr.hpp"
#include "wffr/inference.hpp"
#include "wffr/io.hpp"
#include "wffr/png.hpp"
#include "wffr/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wffr;

namespace {

struct FitArgs {
  std::string y_path, x_path, w_path, w_meta_path, config_path, out_dir = "out";
  int t_vm = 4, t_levels = 6, s_vm = 4, s_levels = 6;
  int draws = 2000, burn_in = 1000, thin = 1;
  uint64_t seed = 1;
  int threads = 0;
  bool scale = false, mvalues = false, store_wavelet = false;
  double pca_fraction = 0.95;
};

void apply_fit_config(FitArgs& a, const json& cfg) {
  require_keys(cfg, {"y", "x", "w", "w_meta", "out", "t_vm", "t_levels", "s_vm",
                     "s_levels", "draws", "burn_in", "thin", "seed", "threads",
                     "scale", "mvalues", "store_wavelet", "pca_fraction"},
               "fit config");
  if (cfg.contains("y")) a.y_path = cfg["y"];
  if (cfg.contains("x")) a.x_path = cfg["x"];
  if (cfg.contains("w")) a.w_path = cfg["w"];
  if (cfg.contains("w_meta")) a.w_meta_path = cfg["w_meta"];
  if (cfg.contains("out")) a.out_dir = cfg["out"];
  if (cfg.contains("t_vm")) a.t_vm = cfg["t_vm"];
  if (cfg.contains("t_levels")) a.t_levels = cfg["t_levels"];
  if (cfg.contains("s_vm")) a.s_vm = cfg["s_vm"];
  if (cfg.contains("s_levels")) a.s_levels = cfg["s_levels"];
  if (cfg.contains("draws")) a.draws = cfg["draws"];
  if (cfg.contains("burn_in")) a.burn_in = cfg["burn_in"];
  if (cfg.contains("thin")) a.thin = cfg["thin"];
  if (cfg.contains("seed")) a.seed = cfg["seed"].get<uint64_t>();
  if (cfg.contains("threads")) a.threads = cfg["threads"];
  if (cfg.contains("scale")) a.scale = cfg["scale"];
  if (cfg.contains("mvalues")) a.mvalues = cfg["mvalues"];
  if (cfg.contains("store_wavelet")) a.store_wavelet = cfg["store_wavelet"];
  if (cfg.contains("pca_fraction")) a.pca_fraction = cfg["pca_fraction"];
}

FunctionalDataset load_dataset(const FitArgs& a) {
  if (!fs::exists(a.y_path)) throw ValidationError("missing outcome file: " + a.y_path);
  if (!fs::exists(a.x_path)) throw ValidationError("missing exposure file: " + a.x_path);
  LabeledMatrix y = read_matrix_csv(a.y_path);
  LabeledMatrix x = read_matrix_csv(a.x_path);
  if (y.values.rows() != x.values.rows()) {
    throw ValidationError("row count mismatch: " + a.y_path + " has " +
                          std::to_string(y.values.rows()) + " rows, " + a.x_path +
                          " has " + std::to_string(x.values.rows()));
  }
  FunctionalDataset ds;
  ds.Y = a.mvalues ? mvalue_transform(y.values) : y.values;
  ds.X = x.values;
  ds.s_labels = y.labels;
  ds.t_labels = x.labels;
  if (!a.w_path.empty()) {
    if (!fs::exists(a.w_path)) throw ValidationError("missing covariate file: " + a.w_path);
    LabeledMatrix w = read_matrix_csv(a.w_path);
    if (w.values.rows() != y.values.rows()) {
      throw ValidationError("row count mismatch: " + a.w_path + " has " +
                            std::to_string(w.values.rows()) + " rows, " + a.y_path +
                            " has " + std::to_string(y.values.rows()));
    }
    ds.W = w.values;
    ds.w_labels = w.labels;
    ds.w_continuous.assign(ds.q(), true);
    if (!a.w_meta_path.empty()) {
      json meta = load_json_file(a.w_meta_path);
      require_keys(meta, {"continuous"}, "w_meta");
      auto cont = meta.at("continuous").get<std::vector<std::string>>();
      std::set<std::string> cset(cont.begin(), cont.end());
      for (int c = 0; c < ds.q(); ++c) ds.w_continuous[c] = cset.count(ds.w_labels[c]) > 0;
    }
  }
  return ds;
}

McmcConfig make_mcmc(const FitArgs& a) {
  McmcConfig m;
  m.total_draws = a.draws;
  m.burn_in = a.burn_in;
  m.thin = a.thin;
  m.seed = a.seed;
  m.validate();
  return m;
}

int cmd_fit(const FitArgs& a, bool ffr_mode) {
  FunctionalDataset raw = load_dataset(a);
  PreprocessOptions popts;
  popts.scale = a.scale;
  popts.pca_fraction = a.pca_fraction;
  auto [ds, report] = preprocess(raw, popts);
  McmcConfig mcmc = make_mcmc(a);
  WaveletSpec t_spec{WaveletFamily::daubechies, a.t_vm, a.t_levels,
                     BoundaryRule::zero_pad, ds.T()};
  t_spec.validate();
  fs::create_directories(a.out_dir);

  StoredDraws stored;
  json extra;
  extra["mcmc"] = {{"total_draws", mcmc.total_draws}, {"burn_in", mcmc.burn_in},
                   {"thin", mcmc.thin}};
  extra["wavelet"]["t"] = {{"vanishing_moments", a.t_vm}, {"levels", a.t_levels},
                           {"original_length", ds.T()}};
  extra["scaled"] = a.scale;
  if (ffr_mode) {
    WaveletSpec s_spec{WaveletFamily::daubechies, a.s_vm, a.s_levels,
                       BoundaryRule::zero_pad, ds.S()};
    s_spec.validate();
    FfrOptions fopts;
    fopts.threads = a.threads;
    fopts.store_wavelet = a.store_wavelet;
    PosteriorDraws pd = fit_ffr(ds, t_spec, s_spec, mcmc, fopts);
    if (a.scale) rescale_to_original(pd, report);
    write_grid_csv(a.out_dir + "/beta_mean.csv", pd.surface_mean(), "t", "s",
                   ds.t_labels, ds.s_labels);
    write_grid_csv(a.out_dir + "/gamma_curves.csv", pd.gamma_curve_mean(), "w", "s",
                   ds.w_labels, ds.s_labels);
    if (pd.wavelet) {
      std::ofstream wout(a.out_dir + "/wavelet_draws.bin", std::ios::binary);
      wout.write(reinterpret_cast<const char*>(pd.wavelet->data.data()),
                 std::streamsize(pd.wavelet->data.size() * sizeof(double)));
      extra["files_extra"]["wavelet_draws"] = "wavelet_draws.bin";
      extra["dims_extra"] = {{"t_star", pd.t_star}, {"s_star", pd.s_star}};
    }
    stored.surface = std::move(pd.surface);
    if (pd.gamma_curves.T > 0) stored.gamma_curves = std::move(pd.gamma_curves);
    stored.sigma2 = std::move(pd.sigma2);
    stored.seed = pd.seed;
    stored.config_hash = pd.config_hash;
    stored.w_labels = ds.w_labels;
    extra["method"] = "ffr";
    extra["wavelet"]["s"] = {{"vanishing_moments", a.s_vm}, {"levels", a.s_levels},
                             {"original_length", ds.S()}};
  } else {
    DlmOptions dopts;
    dopts.threads = a.threads;
    DlmFit df = fit_dlm_surface(ds, t_spec, mcmc, dopts);
    if (a.scale) {
      for (int m = 0; m < df.surface.M; ++m) {
        double* d = df.surface.draw_ptr(m);
        for (int t = 0; t < df.surface.T; ++t)
          for (int s = 0; s < df.surface.S; ++s)
            d[size_t(t) * df.surface.S + s] *= report.y_sd[s] / report.x_sd[t];
      }
    }
    write_grid_csv(a.out_dir + "/beta_mean.csv", df.surface_mean(), "t", "s",
                   ds.t_labels, ds.s_labels);
    stored.surface = std::move(df.surface);
    stored.sigma2 = std::move(df.sigma2);
    stored.seed = df.seed;
    stored.config_hash = df.config_hash;
    extra["method"] = "dlm";
  }
  stored.t_labels = ds.t_labels;
  stored.s_labels = ds.s_labels;
  save_draws(a.out_dir, stored, extra);
  write_json_file(a.out_dir + "/preprocess_report.json", report.to_json());
  return 0;
}

struct InferArgs {
  std::string draws_path, out_dir = "out";
  double alpha = 0.05;
  std::vector<double> deltas;
  std::vector<double> band_alphas{0.05};
};

int cmd_infer(const InferArgs& a) {
  if (!fs::exists(a.draws_path)) {
    throw ValidationError("missing draws manifest: " + a.draws_path);
  }
  StoredDraws stored = load_draws(a.draws_path);
  fs::create_directories(a.out_dir);
  auto tl = stored.t_labels, sl = stored.s_labels;
  auto emit = [&](const std::string& stem, const MatrixXd& grid) {
    write_grid_csv(a.out_dir + "/" + stem + ".csv", grid, "t", "s", tl, sl);
    write_grid_png(a.out_dir + "/" + stem + ".png", grid);
  };
  for (double delta : a.deltas) {
    MatrixXd p = pointwise_probability(stored.surface, delta);
    BFDRResult b = bfdr_flag(p, a.alpha, delta);
    std::string tag = format_short(delta);
    emit("p_delta_" + tag, p);
    MatrixXd flags(b.flags.rows(), b.flags.cols());
    for (int t = 0; t < flags.rows(); ++t)
      for (int s = 0; s < flags.cols(); ++s) flags(t, s) = b.flags(t, s) ? 1.0 : 0.0;
    emit("bfdr_flags_" + tag, flags);
  }
  SimBaSResult sb = simbas(stored.surface, a.band_alphas);
  emit("simbas", sb.simbas);
  for (size_t i = 0; i < a.band_alphas.size(); ++i) {
    std::string tag = format_short(a.band_alphas[i]);
    emit("bands_" + tag + "_lower", sb.lower[i]);
    emit("bands_" + tag + "_upper", sb.upper[i]);
  }
  return 0;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir,
                 std::optional<int> replicates, std::optional<uint64_t> seed,
                 int threads) {
  if (!fs::exists(scenario_path)) {
    throw ValidationError("missing scenario file: " + scenario_path);
  }
  Scenario sc = Scenario::from_json(load_json_file(scenario_path));
  if (replicates) sc.replicates = *replicates;
  if (seed) sc.seed = *seed;
  sc.validate();
  MetricsReport report = run_replicates(sc, threads);
  write_metrics(out_dir, report);
  return 0;
}

int cmd_report(const std::vector<std::string>& metrics_paths, const std::string& out_dir) {
  std::vector<json> reports;
  for (const auto& p : metrics_paths) {
    if (!fs::exists(p)) throw ValidationError("missing metrics file: " + p);
    reports.push_back(load_json_file(p));
  }
  fs::create_directories(out_dir);

  auto pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * v);
    return std::string(buf);
  };

  std::ostringstream bfdr_md;
  bfdr_md << "# BFDR sensitivity and FDR\n";
  for (const auto& r : reports) {
    bfdr_md << "\n## " << r.value("scenario", "scenario")
            << " (STNR = " << r.value("stnr", 0.0) << ")\n\n";
    bfdr_md << "| Measure | Method |";
    for (const auto& row : r["ffr"]["bfdr"]) {
      bfdr_md << " delta = " << row["delta"].get<double>() << " |";
    }
    bfdr_md << "\n|---|---|";
    for (size_t i = 0; i < r["ffr"]["bfdr"].size(); ++i) bfdr_md << "---|";
    bfdr_md << "\n";
    for (const char* measure : {"sensitivity_mean", "fdr_mean"}) {
      std::string label = std::string(measure) == "sensitivity_mean" ? "Sensitivity" : "FDR";
      for (const char* method : {"ffr", "dlm"}) {
        if (!r.contains(method)) continue;
        bfdr_md << "| " << label << " | " << (std::string(method) == "ffr" ? "FFR" : "DLM")
                << " |";
        for (const auto& row : r[method]["bfdr"]) {
          bfdr_md << " " << pct(row[measure].get<double>()) << " |";
        }
        bfdr_md << "\n";
      }
    }
  }
  write_text_file(out_dir + "/bfdr_table.md", bfdr_md.str());

  std::ostringstream sb_md;
  sb_md << "# SimBaS sensitivity and FDR\n\n| Measure | Method |";
  for (const auto& r : reports) sb_md << " STNR = " << r.value("stnr", 0.0) << " |";
  sb_md << "\n|---|---|";
  for (size_t i = 0; i < reports.size(); ++i) sb_md << "---|";
  sb_md << "\n";
  for (const char* measure : {"sensitivity_mean", "fdr_mean"}) {
    std::string label = std::string(measure) == "sensitivity_mean" ? "Sensitivity" : "FDR";
    for (const char* method : {"ffr", "dlm"}) {
      sb_md << "| " << label << " | " << (std::string(method) == "ffr" ? "FFR" : "DLM")
            << " |";
      for (const auto& r : reports) {
        if (r.contains(method)) {
          sb_md << " " << pct(r[method]["simbas"][measure].get<double>()) << " |";
        } else {
          sb_md << " - |";
        }
      }
      sb_md << "\n";
    }
  }
  write_text_file(out_dir + "/simbas_table.md", sb_md.str());

  // heatmaps for every grid CSV sitting next to each metrics file
  for (const auto& p : metrics_paths) {
    fs::path dir = fs::path(p).parent_path();
    if (dir.empty()) dir = ".";
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".csv") continue;
      GridCsv g = read_grid_csv(entry.path().string());
      std::string stem = entry.path().stem().string();
      write_grid_png((fs::path(out_dir) / (stem + ".png")).string(), g.grid);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian wavelet-space function-on-function regression"};
  app.require_subcommand(1);

  FitArgs fit_args;
  std::string fit_config;
  auto add_fit_flags = [&](CLI::App* cmd, bool with_s) {
    cmd->add_option("--config", fit_config, "JSON config file (flags override)");
    cmd->add_option("--y", fit_args.y_path, "outcome matrix CSV (n x S)");
    cmd->add_option("--x", fit_args.x_path, "exposure matrix CSV (n x T)");
    cmd->add_option("--w", fit_args.w_path, "scalar covariates CSV (n x q)");
    cmd->add_option("--w-meta", fit_args.w_meta_path,
                    "JSON listing which covariate columns are continuous");
    cmd->add_option("--out", fit_args.out_dir, "output directory");
    cmd->add_option("--t-vm", fit_args.t_vm, "vanishing moments, exposure axis");
    cmd->add_option("--t-levels", fit_args.t_levels, "decomposition levels, exposure axis");
    if (with_s) {
      cmd->add_option("--s-vm", fit_args.s_vm, "vanishing moments, outcome axis");
      cmd->add_option("--s-levels", fit_args.s_levels, "decomposition levels, outcome axis");
    }
    cmd->add_option("--draws", fit_args.draws, "total MCMC draws");
    cmd->add_option("--burn-in", fit_args.burn_in, "burn-in draws");
    cmd->add_option("--thin", fit_args.thin, "thinning interval");
    cmd->add_option("--seed", fit_args.seed, "RNG seed");
    cmd->add_option("--threads", fit_args.threads, "worker threads (0 = auto)");
    cmd->add_option("--pca-fraction", fit_args.pca_fraction,
                    "variance fraction kept by covariate PCA");
    cmd->add_flag("--scale", fit_args.scale, "scale columns to unit SD");
    cmd->add_flag("--mvalues", fit_args.mvalues,
                  "treat Y as proportions and logit-transform");
    cmd->add_flag("--store-wavelet", fit_args.store_wavelet,
                  "also keep wavelet-space draws in memory during the fit");
  };

  CLI::App* fit_ffr_cmd = app.add_subcommand("fit-ffr", "fit the FFR surface model");
  add_fit_flags(fit_ffr_cmd, true);
  CLI::App* fit_dlm_cmd = app.add_subcommand("fit-dlm", "fit the site-by-site DLM baseline");
  add_fit_flags(fit_dlm_cmd, false);

  InferArgs infer_args;
  uint64_t unused_seed = 0;
  int unused_threads = 0;
  CLI::App* infer_cmd = app.add_subcommand("infer", "posterior inference on stored draws");
  infer_cmd->add_option("--draws", infer_args.draws_path, "draws manifest.json");
  infer_cmd->add_option("--out", infer_args.out_dir, "output directory");
  infer_cmd->add_option("--alpha", infer_args.alpha, "global FDR / band level");
  infer_cmd->add_option("--delta", infer_args.deltas, "effect-size thresholds (repeatable)");
  infer_cmd->add_option("--band-alpha", infer_args.band_alphas, "joint band levels");
  infer_cmd->add_option("--seed", unused_seed, "accepted for uniformity; inference is deterministic");
  infer_cmd->add_option("--threads", unused_threads, "accepted for uniformity");

  std::string scenario_path, sim_out = "out";
  int sim_threads = 0;
  std::optional<int> sim_replicates;
  std::optional<uint64_t> sim_seed;
  int sim_rep_flag = -1;
  uint64_t sim_seed_flag = 0;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "run a simulation scenario");
  sim_cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  sim_cmd->add_option("--out", sim_out, "output directory");
  auto* rep_opt = sim_cmd->add_option("--replicates", sim_rep_flag, "override replicate count");
  auto* seed_opt = sim_cmd->add_option("--seed", sim_seed_flag, "override scenario seed");
  sim_cmd->add_option("--threads", sim_threads, "worker threads (0 = auto)");

  std::vector<std::string> report_metrics;
  std::string report_out = "out";
  CLI::App* report_cmd = app.add_subcommand("report", "render tables and heatmaps");
  report_cmd->add_option("--metrics", report_metrics, "metrics.json files")->required();
  report_cmd->add_option("--out", report_out, "output directory");
  report_cmd->add_option("--seed", unused_seed, "accepted for uniformity; reporting is deterministic");
  report_cmd->add_option("--threads", unused_threads, "accepted for uniformity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (fit_ffr_cmd->parsed() || fit_dlm_cmd->parsed()) {
      if (!fit_config.empty()) {
        FitArgs from_cfg;
        apply_fit_config(from_cfg, load_json_file(fit_config));
        // flags already parsed into fit_args take precedence where provided
        CLI::App* cmd = fit_ffr_cmd->parsed() ? fit_ffr_cmd : fit_dlm_cmd;
        auto keep = [&](const std::string& flag) { return cmd->count(flag) > 0; };
        FitArgs merged = from_cfg;
        if (keep("--y")) merged.y_path = fit_args.y_path;
        if (keep("--x")) merged.x_path = fit_args.x_path;
        if (keep("--w")) merged.w_path = fit_args.w_path;
        if (keep("--w-meta")) merged.w_meta_path = fit_args.w_meta_path;
        if (keep("--out")) merged.out_dir = fit_args.out_dir;
        if (keep("--t-vm")) merged.t_vm = fit_args.t_vm;
        if (keep("--t-levels")) merged.t_levels = fit_args.t_levels;
        if (fit_ffr_cmd->parsed() && keep("--s-vm")) merged.s_vm = fit_args.s_vm;
        if (fit_ffr_cmd->parsed() && keep("--s-levels")) merged.s_levels = fit_args.s_levels;
        if (keep("--draws")) merged.draws = fit_args.draws;
        if (keep("--burn-in")) merged.burn_in = fit_args.burn_in;
        if (keep("--thin")) merged.thin = fit_args.thin;
        if (keep("--seed")) merged.seed = fit_args.seed;
        if (keep("--threads")) merged.threads = fit_args.threads;
        if (keep("--pca-fraction")) merged.pca_fraction = fit_args.pca_fraction;
        if (keep("--scale")) merged.scale = fit_args.scale;
        if (keep("--mvalues")) merged.mvalues = fit_args.mvalues;
        if (keep("--store-wavelet")) merged.store_wavelet = fit_args.store_wavelet;
        fit_args = merged;
      }
      return cmd_fit(fit_args, fit_ffr_cmd->parsed());
    }
    if (infer_cmd->parsed()) return cmd_infer(infer_args);
    if (sim_cmd->parsed()) {
      if (rep_opt->count() > 0) sim_replicates = sim_rep_flag;
      if (seed_opt->count() > 0) sim_seed = sim_seed_flag;
      return cmd_simulate(scenario_path, sim_out, sim_replicates, sim_seed, sim_threads);
    }
    if (report_cmd->parsed()) return cmd_report(report_metrics, report_out);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
