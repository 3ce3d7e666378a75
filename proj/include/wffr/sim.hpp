// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wffr/dataset.hpp"
#include "wffr/spike_slab.hpp"
#include "wffr/types.hpp"
#include "wffr/wavelet.hpp"

namespace wffr {

struct TrueSurface {
  enum class Kind { vertical_band, horizontal_band, custom };
  Kind kind = Kind::custom;
  MatrixXd values;       // T x S
  BoolGrid signal_mask;  // values != 0

  int T() const { return int(values.rows()); }
  int S() const { return int(values.cols()); }
  int signal_cells() const;

  /// beta = 0.2 on t in 40..44 (1-based) across every site.
  static TrueSurface vertical_band(int T = 90, int S = 100);
  /// beta = 0.2 on t in 1..45 (1-based) at site s = 50.
  static TrueSurface horizontal_band(int T = 90, int S = 100);
  static TrueSurface null_surface(int T = 90, int S = 100);
  static TrueSurface custom(MatrixXd values);
};

struct NoiseSpec {
  double sigma2 = 4.0;    // marginal error variance
  double rho_ar1 = 0.5;   // lag-1 correlation of the AR(1) error process
  double stnr() const { return 0.2 / std::sqrt(sigma2); }
};

struct ExposureSource {
  enum class Kind { synthetic_ar1, resample_csv };
  Kind kind = Kind::synthetic_ar1;
  // synthetic_ar1: daily positive values with strong day-to-day correlation
  double mean = 10.0, sd = 5.0, rho = 0.6, floor = 0.1;
  // resample_csv: rows drawn with replacement from a user-supplied matrix
  std::string path;
  MatrixXd pool;
};

struct InferenceConfig {
  double alpha = 0.05;
  std::vector<double> deltas{0.15, 0.10, 0.05};
};

struct Scenario {
  std::string name = "scenario";
  TrueSurface truth = TrueSurface::vertical_band();
  NoiseSpec noise;
  ExposureSource exposure;
  int n = 400;
  int replicates = 20;
  uint64_t seed = 1;
  McmcConfig mcmc;
  int wavelet_vm = 4;
  int wavelet_levels = 6;
  InferenceConfig inference;
  bool run_ffr = true;
  bool run_dlm = true;
  bool scale = false;

  void validate() const;
  nlohmann::json to_json() const;
  static Scenario from_json(const nlohmann::json& j);
};

/// Y = X beta + E with AR(1) Gaussian errors; deterministic in
/// (scenario.seed, replicate_index).
std::pair<FunctionalDataset, TrueSurface> generate_dataset(const Scenario& sc,
                                                           int replicate);

/// RMSE(t,s) = sqrt(mean_r (est_r(t,s) - truth(t,s))^2).
MatrixXd rmse_map(const std::vector<MatrixXd>& estimates, const MatrixXd& truth);

struct ProcedureMetrics {
  double sensitivity_mean = 0.0, sensitivity_sd = 0.0;
  double fdr_mean = 0.0, fdr_sd = 0.0;
  double flagged_fraction_mean = 0.0, flagged_fraction_sd = 0.0;
  MatrixXd flag_freq;  // fraction of replicates flagging each cell
};

struct MethodMetrics {
  MatrixXd rmse;           // T x S over replicates
  double rmse_total = 0.0; // sum of RMSE over the surface
  MatrixXd mean_estimate;  // average posterior-mean surface
  double signal_mean_abs = 0.0;  // mean |posterior mean| over signal cells
  std::map<double, ProcedureMetrics> bfdr;  // keyed by delta
  ProcedureMetrics simbas;
};

struct MetricsReport {
  std::string scenario_name;
  int replicates = 0;
  double stnr = 0.0;
  double alpha = 0.05;
  std::vector<double> deltas;
  std::optional<MethodMetrics> ffr, dlm;
  double rmse_reduction_pct = 0.0;  // FFR vs DLM when both present

  nlohmann::json to_json() const;
};

MetricsReport run_replicates(const Scenario& sc, int threads = 0);

/// metrics.json plus the grid CSVs for every stored surface and frequency map.
void write_metrics(const std::string& out_dir, const MetricsReport& report);

}  // namespace wffr
