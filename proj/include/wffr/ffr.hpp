// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wffr/dataset.hpp"
#include "wffr/spike_slab.hpp"
#include "wffr/types.hpp"
#include "wffr/wavelet.hpp"

namespace wffr {

struct FfrOptions {
  bool store_wavelet = false;  // keep the M x T* x S* coefficient draws
  bool store_gamma = false;    // keep the inclusion indicator draws
  int threads = 0;             // 0 = hardware concurrency
  std::optional<SpikeSlabHyper> hyper_override;
};

struct PosteriorDraws {
  DrawCube surface;                    // M x T x S data-space draws
  DrawCube gamma_curves;               // M x q x S scalar-effect curve draws
  std::optional<DrawCube> wavelet;     // M x T* x S* when stored
  MatrixXd sigma2;                     // M x S* residual variance draws
  std::vector<uint8_t> gamma;          // M x T* x S* inclusion draws when stored
  uint64_t seed = 0;
  std::string config_hash;
  std::vector<std::string> t_labels, s_labels, w_labels;
  int t_star = 0, s_star = 0;

  MatrixXd surface_mean() const;
  MatrixXd gamma_curve_mean() const;  // q x S
};

/// Fits the wavelet-space function-on-function regression by independent
/// per-column Gibbs samplers and assembles data-space draws of beta(t,s).
/// The dataset must already be preprocessed (centered, optionally scaled).
PosteriorDraws fit_ffr(const FunctionalDataset& ds, const WaveletSpec& t_spec,
                       const WaveletSpec& s_spec, const McmcConfig& mcmc,
                       const FfrOptions& opts = {});

/// Undoes column scaling on the stored draws: beta *= sd_y(s)/sd_x(t) and
/// gamma curves *= sd_y(s). Wavelet-space draws are dropped (they live on the
/// preprocessed scale). No-op when the report says scaling was off.
void rescale_to_original(PosteriorDraws& draws, const PreprocessReport& report);

}  // namespace wffr
