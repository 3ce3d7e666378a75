// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#pragma once

#include <string>
#include <vector>

#include "wffr/dataset.hpp"
#include "wffr/spike_slab.hpp"
#include "wffr/types.hpp"
#include "wffr/wavelet.hpp"

namespace wffr {

struct DlmOptions {
  int threads = 0;
};

/// Site-by-site distributed-lag baseline: one lag curve beta_s(t) per outcome
/// column, fit with the same exposure-side spike-and-slab machinery as the
/// FFR, concatenated into a comparison surface.
struct DlmFit {
  DrawCube surface;  // M x T x S, slice s holds the site-s lag curve draws
  MatrixXd sigma2;   // M x S
  uint64_t seed = 0;
  std::string config_hash;
  std::vector<std::string> t_labels, s_labels;

  MatrixXd surface_mean() const;
};

/// One site: spike-and-slab fit of y against the wavelet-transformed exposure
/// with a single pooled hyperparameter group per exposure coefficient.
ColumnDraws fit_dlm_site(const ColumnProblem& prob, const VectorXd& y_col,
                         const McmcConfig& mcmc, Rng rng);

DlmFit fit_dlm_surface(const FunctionalDataset& ds, const WaveletSpec& t_spec,
                       const McmcConfig& mcmc, const DlmOptions& opts = {});

}  // namespace wffr
