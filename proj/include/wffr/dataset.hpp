// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wffr/types.hpp"

namespace wffr {

/// n subjects with a functional outcome over S sites, a functional exposure
/// over T time points and optional scalar covariates.
struct FunctionalDataset {
  MatrixXd Y;  // n x S
  MatrixXd X;  // n x T
  MatrixXd W;  // n x q, q may be 0
  std::vector<std::string> s_labels, t_labels, w_labels;
  std::vector<bool> w_continuous;  // per W column; empty means all continuous

  int n() const { return int(Y.rows()); }
  int S() const { return int(Y.cols()); }
  int T() const { return int(X.cols()); }
  int q() const { return int(W.cols()); }
  void validate() const;
};

struct PreprocessOptions {
  bool scale = false;
  double pca_fraction = 0.95;
};

struct PreprocessReport {
  VectorXd y_mean, y_sd, x_mean, x_sd;
  bool scaled = false;
  std::vector<int> continuous_cols;  // indices into the original W
  VectorXd pca_center;               // over continuous columns
  MatrixXd pca_loadings;             // n_cont x retained
  int retained_components = 0;
  double variance_fraction = 0.0;  // fraction explained by retained components
  nlohmann::json to_json() const;
};

/// Column-centers (and optionally scales) Y and X, replaces the continuous
/// covariate columns by leading principal-component scores and passes the
/// rest through untouched.
std::pair<FunctionalDataset, PreprocessReport> preprocess(
    const FunctionalDataset& ds, const PreprocessOptions& opts = {});

/// logit of proportion-valued outcomes, clipped to [1e-6, 1-1e-6].
MatrixXd mvalue_transform(const MatrixXd& proportions);

}  // namespace wffr
