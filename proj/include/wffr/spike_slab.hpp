// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wffr/rng.hpp"
#include "wffr/types.hpp"

namespace wffr {

struct McmcConfig {
  int total_draws = 2000;
  int burn_in = 1000;
  int thin = 1;
  uint64_t seed = 1;

  int retained() const { return (total_draws - burn_in) / thin; }
  void validate() const;
};

/// Regularization parameters of the spike-and-slab prior: slab variance tau
/// and inclusion probability pi per (exposure coefficient p, outcome level j).
struct SpikeSlabHyper {
  static constexpr double kPiMin = 0.001;
  static constexpr double kPiMax = 0.999;
  static constexpr double kTauMin = 1e-8;

  MatrixXd tau;  // T* x n_level_groups
  MatrixXd pi;   // T* x n_level_groups
};

/// Precomputed design-side quantities shared by every column sampler run on
/// the same (X*, W) pair: Gram matrix, ridge factorization, covariate blocks.
class ColumnProblem {
 public:
  ColumnProblem(MatrixXd xstar, MatrixXd w);

  const MatrixXd& X() const { return x_; }
  const MatrixXd& W() const { return w_; }
  const MatrixXd& gram() const { return gram_; }
  const VectorXd& gram_diag() const { return gram_diag_; }
  const MatrixXd& XtW() const { return xtw_; }
  const MatrixXd& WtW() const { return wtw_; }
  int n() const { return int(x_.rows()); }
  int p() const { return int(x_.cols()); }
  int q() const { return int(w_.cols()); }

  struct RidgeFit {
    VectorXd bhat;   // ridge-stabilized least squares estimate
    VectorXd se;     // standard errors from the exact ridge covariance
    double sigma2;   // residual variance estimate
  };
  RidgeFit ridge_fit(const VectorXd& y) const;

 private:
  MatrixXd x_, w_;
  MatrixXd gram_;
  VectorXd gram_diag_;
  MatrixXd xtw_, wtw_;
  Eigen::LLT<MatrixXd> ridge_llt_;
  VectorXd ridge_var_diag_;  // diag of (G+kI)^-1 G (G+kI)^-1
};

/// Moment-based empirical Bayes estimate of (tau, pi) with exceedance
/// threshold z0 = 2, pooling columns of Ystar by their outcome wavelet level.
/// level_of[c] in [0, n_levels) gives the group of column c.
SpikeSlabHyper estimate_hyperparameters(const ColumnProblem& prob,
                                        const MatrixXd& ystar,
                                        const std::vector<int>& level_of,
                                        int n_levels);

/// Convenience overload building the ColumnProblem internally (no covariates).
SpikeSlabHyper estimate_hyperparameters(const MatrixXd& xstar, const MatrixXd& ystar,
                                        const std::vector<int>& level_of,
                                        int n_levels);

/// Test-support knobs for validating the sampler against closed forms.
struct SamplerHooks {
  bool force_inclusion = false;
  std::optional<double> fixed_sigma2;
};

struct ColumnDraws {
  MatrixXd beta;               // M x T*, exact zeros where gamma = 0
  MatrixXd theta;              // M x q
  VectorXd sigma2;             // M
  std::vector<uint8_t> gamma;  // M x T*, row-major
};

/// Gibbs sampler for one wavelet-space column model
///   y = X* beta + W theta + e,  e ~ N(0, sigma2 I)
/// with the spike-and-slab prior on beta, a weak N(0, 1e6) prior on theta and
/// a Jeffreys prior on sigma2. tau/pi are per-coefficient vectors of length T*.
ColumnDraws fit_column(const ColumnProblem& prob, const VectorXd& y,
                       const VectorXd& tau, const VectorXd& pi,
                       const McmcConfig& mcmc, Rng rng,
                       const SamplerHooks& hooks = {});

}  // namespace wffr
