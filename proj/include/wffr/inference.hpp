// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#pragma once

#include <limits>
#include <vector>

#include "wffr/types.hpp"

namespace wffr {

/// p(t,s) = Pr{|beta(t,s)| > delta | Y}, strict inequality.
MatrixXd pointwise_probability(const DrawCube& draws, double delta);

struct BFDRResult {
  MatrixXd p_grid;
  double delta = std::numeric_limits<double>::quiet_NaN();
  double alpha = 0.0;
  double nu_alpha = 1.0;  // flagging cutoff, p > nu_alpha flags a cell
  int lambda = 0;         // number of top-ranked cells entering the threshold
  BoolGrid flags;
};

/// Bayesian FDR thresholding: sort p descending (ties broken by (t,s) order),
/// lambda = max prefix whose mean local FDR is <= alpha, nu = p_(lambda),
/// flag strict exceedances.
BFDRResult bfdr_flag(const MatrixXd& p_grid, double alpha,
                     double delta = std::numeric_limits<double>::quiet_NaN());

struct CellStats {
  double mean = 0.0;
  double sd_corrected = 0.0;
  double rho = 0.0;  // lag-1 autocorrelation, clipped to [0, 0.99]
};

/// Mean, autocorrelation-corrected SD (divided by A(M,rho) = sqrt((1-rho)/(1+rho))
/// for rho > 0) and lag-1 autocorrelation of one cell's draw sequence.
CellStats corrected_sd(const double* draws, int m, size_t stride);
CellStats corrected_sd(const std::vector<double>& draws);

struct SimBaSResult {
  MatrixXd simbas;  // min alpha at which the joint band excludes zero
  MatrixXd mean, sd, rho, A;
  std::vector<double> band_alphas;
  std::vector<MatrixXd> lower, upper;  // one band pair per requested alpha
  std::vector<double> z_scores;        // sorted max-statistics, ascending
};

/// Joint credible bands and simultaneous band scores over the draw cube.
SimBaSResult simbas(const DrawCube& draws,
                    const std::vector<double>& band_alphas = {0.05});

/// Flags from the score grid at level alpha (score <= alpha).
BoolGrid simbas_flags(const SimBaSResult& res, double alpha);

}  // namespace wffr
