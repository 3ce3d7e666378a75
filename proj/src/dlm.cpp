// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#include "wffr/dlm.hpp"

#include "wffr/threading.hpp"

namespace wffr {

MatrixXd DlmFit::surface_mean() const {
  MatrixXd mean = MatrixXd::Zero(surface.T, surface.S);
  for (int m = 0; m < surface.M; ++m) mean += surface.draw(m);
  if (surface.M > 0) mean /= double(surface.M);
  return mean;
}

ColumnDraws fit_dlm_site(const ColumnProblem& prob, const VectorXd& y_col,
                         const McmcConfig& mcmc, Rng rng) {
  // single pooled group per exposure coefficient: level map is all zero
  SpikeSlabHyper hyper =
      estimate_hyperparameters(prob, y_col, std::vector<int>{0}, 1);
  return fit_column(prob, y_col, hyper.tau.col(0), hyper.pi.col(0), mcmc,
                    std::move(rng));
}

DlmFit fit_dlm_surface(const FunctionalDataset& ds, const WaveletSpec& t_spec_in,
                       const McmcConfig& mcmc, const DlmOptions& opts) {
  ds.validate();
  mcmc.validate();
  WaveletSpec t_spec = t_spec_in;
  if (t_spec.original_length == 0) t_spec.original_length = ds.T();
  if (t_spec.original_length != ds.T()) {
    throw ValidationError("fit_dlm_surface: wavelet spec length does not match X");
  }
  WaveletOperator phi(t_spec);
  const int T = ds.T(), S = ds.S();
  const int Pt = phi.padded_length();
  const int M = mcmc.retained();

  ColumnProblem prob(dwt_rows(ds.X, phi), ds.W);

  DlmFit out;
  out.surface = DrawCube(M, T, S);
  out.sigma2.resize(M, S);
  out.seed = mcmc.seed;
  {
    std::string h = "dlm;" + std::to_string(ds.n()) + ";" + std::to_string(T) + ";" +
                    std::to_string(S) + ";" + std::to_string(ds.q()) + ";" +
                    std::to_string(t_spec.vanishing_moments) + ";" +
                    std::to_string(t_spec.levels) + ";" +
                    std::to_string(mcmc.total_draws) + ";" +
                    std::to_string(mcmc.burn_in) + ";" + std::to_string(mcmc.thin) +
                    ";" + std::to_string(mcmc.seed);
    out.config_hash = to_hex(fnv1a64(h));
  }
  out.t_labels = ds.t_labels;
  out.s_labels = ds.s_labels;

  parallel_for(S, opts.threads, [&](int s) {
    ColumnDraws draws;
    try {
      draws = fit_dlm_site(prob, ds.Y.col(s), mcmc,
                           Rng::stream(mcmc.seed, {uint64_t(s)}));
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " [site index=" +
                           std::to_string(s) + "]");
    }
    std::vector<double> buf(Pt);
    for (int m = 0; m < M; ++m) {
      for (int r = 0; r < Pt; ++r) buf[r] = draws.beta(m, r);
      phi.inverse_padded(buf.data());
      for (int t = 0; t < T; ++t) out.surface.at(m, t, s) = buf[t];
      out.sigma2(m, s) = draws.sigma2[m];
    }
  });
  return out;
}

}  // namespace wffr
