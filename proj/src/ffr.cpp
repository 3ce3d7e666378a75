// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#include "wffr/ffr.hpp"

#include <cmath>

#include "wffr/threading.hpp"

namespace wffr {

namespace {
constexpr int kColumnBlock = 16;

std::string ffr_config_hash(const FunctionalDataset& ds, const WaveletSpec& t_spec,
                            const WaveletSpec& s_spec, const McmcConfig& mcmc) {
  std::string s = "ffr;" + std::to_string(ds.n()) + ";" + std::to_string(ds.T()) +
                  ";" + std::to_string(ds.S()) + ";" + std::to_string(ds.q()) + ";" +
                  std::to_string(t_spec.vanishing_moments) + ";" +
                  std::to_string(t_spec.levels) + ";" +
                  std::to_string(s_spec.vanishing_moments) + ";" +
                  std::to_string(s_spec.levels) + ";" +
                  std::to_string(mcmc.total_draws) + ";" + std::to_string(mcmc.burn_in) +
                  ";" + std::to_string(mcmc.thin) + ";" + std::to_string(mcmc.seed);
  return to_hex(fnv1a64(s));
}

}  // namespace

MatrixXd PosteriorDraws::surface_mean() const {
  MatrixXd mean = MatrixXd::Zero(surface.T, surface.S);
  for (int m = 0; m < surface.M; ++m) mean += surface.draw(m);
  if (surface.M > 0) mean /= double(surface.M);
  return mean;
}

MatrixXd PosteriorDraws::gamma_curve_mean() const {
  MatrixXd mean = MatrixXd::Zero(gamma_curves.T, gamma_curves.S);
  for (int m = 0; m < gamma_curves.M; ++m) mean += gamma_curves.draw(m);
  if (gamma_curves.M > 0) mean /= double(gamma_curves.M);
  return mean;
}

PosteriorDraws fit_ffr(const FunctionalDataset& ds, const WaveletSpec& t_spec_in,
                       const WaveletSpec& s_spec_in, const McmcConfig& mcmc,
                       const FfrOptions& opts) {
  ds.validate();
  mcmc.validate();
  WaveletSpec t_spec = t_spec_in;
  WaveletSpec s_spec = s_spec_in;
  if (t_spec.original_length == 0) t_spec.original_length = ds.T();
  if (s_spec.original_length == 0) s_spec.original_length = ds.S();
  if (t_spec.original_length != ds.T() || s_spec.original_length != ds.S()) {
    throw ValidationError("fit_ffr: wavelet spec lengths do not match the dataset");
  }
  WaveletOperator phi(t_spec);
  WaveletOperator omega(s_spec);
  const int T = ds.T(), S = ds.S(), q = ds.q();
  const int Pt = phi.padded_length(), Ps = omega.padded_length();
  const int M = mcmc.retained();

  MatrixXd xstar = dwt_rows(ds.X, phi);
  MatrixXd ystar = dwt_rows(ds.Y, omega);

  ColumnProblem prob(std::move(xstar), ds.W);

  std::vector<int> level_of(Ps);
  for (int c = 0; c < Ps; ++c) level_of[c] = omega.level_of(c);
  const int n_levels = omega.num_level_groups();

  SpikeSlabHyper hyper;
  if (opts.hyper_override) {
    hyper = *opts.hyper_override;
    if (hyper.tau.rows() != Pt || hyper.tau.cols() != n_levels ||
        hyper.pi.rows() != Pt || hyper.pi.cols() != n_levels) {
      throw ValidationError("fit_ffr: hyper_override has wrong dimensions");
    }
  } else {
    hyper = estimate_hyperparameters(prob, ystar, level_of, n_levels);
  }

  PosteriorDraws out;
  out.surface = DrawCube(M, T, S);
  out.gamma_curves = DrawCube(M, q, S);
  out.sigma2.resize(M, Ps);
  if (opts.store_wavelet) out.wavelet = DrawCube(M, Pt, Ps);
  if (opts.store_gamma) out.gamma.assign(size_t(M) * Pt * Ps, 0);
  out.seed = mcmc.seed;
  out.config_hash = ffr_config_hash(ds, t_spec, s_spec, mcmc);
  out.t_labels = ds.t_labels;
  out.s_labels = ds.s_labels;
  out.w_labels = ds.w_labels;
  out.t_star = Pt;
  out.s_star = Ps;

  const MatrixXd& omega_mat = omega.matrix();
  // theta draws across all columns, needed to assemble gamma curves at the end
  std::vector<double> theta_all(q > 0 ? size_t(M) * q * Ps : 0, 0.0);

  for (int block = 0; block < Ps; block += kColumnBlock) {
    const int bs = std::min(kColumnBlock, Ps - block);
    std::vector<ColumnDraws> results(bs);
    parallel_for(bs, opts.threads, [&](int i) {
      const int c = block + i;
      try {
        results[i] = fit_column(prob, ystar.col(c), hyper.tau.col(level_of[c]),
                                hyper.pi.col(level_of[c]), mcmc,
                                Rng::stream(mcmc.seed, {uint64_t(c)}));
      } catch (const NumericalError& e) {
        auto idx = omega.index_of(c);
        throw NumericalError(std::string(e.what()) + " [outcome column flat=" +
                             std::to_string(c) + ", level=" + std::to_string(idx.level) +
                             ", k=" + std::to_string(idx.k) + "]");
      }
    });
    // truncated basis rows for this block, contiguous for the inner loop
    std::vector<VectorXd> basis_rows(bs);
    for (int i = 0; i < bs; ++i) {
      basis_rows[i] = omega_mat.row(block + i).head(S);
    }
    // deterministic accumulation: draws in parallel, columns in ascending order
    parallel_for(M, opts.threads, [&](int m) {
      std::vector<double> buf(Pt);
      double* surf = out.surface.draw_ptr(m);
      for (int i = 0; i < bs; ++i) {
        const int c = block + i;
        const ColumnDraws& cd = results[i];
        bool any = false;
        for (int r = 0; r < Pt; ++r) {
          buf[r] = cd.beta(m, r);
          any = any || buf[r] != 0.0;
        }
        if (any) {
          phi.inverse_padded(buf.data());
          const double* orow = basis_rows[i].data();
          for (int t = 0; t < T; ++t) {
            const double bt = buf[t];
            if (bt == 0.0) continue;
            double* dst = surf + size_t(t) * S;
            for (int s = 0; s < S; ++s) dst[s] += bt * orow[s];
          }
        }
        if (out.wavelet) {
          for (int r = 0; r < Pt; ++r) out.wavelet->at(m, r, c) = cd.beta(m, r);
        }
        if (!out.gamma.empty()) {
          const uint8_t* g = cd.gamma.data() + size_t(m) * Pt;
          uint8_t* dst = out.gamma.data() + (size_t(m) * Pt) * Ps;
          for (int r = 0; r < Pt; ++r) dst[size_t(r) * Ps + c] = g[r];
        }
        for (int a = 0; a < q; ++a) {
          theta_all[(size_t(m) * q + a) * Ps + c] = cd.theta(m, a);
        }
      }
    });
    for (int i = 0; i < bs; ++i) {
      out.sigma2.col(block + i) = results[i].sigma2;
    }
  }

  if (q > 0) {
    parallel_for(M, opts.threads, [&](int m) {
      std::vector<double> buf(Ps);
      for (int a = 0; a < q; ++a) {
        const double* src = theta_all.data() + (size_t(m) * q + a) * Ps;
        for (int c = 0; c < Ps; ++c) buf[c] = src[c];
        omega.inverse_padded(buf.data());
        for (int s = 0; s < S; ++s) out.gamma_curves.at(m, a, s) = buf[s];
      }
    });
  }
  return out;
}

void rescale_to_original(PosteriorDraws& draws, const PreprocessReport& report) {
  if (!report.scaled) return;
  const int T = draws.surface.T, S = draws.surface.S;
  if (int(report.y_sd.size()) != S || int(report.x_sd.size()) != T) {
    throw ValidationError("rescale_to_original: report dimensions do not match draws");
  }
  for (int m = 0; m < draws.surface.M; ++m) {
    double* d = draws.surface.draw_ptr(m);
    for (int t = 0; t < T; ++t) {
      const double xf = report.x_sd[t];
      for (int s = 0; s < S; ++s) d[size_t(t) * S + s] *= report.y_sd[s] / xf;
    }
  }
  for (int m = 0; m < draws.gamma_curves.M; ++m) {
    double* d = draws.gamma_curves.draw_ptr(m);
    for (int a = 0; a < draws.gamma_curves.T; ++a) {
      for (int s = 0; s < S; ++s) d[size_t(a) * S + s] *= report.y_sd[s];
    }
  }
  draws.wavelet.reset();  // wavelet-space draws stay on the fitted scale
}

}  // namespace wffr
