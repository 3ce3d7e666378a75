// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#include "wffr/spike_slab.hpp"

#include <cmath>
#include <string>

namespace wffr {

namespace {
constexpr double kThetaPriorVar = 1e6;
constexpr double kExceedZ = 2.0;
constexpr int kRefreshEvery = 10;  // full v = G*beta refresh cadence
}  // namespace

void McmcConfig::validate() const {
  if (total_draws < 1) throw ValidationError("mcmc: total_draws must be >= 1");
  if (burn_in < 0 || burn_in >= total_draws) {
    throw ValidationError("mcmc: burn_in must be in [0, total_draws)");
  }
  if (thin < 1) throw ValidationError("mcmc: thin must be >= 1");
  if (retained() < 2) throw ValidationError("mcmc: fewer than 2 retained draws");
}

ColumnProblem::ColumnProblem(MatrixXd xstar, MatrixXd w)
    : x_(std::move(xstar)), w_(std::move(w)) {
  if (w_.size() == 0) w_.resize(x_.rows(), 0);
  if (w_.rows() != x_.rows()) {
    throw ValidationError("column problem: X and W row counts differ");
  }
  gram_ = x_.transpose() * x_;
  gram_diag_ = gram_.diagonal();
  xtw_ = x_.transpose() * w_;
  wtw_ = w_.transpose() * w_;
  const int p = int(x_.cols());
  const double tr = gram_.trace();
  if (!(tr > 0.0)) throw NumericalError("column problem: design matrix is zero");
  const double kappa = 1e-6 * tr / double(p);
  MatrixXd reg = gram_;
  reg.diagonal().array() += kappa;
  ridge_llt_.compute(reg);
  if (ridge_llt_.info() != Eigen::Success) {
    throw NumericalError("column problem: singular design after ridge stabilization");
  }
  MatrixXd inv = ridge_llt_.solve(MatrixXd::Identity(p, p));
  MatrixXd ga = gram_ * inv;  // (A G A)_ii = sum_k A_ik (G A)_ki, A symmetric
  ridge_var_diag_ = (inv.cwiseProduct(ga.transpose())).rowwise().sum();
  ridge_var_diag_ = ridge_var_diag_.cwiseMax(0.0);
}

ColumnProblem::RidgeFit ColumnProblem::ridge_fit(const VectorXd& y) const {
  if (int(y.size()) != n()) throw ValidationError("ridge_fit: response length mismatch");
  RidgeFit fit;
  fit.bhat = ridge_llt_.solve(x_.transpose() * y);
  VectorXd resid = y - x_ * fit.bhat;
  const double df = std::max(1.0, double(n() - p()));
  fit.sigma2 = std::max(resid.squaredNorm() / df, 1e-300);
  fit.se = (fit.sigma2 * ridge_var_diag_.array()).sqrt().cwiseMax(1e-150);
  return fit;
}

SpikeSlabHyper estimate_hyperparameters(const ColumnProblem& prob,
                                        const MatrixXd& ystar,
                                        const std::vector<int>& level_of,
                                        int n_levels) {
  if (int(ystar.rows()) != prob.n()) {
    throw ValidationError("estimate_hyperparameters: Ystar row count mismatch");
  }
  if (int(level_of.size()) != ystar.cols()) {
    throw ValidationError("estimate_hyperparameters: level map length mismatch");
  }
  const int p = prob.p();
  MatrixXd count = MatrixXd::Zero(p, n_levels);
  MatrixXd exceed = MatrixXd::Zero(p, n_levels);
  MatrixXd sum_b2 = MatrixXd::Zero(p, n_levels);
  MatrixXd sum_se2 = MatrixXd::Zero(p, n_levels);
  for (int c = 0; c < ystar.cols(); ++c) {
    const int j = level_of[c];
    if (j < 0 || j >= n_levels) {
      throw ValidationError("estimate_hyperparameters: level index out of range");
    }
    auto fit = prob.ridge_fit(ystar.col(c));
    for (int k = 0; k < p; ++k) {
      count(k, j) += 1.0;
      if (std::abs(fit.bhat[k]) > kExceedZ * fit.se[k]) {
        exceed(k, j) += 1.0;
        sum_b2(k, j) += fit.bhat[k] * fit.bhat[k];
        sum_se2(k, j) += fit.se[k] * fit.se[k];
      }
    }
  }
  SpikeSlabHyper hyper;
  hyper.pi.resize(p, n_levels);
  hyper.tau.resize(p, n_levels);
  for (int j = 0; j < n_levels; ++j) {
    for (int k = 0; k < p; ++k) {
      if (count(k, j) == 0.0) {  // empty group: sampler falls back to defaults
        hyper.pi(k, j) = SpikeSlabHyper::kPiMin;
        hyper.tau(k, j) = SpikeSlabHyper::kTauMin;
        continue;
      }
      double pi_hat = exceed(k, j) / count(k, j);
      hyper.pi(k, j) = std::min(SpikeSlabHyper::kPiMax,
                                std::max(SpikeSlabHyper::kPiMin, pi_hat));
      if (exceed(k, j) > 0.0) {
        // moment match about the prior mean 0: E[bhat^2] = tau + se^2
        double tau_hat = sum_b2(k, j) / exceed(k, j) - sum_se2(k, j) / exceed(k, j);
        hyper.tau(k, j) = std::max(SpikeSlabHyper::kTauMin, tau_hat);
      } else {
        hyper.tau(k, j) = SpikeSlabHyper::kTauMin;
      }
    }
  }
  return hyper;
}

SpikeSlabHyper estimate_hyperparameters(const MatrixXd& xstar, const MatrixXd& ystar,
                                        const std::vector<int>& level_of,
                                        int n_levels) {
  ColumnProblem prob(xstar, MatrixXd());
  return estimate_hyperparameters(prob, ystar, level_of, n_levels);
}

ColumnDraws fit_column(const ColumnProblem& prob, const VectorXd& y,
                       const VectorXd& tau, const VectorXd& pi,
                       const McmcConfig& mcmc, Rng rng, const SamplerHooks& hooks) {
  mcmc.validate();
  const int n = prob.n();
  const int p = prob.p();
  const int q = prob.q();
  if (int(y.size()) != n) throw ValidationError("fit_column: response length mismatch");
  if (int(tau.size()) != p || int(pi.size()) != p) {
    throw ValidationError("fit_column: hyperparameter vectors must have length T*");
  }

  const MatrixXd& G = prob.gram();
  const VectorXd& gd = prob.gram_diag();
  const VectorXd c = prob.X().transpose() * y;
  const double yty = y.squaredNorm();
  const VectorXd wty = q > 0 ? VectorXd(prob.W().transpose() * y) : VectorXd();

  // warm start at the ridge fit
  auto init = prob.ridge_fit(y);
  VectorXd beta = VectorXd::Zero(p);
  std::vector<uint8_t> gamma(p, 0);
  for (int k = 0; k < p; ++k) {
    bool on = hooks.force_inclusion || std::abs(init.bhat[k]) > kExceedZ * init.se[k];
    if (on && gd[k] > 0.0) {
      gamma[k] = 1;
      beta[k] = init.bhat[k];
    }
  }
  double sigma2 = hooks.fixed_sigma2.value_or(init.sigma2);
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw NumericalError("fit_column: non-finite initial residual variance");
  }
  VectorXd theta = VectorXd::Zero(q);
  VectorXd v = G * beta;               // v = G beta, maintained incrementally
  VectorXd u = VectorXd::Zero(p);      // u = X' W theta

  const int M = mcmc.retained();
  ColumnDraws draws;
  draws.beta.resize(M, p);
  draws.theta.resize(M, q);
  draws.sigma2.resize(M);
  draws.gamma.assign(size_t(M) * p, 0);

  Eigen::LLT<MatrixXd> theta_llt;
  MatrixXd theta_prec(q, q);

  int stored = 0;
  for (int it = 0; it < mcmc.total_draws; ++it) {
    if (it % kRefreshEvery == 0) v = G * beta;  // bound incremental drift

    // (a)+(b) joint update of (gamma_k, beta_k), slab marginalized for gamma
    for (int k = 0; k < p; ++k) {
      const double S = gd[k];
      if (S <= 0.0) continue;  // unidentifiable coefficient stays excluded
      const double z = c[k] - v[k] - u[k] + S * beta[k];
      const double denom = tau[k] * S + sigma2;
      double new_beta = 0.0;
      bool include;
      if (hooks.force_inclusion) {
        include = true;
      } else {
        const double log_bf =
            0.5 * (std::log(sigma2) - std::log(denom)) +
            0.5 * tau[k] * z * z / (sigma2 * denom);
        const double logit =
            std::log(pi[k]) - std::log1p(-pi[k]) + log_bf;
        double p_incl = logit > 35.0 ? 1.0 : logit < -35.0 ? 0.0
                                     : 1.0 / (1.0 + std::exp(-logit));
        include = rng.bernoulli(p_incl);
      }
      if (include) {
        const double var = tau[k] * sigma2 / denom;
        if (!std::isfinite(var) || var < 0.0) {
          throw NumericalError("fit_column: non-finite conditional variance at p=" +
                               std::to_string(k));
        }
        new_beta = rng.normal(tau[k] * z / denom, std::sqrt(var));
      }
      gamma[k] = include ? 1 : 0;
      if (new_beta != beta[k]) {
        v.noalias() += G.col(k) * (new_beta - beta[k]);
        beta[k] = new_beta;
      }
    }

    // (c) scalar-covariate coefficients, conjugate normal
    if (q > 0) {
      theta_prec = prob.WtW();
      theta_prec.diagonal().array() += sigma2 / kThetaPriorVar;
      theta_llt.compute(theta_prec);
      if (theta_llt.info() != Eigen::Success) {
        throw NumericalError("fit_column: covariate update failed");
      }
      VectorXd rhs = wty - prob.XtW().transpose() * beta;
      VectorXd mean = theta_llt.solve(rhs);
      VectorXd zdraw(q);
      for (int a = 0; a < q; ++a) zdraw[a] = rng.normal();
      // sample: mean + sqrt(sigma2) * L^-T z
      theta = mean + std::sqrt(sigma2) *
                         theta_llt.matrixU().solve(zdraw);
      u.noalias() = prob.XtW() * theta;
    }

    // (d) residual variance, Jeffreys conjugate update
    if (!hooks.fixed_sigma2) {
      double rss = yty - 2.0 * beta.dot(c) + beta.dot(v);
      if (q > 0) {
        rss += -2.0 * theta.dot(wty) + theta.dot(prob.WtW() * theta) +
               2.0 * beta.dot(u);
      }
      rss = std::max(rss, 1e-30);
      sigma2 = rng.inv_gamma(0.5 * n, 0.5 * rss);
      if (!std::isfinite(sigma2) || sigma2 <= 0.0) {
        throw NumericalError("fit_column: non-finite residual variance draw");
      }
    }

    if (it >= mcmc.burn_in && (it - mcmc.burn_in) % mcmc.thin == 0 && stored < M) {
      draws.beta.row(stored) = beta;
      if (q > 0) draws.theta.row(stored) = theta;
      draws.sigma2[stored] = sigma2;
      uint8_t* grow = draws.gamma.data() + size_t(stored) * p;
      for (int k = 0; k < p; ++k) grow[k] = gamma[k];
      ++stored;
    }
  }
  return draws;
}

}  // namespace wffr
