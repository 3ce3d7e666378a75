// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#include "wffr/dataset.hpp"

#include <algorithm>
#include <cmath>

namespace wffr {

void FunctionalDataset::validate() const {
  if (Y.rows() < 2) throw ValidationError("dataset: need n >= 2 subjects");
  if (Y.cols() < 2) throw ValidationError("dataset: need S >= 2 outcome columns");
  if (X.cols() < 2) throw ValidationError("dataset: need T >= 2 exposure columns");
  if (X.rows() != Y.rows()) {
    throw ValidationError("dataset: Y has " + std::to_string(Y.rows()) +
                          " rows but X has " + std::to_string(X.rows()));
  }
  if (W.size() > 0 && W.rows() != Y.rows()) {
    throw ValidationError("dataset: W has " + std::to_string(W.rows()) +
                          " rows but Y has " + std::to_string(Y.rows()));
  }
  if (!w_continuous.empty() && int(w_continuous.size()) != W.cols()) {
    throw ValidationError("dataset: w_continuous length does not match W columns");
  }
  auto check_finite = [](const MatrixXd& m, const char* name) {
    for (int c = 0; c < m.cols(); ++c) {
      for (int r = 0; r < m.rows(); ++r) {
        if (!std::isfinite(m(r, c))) {
          throw ValidationError(std::string("dataset: ") + name + " has a missing or "
                                "non-finite value at row " + std::to_string(r + 1) +
                                ", column " + std::to_string(c + 1));
        }
      }
    }
  };
  check_finite(Y, "Y");
  check_finite(X, "X");
  if (W.size() > 0) check_finite(W, "W");
}

namespace {

void center_scale(MatrixXd& m, VectorXd& mean, VectorXd& sd, bool scale,
                  const std::vector<std::string>& labels, const char* name) {
  const int n = int(m.rows());
  mean = m.colwise().mean();
  m.rowwise() -= mean.transpose();
  sd.resize(m.cols());
  for (int c = 0; c < m.cols(); ++c) {
    sd[c] = std::sqrt(m.col(c).squaredNorm() / double(n - 1));
    if (scale) {
      if (sd[c] <= 0.0) {
        std::string label = c < int(labels.size()) ? labels[c] : std::to_string(c + 1);
        throw ValidationError(std::string(name) + " column '" + label +
                              "' has zero variance; cannot scale");
      }
      m.col(c) /= sd[c];
    }
  }
}

}  // namespace

std::pair<FunctionalDataset, PreprocessReport> preprocess(
    const FunctionalDataset& ds, const PreprocessOptions& opts) {
  ds.validate();
  if (opts.pca_fraction <= 0.0 || opts.pca_fraction > 1.0) {
    throw ValidationError("preprocess: pca_fraction must be in (0, 1]");
  }
  FunctionalDataset out = ds;
  PreprocessReport rep;
  rep.scaled = opts.scale;
  center_scale(out.Y, rep.y_mean, rep.y_sd, opts.scale, ds.s_labels, "Y");
  center_scale(out.X, rep.x_mean, rep.x_sd, opts.scale, ds.t_labels, "X");

  if (ds.q() == 0) return {std::move(out), std::move(rep)};

  std::vector<bool> cont = ds.w_continuous;
  if (cont.empty()) cont.assign(ds.q(), true);
  for (int c = 0; c < ds.q(); ++c) {
    if (cont[c]) rep.continuous_cols.push_back(c);
  }
  const int qc = int(rep.continuous_cols.size());
  if (qc == 0) return {std::move(out), std::move(rep)};

  MatrixXd Wc(ds.n(), qc);
  for (int i = 0; i < qc; ++i) Wc.col(i) = ds.W.col(rep.continuous_cols[i]);
  rep.pca_center = Wc.colwise().mean();
  Wc.rowwise() -= rep.pca_center.transpose();
  MatrixXd cov = Wc.transpose() * Wc / double(ds.n() - 1);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw NumericalError("preprocess: PCA eigendecomposition failed");
  // eigenvalues ascending; walk from the largest
  VectorXd evals = es.eigenvalues();
  MatrixXd evecs = es.eigenvectors();
  double total = std::max(evals.sum(), 0.0);
  int retained = 0;
  double cum = 0.0;
  if (total > 0.0) {
    for (int i = qc - 1; i >= 0; --i) {
      cum += std::max(evals[i], 0.0);
      ++retained;
      if (cum >= opts.pca_fraction * total) break;
    }
  }
  rep.retained_components = retained;
  rep.variance_fraction = total > 0.0 ? cum / total : 0.0;
  rep.pca_loadings.resize(qc, retained);
  for (int i = 0; i < retained; ++i) {
    VectorXd v = evecs.col(qc - 1 - i);
    // canonical sign: largest-magnitude loading positive
    int arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    rep.pca_loadings.col(i) = v;
  }
  MatrixXd scores = Wc * rep.pca_loadings;

  const int qk = ds.q() - qc;  // categorical columns passed through
  out.W.resize(ds.n(), retained + qk);
  out.w_labels.clear();
  out.w_continuous.assign(retained + qk, false);
  for (int i = 0; i < retained; ++i) {
    out.W.col(i) = scores.col(i);
    out.w_labels.push_back("pc" + std::to_string(i + 1));
    out.w_continuous[i] = true;
  }
  int at = retained;
  for (int c = 0; c < ds.q(); ++c) {
    if (cont[c]) continue;
    out.W.col(at) = ds.W.col(c);
    out.w_labels.push_back(c < int(ds.w_labels.size()) ? ds.w_labels[c]
                                                       : "w" + std::to_string(c + 1));
    ++at;
  }
  return {std::move(out), std::move(rep)};
}

nlohmann::json PreprocessReport::to_json() const {
  nlohmann::json j;
  auto vec = [](const VectorXd& v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    return out;
  };
  j["y_mean"] = vec(y_mean);
  j["y_sd"] = vec(y_sd);
  j["x_mean"] = vec(x_mean);
  j["x_sd"] = vec(x_sd);
  j["scaled"] = scaled;
  j["pca"]["continuous_cols"] = continuous_cols;
  j["pca"]["retained_components"] = retained_components;
  j["pca"]["variance_fraction"] = variance_fraction;
  j["pca"]["center"] = vec(pca_center);
  std::vector<std::vector<double>> loadings;
  for (int c = 0; c < pca_loadings.cols(); ++c) {
    loadings.push_back(vec(pca_loadings.col(c)));
  }
  j["pca"]["loadings"] = loadings;
  return j;
}

MatrixXd mvalue_transform(const MatrixXd& proportions) {
  MatrixXd out = proportions;
  for (int c = 0; c < out.cols(); ++c) {
    for (int r = 0; r < out.rows(); ++r) {
      double p = std::min(1.0 - 1e-6, std::max(1e-6, out(r, c)));
      out(r, c) = std::log(p / (1.0 - p));
    }
  }
  return out;
}

}  // namespace wffr
