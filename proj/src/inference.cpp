// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#include "wffr/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wffr {

MatrixXd pointwise_probability(const DrawCube& draws, double delta) {
  if (draws.M < 2) throw ValidationError("pointwise_probability: need M >= 2 draws");
  if (delta < 0.0) throw ValidationError("pointwise_probability: delta must be >= 0");
  const size_t cells = draws.cells();
  std::vector<double> counts(cells, 0.0);
  for (int m = 0; m < draws.M; ++m) {
    const double* d = draws.draw_ptr(m);
    for (size_t i = 0; i < cells; ++i) {
      if (std::abs(d[i]) > delta) counts[i] += 1.0;
    }
  }
  MatrixXd p(draws.T, draws.S);
  for (int t = 0; t < draws.T; ++t) {
    for (int s = 0; s < draws.S; ++s) p(t, s) = counts[size_t(t) * draws.S + s] / draws.M;
  }
  return p;
}

BFDRResult bfdr_flag(const MatrixXd& p_grid, double alpha, double delta) {
  if (alpha <= 0.0 || alpha >= 1.0) throw ValidationError("bfdr_flag: alpha must be in (0,1)");
  const int T = int(p_grid.rows()), S = int(p_grid.cols());
  const int R = T * S;
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      if (!(p_grid(t, s) >= 0.0 && p_grid(t, s) <= 1.0)) {
        throw ValidationError("bfdr_flag: probabilities must lie in [0,1]");
      }
    }
  }
  // sort descending by p, ties broken lexicographically by (t,s)
  std::vector<int> order(R);
  std::iota(order.begin(), order.end(), 0);
  auto pval = [&](int idx) { return p_grid(idx / S, idx % S); };
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    double pa = pval(a), pb = pval(b);
    if (pa != pb) return pa > pb;
    return a < b;
  });
  BFDRResult res;
  res.p_grid = p_grid;
  res.alpha = alpha;
  res.delta = delta;
  double running = 0.0;
  int lambda = 0;
  for (int r = 0; r < R; ++r) {
    running += 1.0 - pval(order[r]);
    if (running / double(r + 1) <= alpha) lambda = r + 1;
  }
  res.lambda = lambda;
  res.nu_alpha = lambda > 0 ? pval(order[lambda - 1]) : 1.0;
  res.flags = BoolGrid::Constant(T, S, false);
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) res.flags(t, s) = p_grid(t, s) > res.nu_alpha;
  }
  return res;
}

CellStats corrected_sd(const double* draws, int m, size_t stride) {
  if (m < 2) throw ValidationError("corrected_sd: need at least 2 draws");
  CellStats st;
  double sum = 0.0;
  for (int i = 0; i < m; ++i) sum += draws[size_t(i) * stride];
  st.mean = sum / m;
  double ss = 0.0, lag = 0.0;
  double prev = draws[0] - st.mean;
  ss += prev * prev;
  for (int i = 1; i < m; ++i) {
    double cur = draws[size_t(i) * stride] - st.mean;
    ss += cur * cur;
    lag += prev * cur;
    prev = cur;
  }
  double sd = std::sqrt(ss / double(m - 1));
  st.rho = ss > 1e-300 ? lag / ss : 0.0;
  st.rho = std::min(0.99, std::max(0.0, st.rho));
  double A = st.rho > 0.0 ? std::sqrt((1.0 - st.rho) / (1.0 + st.rho)) : 1.0;
  st.sd_corrected = std::max(sd / A, 1e-12);
  return st;
}

CellStats corrected_sd(const std::vector<double>& draws) {
  return corrected_sd(draws.data(), int(draws.size()), 1);
}

SimBaSResult simbas(const DrawCube& draws, const std::vector<double>& band_alphas) {
  if (draws.M < 10) throw ValidationError("simbas: need M >= 10 draws");
  const int M = draws.M, T = draws.T, S = draws.S;
  const size_t cells = draws.cells();
  SimBaSResult res;
  res.mean.resize(T, S);
  res.sd.resize(T, S);
  res.rho.resize(T, S);
  res.A.resize(T, S);
  std::vector<double> mean_flat(cells), sd_flat(cells);
  for (size_t i = 0; i < cells; ++i) {
    CellStats st = corrected_sd(draws.data.data() + i, M, cells);
    const int t = int(i / S), s = int(i % S);
    res.mean(t, s) = st.mean;
    res.sd(t, s) = st.sd_corrected;
    res.rho(t, s) = st.rho;
    res.A(t, s) = st.rho > 0.0 ? std::sqrt((1.0 - st.rho) / (1.0 + st.rho)) : 1.0;
    mean_flat[i] = st.mean;
    sd_flat[i] = st.sd_corrected;
  }
  std::vector<double> z(M);
  for (int m = 0; m < M; ++m) {
    const double* d = draws.draw_ptr(m);
    double zmax = 0.0;
    for (size_t i = 0; i < cells; ++i) {
      double v = std::abs(d[i] - mean_flat[i]) / sd_flat[i];
      if (v > zmax) zmax = v;
    }
    z[m] = zmax;
  }
  res.simbas.resize(T, S);
  for (size_t i = 0; i < cells; ++i) {
    const double ratio = std::abs(mean_flat[i]) / sd_flat[i];
    int count = 0;
    for (int m = 0; m < M; ++m) {
      if (z[m] >= ratio) ++count;
    }
    // empirical min-alpha, floored at the 1/M granularity
    res.simbas(int(i / S), int(i % S)) = std::max(count, 1) / double(M);
  }
  std::sort(z.begin(), z.end());
  res.z_scores = z;
  res.band_alphas = band_alphas;
  for (double alpha : band_alphas) {
    if (alpha <= 0.0 || alpha >= 1.0) throw ValidationError("simbas: band alpha must be in (0,1)");
    int k = int(std::ceil((1.0 - alpha) * M));
    k = std::min(M, std::max(1, k));
    const double q = z[k - 1];
    res.lower.push_back(res.mean - q * res.sd);
    res.upper.push_back(res.mean + q * res.sd);
  }
  return res;
}

BoolGrid simbas_flags(const SimBaSResult& res, double alpha) {
  BoolGrid out(res.simbas.rows(), res.simbas.cols());
  for (int t = 0; t < res.simbas.rows(); ++t) {
    for (int s = 0; s < res.simbas.cols(); ++s) out(t, s) = res.simbas(t, s) <= alpha;
  }
  return out;
}

}  // namespace wffr
