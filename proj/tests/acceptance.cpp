// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "wffr/dlm.hpp"
#include "wffr/ffr.hpp"
#include "wffr/inference.hpp"
#include "wffr/io.hpp"
#include "wffr/rng.hpp"
#include "wffr/sim.hpp"
#include "wffr/spike_slab.hpp"
#include "wffr/wavelet.hpp"

using namespace wffr;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::vector<std::string> g_notes;

double now_s() {
  using clock = std::chrono::steady_clock;
  static const auto start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

void report(int idx, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%d] %-34s %s  (%s)\n", idx, name.c_str(), pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

struct Check {
  bool ok = true;
  std::ostringstream detail;
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " !" << what;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------- criterion 1
void criterion_wavelet() {
  const double t0 = now_s();
  Check c;
  Rng rng(101);
  double worst_recon = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    int len = 4 + rng.uniform_int(1021);  // 4..1024
    int max_levels = 0;
    int p = 1;
    while (p < len) p <<= 1;
    while ((1 << (max_levels + 1)) <= p) ++max_levels;
    WaveletSpec spec;
    spec.vanishing_moments = 1 + rng.uniform_int(10);
    spec.levels = 1 + rng.uniform_int(max_levels);
    spec.original_length = len;
    WaveletOperator op(spec);
    VectorXd x(len);
    for (int i = 0; i < len; ++i) x[i] = rng.normal();
    VectorXd back = op.inverse(op.forward(x));
    worst_recon = std::max(worst_recon, (back - x).cwiseAbs().maxCoeff());
  }
  c.expect(worst_recon < 1e-10, "reconstruction " + fmt(worst_recon));

  double worst_orth = 0.0;
  for (auto [vm, levels, len] :
       {std::tuple{1, 2, 4}, {4, 6, 90}, {4, 6, 100}, {8, 4, 200}, {10, 3, 64}}) {
    WaveletSpec spec;
    spec.vanishing_moments = vm;
    spec.levels = levels;
    spec.original_length = len;
    WaveletOperator op(spec);
    const MatrixXd& m = op.matrix();
    const int P = op.padded_length();
    worst_orth = std::max(worst_orth,
                          (m * m.transpose() - MatrixXd::Identity(P, P))
                              .cwiseAbs()
                              .maxCoeff());
  }
  c.expect(worst_orth < 1e-10, "orthonormality " + fmt(worst_orth));

  // vm = 4 annihilates cubics on interior coefficients
  double worst_vanish = 0.0;
  for (int len : {128, 512}) {
    WaveletSpec spec;
    spec.vanishing_moments = 4;
    spec.levels = 4;
    spec.original_length = len;
    WaveletOperator op(spec);
    const int P = op.padded_length();
    const int F = spec.filter_length();
    VectorXd poly(P);
    for (int i = 0; i < P; ++i) {
      double u = (i - P / 2.0) / P;
      poly[i] = 0.5 - 1.5 * u + 2.5 * u * u - 3.5 * u * u * u;
    }
    VectorXd coeffs = poly;
    op.forward_padded(coeffs.data());
    for (int j = 1; j <= spec.levels; ++j) {
      const int reach = ((1 << j) - 1) * (F - 1) + 1;
      for (int k = 0; k < op.level_size(j); ++k) {
        const int start = (1 << j) * k;
        if (start + reach > P) continue;
        worst_vanish = std::max(worst_vanish, std::abs(coeffs[op.flat_of(j, k)]));
      }
    }
  }
  c.expect(worst_vanish < 1e-8, "vanishing-moments " + fmt(worst_vanish));

  const double dt = now_s() - t0;
  c.expect(dt < 30.0, "runtime " + fmt(dt) + "s");
  report(1, "wavelet correctness", c.ok,
         "recon=" + fmt(worst_recon) + " orth=" + fmt(worst_orth) +
             " vanish=" + fmt(worst_vanish) + " in " + fmt(dt) + "s" +
             c.detail.str());
}

// ---------------------------------------------------------------- criterion 2
BoolGrid brute_force_bfdr(const MatrixXd& p, double alpha) {
  const int T = int(p.rows()), S = int(p.cols()), R = T * S;
  std::vector<int> remaining(R);
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<int> order;
  while (!remaining.empty()) {
    int best = remaining[0];
    for (int idx : remaining) {
      double pb = p(best / S, best % S), pi = p(idx / S, idx % S);
      if (pi > pb || (pi == pb && idx < best)) best = idx;
    }
    order.push_back(best);
    remaining.erase(std::find(remaining.begin(), remaining.end(), best));
  }
  int lambda = 0;
  for (int r = 1; r <= R; ++r) {
    double acc = 0.0;
    for (int i = 0; i < r; ++i) acc += 1.0 - p(order[i] / S, order[i] % S);
    if (acc / r <= alpha) lambda = r;
  }
  double nu = lambda > 0 ? p(order[lambda - 1] / S, order[lambda - 1] % S) : 1.0;
  BoolGrid flags(T, S);
  for (int t = 0; t < T; ++t)
    for (int s = 0; s < S; ++s) flags(t, s) = p(t, s) > nu;
  return flags;
}

void criterion_inference_oracles() {
  const double t0 = now_s();
  Check c;
  Rng rng(202);
  int bfdr_mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    int T = 1 + rng.uniform_int(4);
    int S = 1 + rng.uniform_int(3);
    int M = 2 + rng.uniform_int(19);
    DrawCube cube(M, T, S);
    for (auto& v : cube.data) v = 0.4 * rng.normal();
    MatrixXd p = pointwise_probability(cube, 0.2);
    double alpha = 0.01 + 0.3 * rng.uniform01();
    BFDRResult r = bfdr_flag(p, alpha);
    BoolGrid expect = brute_force_bfdr(p, alpha);
    if (!(r.flags.array() == expect.array()).all()) ++bfdr_mismatches;
  }
  c.expect(bfdr_mismatches == 0,
           "bfdr mismatches " + std::to_string(bfdr_mismatches));

  int duality_mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int M = trial % 2 ? 200 : 50;
    DrawCube cube(M, 3, 4);
    for (auto& v : cube.data) v = rng.normal();
    for (int m = 0; m < M; ++m) cube.at(m, 0, 0) += 2.0 + rng.uniform01();
    std::vector<double> alphas = {0.02, 0.05, 0.10};
    SimBaSResult r = simbas(cube, alphas);
    for (size_t ai = 0; ai < alphas.size(); ++ai) {
      if (std::floor(alphas[ai] * M) < 1.0) continue;  // below 1/M granularity
      for (int t = 0; t < 3; ++t) {
        for (int s = 0; s < 4; ++s) {
          bool excluded = r.lower[ai](t, s) > 0.0 || r.upper[ai](t, s) < 0.0;
          bool flagged = r.simbas(t, s) <= alphas[ai];
          if (excluded != flagged) ++duality_mismatches;
        }
      }
    }
  }
  c.expect(duality_mismatches == 0,
           "duality mismatches " + std::to_string(duality_mismatches));
  const double dt = now_s() - t0;
  c.expect(dt < 60.0, "runtime " + fmt(dt) + "s");
  report(2, "inference oracle equivalence", c.ok,
         "bfdr=500 grids, duality=200 sets in " + fmt(dt) + "s" + c.detail.str());
}

// ---------------------------------------------------------------- criterion 3
void criterion_conjugate_oracle() {
  const double t0 = now_s();
  Check c;
  Rng rng(303);
  const int n = 300, p = 8;
  MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
  VectorXd btrue(p);
  for (int j = 0; j < p; ++j) btrue[j] = rng.normal(0.0, 0.6);
  const double sigma2 = 0.16;
  VectorXd y = x * btrue;
  for (int i = 0; i < n; ++i) y[i] += rng.normal(0.0, std::sqrt(sigma2));
  VectorXd tau = VectorXd::Constant(p, 0.4);
  VectorXd pi = VectorXd::Constant(p, 0.5);

  MatrixXd prec = x.transpose() * x / sigma2;
  for (int j = 0; j < p; ++j) prec(j, j) += 1.0 / tau[j];
  MatrixXd cov = prec.inverse();
  VectorXd mean = cov * (x.transpose() * y) / sigma2;

  ColumnProblem prob(x, MatrixXd());
  SamplerHooks hooks;
  hooks.force_inclusion = true;
  hooks.fixed_sigma2 = sigma2;
  McmcConfig mcmc;
  mcmc.total_draws = 10500;
  mcmc.burn_in = 500;
  mcmc.seed = 7;
  ColumnDraws draws = fit_column(prob, y, tau, pi, mcmc, Rng(11), hooks);
  const int M = 10000;

  double worst_mean_dev = 0.0;
  const int B = 25, L = M / B;
  for (int k = 0; k < p; ++k) {
    double mhat = draws.beta.col(k).mean();
    double bvar = 0.0;
    for (int b = 0; b < B; ++b) {
      double bm = draws.beta.col(k).segment(b * L, L).mean();
      bvar += (bm - mhat) * (bm - mhat);
    }
    double se = std::sqrt(bvar / (B - 1) / B);
    double dev = std::abs(mhat - mean[k]) / std::max(se, 1e-9);
    worst_mean_dev = std::max(worst_mean_dev, dev);
  }
  c.expect(worst_mean_dev < 3.0, "mean dev " + fmt(worst_mean_dev) + " SE");

  // covariance entries via batch-level replication
  double worst_cov_dev = 0.0;
  for (int a = 0; a < p; ++a) {
    for (int b = a; b < p; ++b) {
      std::vector<double> batch_cov(B);
      for (int bb = 0; bb < B; ++bb) {
        auto blockA = draws.beta.col(a).segment(bb * L, L);
        auto blockB = draws.beta.col(b).segment(bb * L, L);
        double ma = blockA.mean(), mb = blockB.mean();
        batch_cov[bb] = ((blockA.array() - ma) * (blockB.array() - mb)).sum() / (L - 1);
      }
      double cm = std::accumulate(batch_cov.begin(), batch_cov.end(), 0.0) / B;
      double cvar = 0.0;
      for (double v : batch_cov) cvar += (v - cm) * (v - cm);
      double se = std::sqrt(cvar / (B - 1) / B);
      double dev = std::abs(cm - cov(a, b)) / std::max(se, 1e-12);
      worst_cov_dev = std::max(worst_cov_dev, dev);
    }
  }
  c.expect(worst_cov_dev < 3.0, "cov dev " + fmt(worst_cov_dev) + " SE");
  const double dt = now_s() - t0;
  c.expect(dt < 120.0, "runtime " + fmt(dt) + "s");
  report(3, "gibbs conjugate oracle", c.ok,
         "mean " + fmt(worst_mean_dev) + " SE, cov " + fmt(worst_cov_dev) +
             " SE in " + fmt(dt) + "s" + c.detail.str());
}

// --------------------------------------------------------- scenario execution
std::string scenario_dir() {
#ifdef WFFR_SCENARIO_DIR
  return WFFR_SCENARIO_DIR;
#else
  return "scenarios";
#endif
}

Scenario load_scenario(const std::string& name) {
  return Scenario::from_json(load_json_file(scenario_dir() + "/" + name + ".json"));
}

// ---------------------------------------------------------------- criteria 4-8
void criteria_simulations() {
  const double t0 = now_s();
  MetricsReport v010 = run_replicates(load_scenario("vertical_band_stnr010"), 0);
  MetricsReport v005 = run_replicates(load_scenario("vertical_band_stnr005"), 0);
  MetricsReport v0025 = run_replicates(load_scenario("vertical_band_stnr0025"), 0);
  MetricsReport horiz = run_replicates(load_scenario("horizontal_band_stnr010"), 0);
  MetricsReport null_rep = run_replicates(load_scenario("null_surface"), 0);
  const double dt_all = now_s() - t0;

  {  // 4: vertical band BFDR, STNR = 0.10
    Check c;
    const auto& f10 = v010.ffr->bfdr.at(0.10);
    const auto& f05 = v010.ffr->bfdr.at(0.05);
    const auto& d05 = v010.dlm->bfdr.at(0.05);
    c.expect(f10.sensitivity_mean >= 0.95, "ffr sens " + fmt(f10.sensitivity_mean));
    c.expect(f10.fdr_mean <= 0.05, "ffr fdr@.10 " + fmt(f10.fdr_mean));
    c.expect(f05.fdr_mean <= 0.10, "ffr fdr@.05 " + fmt(f05.fdr_mean));
    c.expect(d05.fdr_mean >= 0.15, "dlm fdr@.05 " + fmt(d05.fdr_mean));
    c.expect(dt_all < 4 * 3600.0, "runtime " + fmt(dt_all) + "s");
    report(4, "vertical band BFDR (STNR .10)", c.ok,
           "ffr sens=" + fmt(f10.sensitivity_mean) + " fdr10=" + fmt(f10.fdr_mean) +
               " fdr05=" + fmt(f05.fdr_mean) + " dlm fdr05=" + fmt(d05.fdr_mean) +
               c.detail.str());
  }
  {  // 5: RMSE efficiency across the three STNRs
    Check c;
    double r1 = v010.rmse_reduction_pct;
    double r2 = v005.rmse_reduction_pct;
    double r3 = v0025.rmse_reduction_pct;
    c.expect(r1 >= 50.0, "stnr .10 " + fmt(r1));
    c.expect(r2 >= 50.0, "stnr .05 " + fmt(r2));
    c.expect(r3 >= 50.0, "stnr .025 " + fmt(r3));
    report(5, "RMSE reduction vs DLM", c.ok,
           "reductions " + fmt(r1) + "% / " + fmt(r2) + "% / " + fmt(r3) + "%" +
               c.detail.str());
  }
  {  // 6: SimBaS contrast
    Check c;
    const auto& hi_f = v010.ffr->simbas;
    const auto& lo_f = v0025.ffr->simbas;
    const auto& lo_d = v0025.dlm->simbas;
    c.expect(hi_f.sensitivity_mean >= 0.95, "ffr sens@.10 " + fmt(hi_f.sensitivity_mean));
    c.expect(hi_f.fdr_mean <= 0.05, "ffr fdr@.10 " + fmt(hi_f.fdr_mean));
    c.expect(lo_f.sensitivity_mean <= 0.5, "ffr sens@.025 " + fmt(lo_f.sensitivity_mean));
    c.expect(lo_d.sensitivity_mean >= 0.3, "dlm sens@.025 " + fmt(lo_d.sensitivity_mean));
    report(6, "SimBaS contrast", c.ok,
           "ffr@.10 sens=" + fmt(hi_f.sensitivity_mean) + " fdr=" + fmt(hi_f.fdr_mean) +
               "; @.025 ffr=" + fmt(lo_f.sensitivity_mean) +
               " dlm=" + fmt(lo_d.sensitivity_mean) + c.detail.str());
  }
  {  // 7: horizontal band shrinkage story
    Check c;
    double ffr_mag = horiz.ffr->signal_mean_abs;
    double dlm_sb = horiz.dlm->simbas.sensitivity_mean;
    double ffr_sb = horiz.ffr->simbas.sensitivity_mean;
    c.expect(ffr_mag <= 0.7 * 0.2, "ffr band magnitude " + fmt(ffr_mag));
    c.expect(dlm_sb >= 0.5, "dlm simbas sens " + fmt(dlm_sb));
    c.expect(ffr_sb <= 0.10, "ffr simbas sens " + fmt(ffr_sb));
    report(7, "horizontal band contrast", c.ok,
           "ffr |mean|=" + fmt(ffr_mag) + " dlm simbas=" + fmt(dlm_sb) +
               " ffr simbas=" + fmt(ffr_sb) + c.detail.str());
  }
  {  // 8: null calibration for both methods at every delta
    Check c;
    for (const char* method : {"ffr", "dlm"}) {
      const MethodMetrics& mm = std::string(method) == "ffr" ? *null_rep.ffr
                                                             : *null_rep.dlm;
      for (const auto& [delta, pm] : mm.bfdr) {
        double se = pm.flagged_fraction_sd / std::sqrt(double(null_rep.replicates));
        double bound = 0.05 + 3.0 * se;
        c.expect(pm.flagged_fraction_mean <= bound,
                 std::string(method) + " frac@" + fmt(delta) + " " +
                     fmt(pm.flagged_fraction_mean) + ">" + fmt(bound));
      }
    }
    // replicate-averaged null surface stays flat (model null example)
    double null_max = null_rep.ffr->mean_estimate.cwiseAbs().maxCoeff();
    c.expect(null_max < 0.05, "ffr mean-surface max " + fmt(null_max));
    report(8, "null calibration", c.ok,
           "ffr frac=" + fmt(null_rep.ffr->bfdr.at(0.05).flagged_fraction_mean) +
               " dlm frac=" + fmt(null_rep.dlm->bfdr.at(0.05).flagged_fraction_mean) +
               " mean-max=" + fmt(null_max) + c.detail.str());
  }
  g_notes.push_back("scenario block runtime " + fmt(dt_all) + "s");
}

// ---------------------------------------------------------------- criterion 9
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_determinism() {
  Check c;
  Scenario sc = load_scenario("vertical_band_stnr010");
  sc.replicates = 2;
  sc.n = 120;
  sc.mcmc.total_draws = 400;
  sc.mcmc.burn_in = 200;
  fs::path base = fs::temp_directory_path() / "wffr_acceptance_det";
  fs::remove_all(base);
  for (int threads : {1, 2}) {
    MetricsReport rep = run_replicates(sc, threads);
    write_metrics((base / ("t" + std::to_string(threads))).string(), rep);
  }
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(base / "t1")) {
    fs::path other = base / "t2" / entry.path().filename();
    c.expect(fs::exists(other), entry.path().filename().string() + " missing");
    if (fs::exists(other)) {
      bool same = slurp(entry.path()) == slurp(other);
      c.expect(same, entry.path().filename().string() + " differs");
      ++compared;
    }
  }
  c.expect(compared >= 10, "only " + std::to_string(compared) + " files");
  fs::remove_all(base);
  report(9, "determinism across thread counts", c.ok,
         std::to_string(compared) + " files byte-identical" + c.detail.str());
}

}  // namespace

int main() {
  std::printf("wffr acceptance suite\n");
  criterion_wavelet();
  criterion_inference_oracles();
  criterion_conjugate_oracle();
  criteria_simulations();
  criterion_determinism();
  for (const auto& n : g_notes) std::printf("note: %s\n", n.c_str());
  std::printf("ACCEPTANCE: %d/9 criteria passed\n", 9 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
