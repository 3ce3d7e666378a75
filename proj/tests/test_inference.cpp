// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#include "wffr/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "wffr/rng.hpp"

using namespace wffr;

namespace {

DrawCube cube_from(const std::vector<double>& draws) {  // single cell
  DrawCube c(int(draws.size()), 1, 1);
  c.data = draws;
  return c;
}

DrawCube random_cube(int M, int T, int S, Rng& rng, double scale = 1.0) {
  DrawCube c(M, T, S);
  for (auto& v : c.data) v = scale * rng.normal();
  return c;
}

// independent oracle: repeated max-extraction with the lexicographic tie rule,
// trying every prefix size explicitly
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

}  // namespace

TEST_CASE("pointwise probability counts strict exceedances") {
  DrawCube c = cube_from({0.2, 0.2, 0.0, -0.2});
  CHECK(pointwise_probability(c, 0.1)(0, 0) == doctest::Approx(0.75));
  SUBCASE("delta zero with no exact zeros gives 1") {
    DrawCube d = cube_from({0.3, -0.1, 2.0, 0.0001});
    CHECK(pointwise_probability(d, 0.0)(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("all exact zeros give 0 for any delta") {
    DrawCube d = cube_from({0.0, 0.0, 0.0});
    CHECK(pointwise_probability(d, 0.0)(0, 0) == 0.0);
    CHECK(pointwise_probability(d, 0.1)(0, 0) == 0.0);
  }
}

TEST_CASE("bfdr worked example") {
  MatrixXd p(1, 3);
  p << 0.99, 0.97, 0.60;
  BFDRResult r = bfdr_flag(p, 0.05);
  CHECK(r.lambda == 2);
  CHECK(r.nu_alpha == doctest::Approx(0.97));
  CHECK(r.flags(0, 0));
  CHECK_FALSE(r.flags(0, 1));  // fails the strict inequality
  CHECK_FALSE(r.flags(0, 2));
}

TEST_CASE("bfdr boundary cases") {
  SUBCASE("all ones flags nothing under the strict rule") {
    MatrixXd p = MatrixXd::Constant(3, 4, 1.0);
    BFDRResult r = bfdr_flag(p, 0.05);
    CHECK(r.lambda == 12);
    CHECK(r.nu_alpha == 1.0);
    CHECK_FALSE(r.flags.any());
  }
  SUBCASE("all zeros flags nothing") {
    MatrixXd p = MatrixXd::Zero(2, 2);
    BFDRResult r = bfdr_flag(p, 0.05);
    CHECK(r.lambda == 0);
    CHECK(r.nu_alpha == 1.0);
    CHECK_FALSE(r.flags.any());
  }
}

TEST_CASE("bfdr matches the brute-force prefix search") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    int T = 1 + rng.uniform_int(4);
    int S = 1 + rng.uniform_int(3);
    MatrixXd p(T, S);
    for (int t = 0; t < T; ++t) {
      for (int s = 0; s < S; ++s) {
        // quantized values so that ties actually occur
        p(t, s) = rng.uniform_int(21) / 20.0;
      }
    }
    double alpha = 0.01 + 0.3 * rng.uniform01();
    BFDRResult r = bfdr_flag(p, alpha);
    BoolGrid expect = brute_force_bfdr(p, alpha);
    CHECK((r.flags.array() == expect.array()).all());
  }
}

TEST_CASE("bfdr nesting in alpha") {
  Rng rng(5);
  DrawCube c = random_cube(40, 5, 6, rng);
  MatrixXd p = pointwise_probability(c, 0.5);
  BFDRResult lo = bfdr_flag(p, 0.02);
  BFDRResult hi = bfdr_flag(p, 0.10);
  for (int t = 0; t < 5; ++t)
    for (int s = 0; s < 6; ++s)
      if (lo.flags(t, s)) CHECK(hi.flags(t, s));
}

TEST_CASE("pointwise probability is non-increasing in delta") {
  Rng rng(6);
  DrawCube c = random_cube(60, 4, 4, rng);
  MatrixXd p1 = pointwise_probability(c, 0.1);
  MatrixXd p2 = pointwise_probability(c, 0.4);
  CHECK(((p1 - p2).array() >= 0.0).all());
}

TEST_CASE("corrected sd behaviors") {
  SUBCASE("iid draws need almost no correction") {
    Rng rng(8);
    std::vector<double> draws(1000);
    for (auto& d : draws) d = rng.normal(0.0, 2.0);
    CellStats st = corrected_sd(draws);
    double sd = 0.0;
    double mean = 0.0;
    for (double d : draws) mean += d;
    mean /= draws.size();
    for (double d : draws) sd += (d - mean) * (d - mean);
    sd = std::sqrt(sd / (draws.size() - 1));
    CHECK(std::abs(st.sd_corrected - sd) / sd < 0.05);
  }
  SUBCASE("constant draws floor the sd") {
    CellStats st = corrected_sd({1.5, 1.5, 1.5, 1.5, 1.5, 1.5, 1.5, 1.5, 1.5, 1.5});
    CHECK(st.sd_corrected == 1e-12);
    CHECK(st.rho == 0.0);
  }
  SUBCASE("negative autocorrelation clips to zero") {
    std::vector<double> alt;
    for (int i = 0; i < 50; ++i) alt.push_back(i % 2 ? 1.0 : -1.0);
    CellStats st = corrected_sd(alt);
    CHECK(st.rho == 0.0);  // clipped
  }
  SUBCASE("positive autocorrelation inflates the sd") {
    Rng rng(12);
    std::vector<double> ar(2000);
    double a = 0.0;
    for (auto& v : ar) {
      a = 0.8 * a + 0.6 * rng.normal();
      v = a;
    }
    CellStats st = corrected_sd(ar);
    CHECK(st.rho > 0.5);
    double raw_sd = 0.0, mean = 0.0;
    for (double d : ar) mean += d;
    mean /= ar.size();
    for (double d : ar) raw_sd += (d - mean) * (d - mean);
    raw_sd = std::sqrt(raw_sd / (ar.size() - 1));
    CHECK(st.sd_corrected > raw_sd);
  }
}

TEST_CASE("simbas degenerate and spike cells") {
  SUBCASE("symmetric two-value cell is never excluded") {
    DrawCube c(10, 1, 1);
    for (int m = 0; m < 10; ++m) c.data[m] = m % 2 ? 1.0 : -1.0;
    SimBaSResult r = simbas(c);
    CHECK(r.simbas(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("all-zero cell scores 1") {
    Rng rng(3);
    DrawCube c = random_cube(50, 2, 2, rng);
    for (int m = 0; m < 50; ++m) c.at(m, 1, 1) = 0.0;
    SimBaSResult r = simbas(c);
    CHECK(r.simbas(1, 1) == doctest::Approx(1.0));
  }
  SUBCASE("a dominant cell reaches the empirical floor 1/M") {
    Rng rng(4);
    const int M = 50;
    DrawCube c(M, 2, 3);
    for (int m = 0; m < M; ++m) {
      for (int t = 0; t < 2; ++t)
        for (int s = 0; s < 3; ++s) c.at(m, t, s) = 0.001 * rng.normal();
      c.at(m, 0, 0) = 5.0 + 0.1 * rng.normal();
    }
    SimBaSResult r = simbas(c);
    CHECK(r.simbas(0, 0) == doctest::Approx(1.0 / M));
  }
}

TEST_CASE("simbas score/band duality on random draw sets") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const int M = trial % 2 == 0 ? 50 : 200;
    DrawCube c = random_cube(M, 3, 4, rng);
    // shift some cells away from zero so both outcomes occur
    for (int m = 0; m < M; ++m) {
      c.at(m, 0, 0) += 2.5;
      c.at(m, 1, 2) += 0.8;
    }
    std::vector<double> alphas = {0.01, 0.05, 0.10};
    SimBaSResult r = simbas(c, alphas);
    for (size_t ai = 0; ai < alphas.size(); ++ai) {
      const bool resolvable = std::floor(alphas[ai] * M) >= 1.0;  // 1/M granularity
      for (int t = 0; t < 3; ++t) {
        for (int s = 0; s < 4; ++s) {
          bool excluded = r.lower[ai](t, s) > 0.0 || r.upper[ai](t, s) < 0.0;
          bool flagged = r.simbas(t, s) <= alphas[ai];
          if (resolvable) {
            CHECK(excluded == flagged);
          } else {
            CHECK_FALSE(flagged);  // the score cannot resolve below 1/M
          }
        }
      }
    }
    for (size_t ai = 0; ai < alphas.size(); ++ai) {
      CHECK(((r.upper[ai] - r.mean).array() >= 0.0).all());
      CHECK(((r.mean - r.lower[ai]).array() >= 0.0).all());
    }
  }
}

TEST_CASE("scale equivariance") {
  Rng rng(123);
  DrawCube c = random_cube(80, 3, 3, rng);
  for (int m = 0; m < 80; ++m) c.at(m, 1, 1) += 1.0;
  const double k = 3.7;
  DrawCube scaled = c;
  for (auto& v : scaled.data) v *= k;

  MatrixXd p1 = pointwise_probability(c, 0.2);
  MatrixXd p2 = pointwise_probability(scaled, 0.2 * k);
  CHECK((p1 - p2).cwiseAbs().maxCoeff() == 0.0);

  SimBaSResult r1 = simbas(c);
  SimBaSResult r2 = simbas(scaled);
  CHECK((r1.simbas - r2.simbas).cwiseAbs().maxCoeff() == 0.0);
  CHECK((k * r1.mean - r2.mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((k * r1.lower[0] - r2.lower[0]).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((k * r1.upper[0] - r2.upper[0]).cwiseAbs().maxCoeff() < 1e-10);
}
