// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#include "wffr/wavelet.hpp"

#include <cmath>

#include "doctest.h"
#include "wffr/rng.hpp"

using namespace wffr;

namespace {

WaveletSpec make_spec(int vm, int levels, int length) {
  WaveletSpec spec;
  spec.vanishing_moments = vm;
  spec.levels = levels;
  spec.original_length = length;
  return spec;
}

MatrixXd random_matrix(int rows, int cols, Rng& rng, double scale = 1.0) {
  MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = scale * (2.0 * rng.uniform01() - 1.0);
  return m;
}

}  // namespace

TEST_CASE("haar 4x4 matrix is the analytic one") {
  WaveletOperator op(make_spec(1, 1, 4));
  const MatrixXd& m = op.matrix();
  const double r = 1.0 / std::sqrt(2.0);
  MatrixXd expected(4, 4);
  expected << r, r, 0, 0,
              0, 0, r, r,
              r, -r, 0, 0,
              0, 0, r, -r;
  CHECK((m - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("padded length and level layout") {
  WaveletOperator op(make_spec(4, 6, 90));
  CHECK(op.padded_length() == 128);
  CHECK(op.level_size(0) == 2);   // scaling block
  CHECK(op.level_size(6) == 2);   // coarsest detail
  CHECK(op.level_size(1) == 64);  // finest detail
  int total = op.level_size(0);
  for (int j = 1; j <= 6; ++j) total += op.level_size(j);
  CHECK(total == 128);
  // flat <-> (level, k) is a bijection
  for (int flat = 0; flat < 128; ++flat) {
    auto idx = op.index_of(flat);
    CHECK(op.flat_of(idx.level, idx.k) == flat);
  }
}

TEST_CASE("too many levels is rejected") {
  CHECK_THROWS_AS(WaveletOperator(make_spec(4, 10, 90)), ValidationError);
  CHECK_THROWS_AS(build_operator(make_spec(4, 8, 90)), ValidationError);
  CHECK_NOTHROW(build_operator(make_spec(4, 6, 90)));
}

TEST_CASE("haar transform of a constant row") {
  // two levels on length 4 concentrate everything in one scaling coefficient
  WaveletOperator op(make_spec(1, 2, 4));
  MatrixXd data(1, 4);
  data << 1, 1, 1, 1;
  MatrixXd coeffs = dwt_rows(data, op);
  CHECK(coeffs(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  for (int c = 1; c < 4; ++c) CHECK(std::abs(coeffs(0, c)) < 1e-12);
  MatrixXd back = idwt_rows(coeffs, op);
  CHECK((back - data).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero matrix maps to zero coefficients") {
  WaveletOperator op(make_spec(4, 3, 33));
  MatrixXd zeros = MatrixXd::Zero(5, 33);
  CHECK(dwt_rows(zeros, op).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("round trip recovers rows to 1e-10") {
  Rng rng(42);
  for (int vm : {1, 2, 4, 7, 10}) {
    WaveletOperator op(make_spec(vm, 4, 90));
    MatrixXd data = random_matrix(20, 90, rng);
    MatrixXd back = idwt_rows(dwt_rows(data, op), op);
    CHECK((back - data).cwiseAbs().maxCoeff() < 1e-10);
  }
  // the acceptance-scale case
  WaveletOperator op(make_spec(4, 6, 1024));
  MatrixXd data = random_matrix(40, 1024, rng);
  MatrixXd back = idwt_rows(dwt_rows(data, op), op);
  CHECK((back - data).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("round trip stays within a few ulps at 1e6 magnitude") {
  // 1 ulp at 2^20 is already 1.2e-10, so the bound here is machine-relative
  Rng rng(44);
  WaveletOperator op(make_spec(4, 6, 400));
  MatrixXd data = random_matrix(30, 400, rng, 1e6);
  MatrixXd back = idwt_rows(dwt_rows(data, op), op);
  CHECK((back - data).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("materialized matrices are orthonormal") {
  for (auto [vm, levels, len] : {std::tuple{1, 1, 4}, {4, 6, 90}, {8, 3, 60}}) {
    WaveletOperator op(make_spec(vm, levels, len));
    const MatrixXd& m = op.matrix();
    const int P = op.padded_length();
    MatrixXd gram = m * m.transpose();
    CHECK((gram - MatrixXd::Identity(P, P)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("fast path agrees with the matrix path") {
  Rng rng(7);
  WaveletOperator op(make_spec(4, 5, 70));
  const int P = op.padded_length();
  for (int trial = 0; trial < 10; ++trial) {
    VectorXd x(70);
    for (int i = 0; i < 70; ++i) x[i] = rng.normal();
    VectorXd padded(P);
    op.pad(x.data(), padded.data());
    VectorXd fast = op.forward(x);
    VectorXd viamat = op.matrix() * padded;
    CHECK((fast - viamat).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("one-hot coefficients reproduce basis rows") {
  WaveletOperator op(make_spec(4, 4, 50));
  const int P = op.padded_length();
  for (int i : {0, 3, P / 2, P - 1}) {
    VectorXd coeffs = VectorXd::Zero(P);
    coeffs[i] = 1.0;
    VectorXd f = op.inverse(coeffs);
    VectorXd row = op.matrix().row(i).head(50);
    CHECK((f - row).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("energy preservation on the padded grid") {
  Rng rng(3);
  WaveletOperator op(make_spec(6, 4, 100));
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd x(100);
    for (int i = 0; i < 100; ++i) x[i] = rng.normal(0.0, 100.0);
    VectorXd c = op.forward(x);
    CHECK(std::abs(c.norm() - x.norm()) < 1e-10 * std::max(1.0, x.norm()));
  }
}

TEST_CASE("linearity") {
  Rng rng(11);
  WaveletOperator op(make_spec(4, 3, 41));
  MatrixXd x = random_matrix(6, 41, rng);
  MatrixXd y = random_matrix(6, 41, rng);
  const double a = 2.5, b = -1.25;
  MatrixXd lhs = dwt_rows(a * x + b * y, op);
  MatrixXd rhs = a * dwt_rows(x, op) + b * dwt_rows(y, op);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("vanishing moments annihilate low-degree polynomials") {
  // polynomial sampled on the whole padded grid; interior detail coefficients
  // at every level must vanish for degrees < vm
  const int vm = 4, levels = 3;
  WaveletSpec spec = make_spec(vm, levels, 128);
  WaveletOperator op(spec);
  const int P = op.padded_length();
  const int F = spec.filter_length();
  VectorXd poly(P);
  for (int i = 0; i < P; ++i) {
    double u = (i - P / 2.0) / P;
    poly[i] = 1.0 + 2.0 * u - 3.0 * u * u + 4.0 * u * u * u;
  }
  VectorXd c = poly;
  op.forward_padded(c.data());
  for (int j = 1; j <= levels; ++j) {
    const int reach = ((1 << j) - 1) * (F - 1) + 1;  // support in samples
    for (int k = 0; k < op.level_size(j); ++k) {
      const int start = (1 << j) * k;
      if (start + reach > P) continue;  // support touches the boundary
      CHECK(std::abs(c[op.flat_of(j, k)]) < 1e-8);
    }
  }
}

TEST_CASE("project_surface basics") {
  WaveletOperator t_op(make_spec(4, 3, 20));
  WaveletOperator s_op(make_spec(2, 2, 12));
  const int Pt = t_op.padded_length(), Ps = s_op.padded_length();

  SUBCASE("zero in, zero out") {
    MatrixXd zero = MatrixXd::Zero(Pt, Ps);
    CHECK(project_surface(zero, t_op, s_op).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("round trip through both transforms") {
    Rng rng(5);
    MatrixXd b(20, 12);
    for (int t = 0; t < 20; ++t)
      for (int s = 0; s < 12; ++s) b(t, s) = rng.normal();
    // beta_star = Phi B_pad Omega' computed with the materialized matrices
    MatrixXd bpad = MatrixXd::Zero(Pt, Ps);
    bpad.topLeftCorner(20, 12) = b;
    MatrixXd bstar = t_op.matrix() * bpad * s_op.matrix().transpose();
    MatrixXd back = project_surface(bstar, t_op, s_op);
    CHECK((back - b).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("one-hot gives an outer product of basis rows") {
    MatrixXd bstar = MatrixXd::Zero(Pt, Ps);
    const int it = 5, is = 3;
    bstar(it, is) = 1.0;
    MatrixXd surf = project_surface(bstar, t_op, s_op);
    VectorXd bt = t_op.matrix().row(it).head(20);
    VectorXd bs = s_op.matrix().row(is).head(12);
    MatrixXd expected = bt * bs.transpose();
    CHECK((surf - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("dimension mismatch is rejected") {
    MatrixXd wrong = MatrixXd::Zero(Pt + 1, Ps);
    CHECK_THROWS_AS(project_surface(wrong, t_op, s_op), ValidationError);
  }
}

TEST_CASE("identity transform with levels = 0") {
  WaveletOperator op(make_spec(4, 0, 8));
  VectorXd x(8);
  for (int i = 0; i < 8; ++i) x[i] = i + 1;
  VectorXd c = op.forward(x);
  CHECK((c - x).cwiseAbs().maxCoeff() == 0.0);
  CHECK(op.num_level_groups() == 1);
  CHECK(op.level_of(5) == 0);
}

TEST_CASE("boundary rules round trip") {
  Rng rng(9);
  for (auto rule : {BoundaryRule::zero_pad, BoundaryRule::periodic, BoundaryRule::reflect}) {
    WaveletSpec spec = make_spec(3, 3, 45);
    spec.boundary = rule;
    WaveletOperator op(spec);
    MatrixXd data = random_matrix(4, 45, rng);
    MatrixXd back = idwt_rows(dwt_rows(data, op), op);
    CHECK((back - data).cwiseAbs().maxCoeff() < 1e-10);
  }
}
