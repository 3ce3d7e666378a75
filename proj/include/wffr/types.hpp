// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wffr {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using BoolGrid = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
using RowMajorMap = Eigen::Map<
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMajorMap = Eigen::Map<
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

/// Bad inputs (shapes, files, configs). The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failures arising during computation. The CLI maps this to exit code 1.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// M retained draws of a T-by-S grid, draw-major storage.
struct DrawCube {
  int M = 0, T = 0, S = 0;
  std::vector<double> data;

  DrawCube() = default;
  DrawCube(int m, int t, int s) : M(m), T(t), S(s), data(size_t(m) * t * s, 0.0) {}

  double& at(int m, int t, int s) { return data[(size_t(m) * T + t) * S + s]; }
  double at(int m, int t, int s) const { return data[(size_t(m) * T + t) * S + s]; }
  double* draw_ptr(int m) { return data.data() + size_t(m) * T * S; }
  const double* draw_ptr(int m) const { return data.data() + size_t(m) * T * S; }
  ConstRowMajorMap draw(int m) const { return {draw_ptr(m), T, S}; }
  RowMajorMap draw(int m) { return {draw_ptr(m), T, S}; }
  size_t cells() const { return size_t(T) * S; }
};

inline uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(uint64_t v);

}  // namespace wffr
