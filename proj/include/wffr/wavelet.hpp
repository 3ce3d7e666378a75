// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include "wffr/types.hpp"

namespace wffr {

enum class WaveletFamily { daubechies };

// How the padded region beyond original_length is filled before the
// transform. Only the fill rule differs; the transform itself is always the
// orthonormal periodized pyramid on the padded dyadic grid.
enum class BoundaryRule { zero_pad, periodic, reflect };

struct WaveletSpec {
  WaveletFamily family = WaveletFamily::daubechies;
  int vanishing_moments = 4;
  int levels = 6;  // 0 means identity transform (copy onto the padded grid)
  BoundaryRule boundary = BoundaryRule::zero_pad;
  int original_length = 0;

  int padded_length() const;  // smallest power of two >= original_length
  int filter_length() const { return 2 * vanishing_moments; }
  void validate() const;
};

struct WaveletIndex {
  int level = 0;  // 0 = coarse scaling block, 1..levels = detail (1 finest)
  int k = 0;      // location within the level
  int flat = 0;   // 0-based position in the coefficient vector
};

/// Orthonormal multi-level Daubechies transform on the padded dyadic grid.
/// Immutable after construction and safe to share across threads.
class WaveletOperator {
 public:
  explicit WaveletOperator(WaveletSpec spec);
  WaveletOperator(const WaveletOperator& other);
  WaveletOperator& operator=(const WaveletOperator& other);

  const WaveletSpec& spec() const { return spec_; }
  int original_length() const { return spec_.original_length; }
  int padded_length() const { return padded_; }
  int levels() const { return spec_.levels; }

  /// Fills the padded region of a length-padded buffer per the boundary rule.
  void pad(const double* x, double* out) const;

  void forward_padded(double* v) const;  // in place, length padded
  void inverse_padded(double* v) const;  // in place, length padded

  VectorXd forward(const VectorXd& x) const;       // original -> padded coeffs
  VectorXd inverse(const VectorXd& coeffs) const;  // padded coeffs -> original

  int level_of(int flat) const;
  WaveletIndex index_of(int flat) const;
  int flat_of(int level, int k) const;
  int level_size(int level) const;
  int num_level_groups() const { return spec_.levels + 1; }

  /// padded x padded orthonormal matrix; rows are the basis functions
  /// evaluated on the padded grid, so coeffs = matrix * padded_signal.
  const MatrixXd& matrix() const;

  const std::vector<double>& lowpass() const { return h_; }
  const std::vector<double>& highpass() const { return g_; }

 private:
  WaveletSpec spec_;
  int padded_ = 0;
  std::vector<double> h_, g_;
  mutable std::mutex matrix_mutex_;
  mutable std::shared_ptr<const MatrixXd> matrix_;
};

WaveletOperator build_operator(const WaveletSpec& spec);

/// Daubechies scaling filter for vm in 1..10, unit norm, sum = sqrt(2).
const std::vector<double>& daubechies_filter(int vanishing_moments);

/// Row-wise transform: each row is padded then transformed. Output n x padded.
MatrixXd dwt_rows(const MatrixXd& data, const WaveletOperator& op);

/// Row-wise inverse: each padded coefficient row is inverted then truncated.
MatrixXd idwt_rows(const MatrixXd& coeffs, const WaveletOperator& op);

/// beta = Phi' beta_star Omega truncated to the original T x S grid, where
/// Phi/Omega are the operators for the T and S grids.
MatrixXd project_surface(const MatrixXd& beta_star, const WaveletOperator& t_op,
                         const WaveletOperator& s_op);

}  // namespace wffr
