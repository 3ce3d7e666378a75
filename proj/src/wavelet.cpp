// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#include "wffr/wavelet.hpp"

#include <cmath>
#include <string>

namespace wffr {

namespace {

// Extremal-phase Daubechies scaling filters, unit L2 norm, sum = sqrt(2).
// Indexed by vanishing moments 1..10; filter length is 2*vm.
const std::vector<std::vector<double>> kDaubechies = {
    // vm=1 (Haar)
    {0.7071067811865475244, 0.7071067811865475244},
    // vm=2
    {0.4829629131445341434, 0.8365163037378079056, 0.2241438680420133810,
     -0.1294095225512603812},
    // vm=3
    {0.3326705529500826160, 0.8068915093110925765, 0.4598775021184915701,
     -0.1350110200102545887, -0.08544127388202666169, 0.03522629188570953660},
    // vm=4
    {0.2303778133088965009, 0.7148465705529156471, 0.6308807679298589079,
     -0.02798376941685985421, -0.1870348117190930841, 0.03084138183556076363,
     0.03288301166688519974, -0.01059740178506903210},
    // vm=5
    {0.1601023979741929145, 0.6038292697971896705, 0.7243085284377729277,
     0.1384281459013207315, -0.2422948870663820319, -0.03224486958463837465,
     0.07757149384004571352, -0.006241490212798274274, -0.01258075199908199947,
     0.003335725285473771278},
    // vm=6
    {0.1115407433501094636, 0.4946238903984530857, 0.7511339080210953507,
     0.3152503517091976291, -0.2262646939654398201, -0.1297668675672619356,
     0.09750160558732304910, 0.02752286553030572863, -0.03158203931748602957,
     0.0005538422011614961393, 0.004777257510945510640, -0.001077301085308479565},
    // vm=7
    {0.07785205408500917902, 0.3965393194819173065, 0.7291320908462351199,
     0.4697822874051931225, -0.1439060039285649754, -0.2240361849938749826,
     0.07130921926683026475, 0.08061260915108307191, -0.03802993693501441358,
     -0.01657454163066688065, 0.01255099855609984061, 0.0004295779729213665211,
     -0.001801640704047490915, 0.0003537137999745202484},
    // vm=8
    {0.05441584224310400996, 0.3128715909142999707, 0.6756307362972898068,
     0.5853546836542067128, -0.01582910525634930567, -0.2840155429615469265,
     0.0004724845739132827704, 0.1287474266204784589, -0.01736930100180754617,
     -0.04408825393079475151, 0.01398102791739828165, 0.008746094047405776716,
     -0.004870352993451574310, -0.0003917403733769470463, 0.0006754494064505693664,
     -0.0001174767841247695337},
    // vm=9
    {0.03807794736387834659, 0.2438346746125903537, 0.6048231236901111119,
     0.6572880780513005381, 0.1331973858250075762, -0.2932737832791749088,
     -0.09684078322297646051, 0.1485407493381063801, 0.03072568147933337921,
     -0.06763282906132997368, 0.0002509471148314519576, 0.02236166212367909721,
     -0.004723204757751397278, -0.004281503682463429834, 0.001847646883056226477,
     0.0002303857635231959672, -0.0002519631889427101370, 0.00003934732031627159948},
    // vm=10
    {0.02667005790055555359, 0.1881768000776914890, 0.5272011889317255865,
     0.6884590394536035657, 0.2811723436605774607, -0.2498464243273153794,
     -0.1959462743773770435, 0.1273693403357932601, 0.09305736460357235116,
     -0.07139414716639708715, -0.02945753682187581286, 0.03321267405934100174,
     0.003606553566956169655, -0.01073317548333057504, 0.001395351747052901166,
     0.001992405295185056117, -0.0006858566949597116266, -0.0001164668551292854510,
     0.00009358867032006959133, -0.00001326420289452124481},
};

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

const std::vector<double>& daubechies_filter(int vanishing_moments) {
  if (vanishing_moments < 1 || vanishing_moments > 10) {
    throw ValidationError("daubechies vanishing_moments must be in 1..10, got " +
                          std::to_string(vanishing_moments));
  }
  return kDaubechies[vanishing_moments - 1];
}

int WaveletSpec::padded_length() const { return next_pow2(original_length); }

void WaveletSpec::validate() const {
  if (original_length < 1) {
    throw ValidationError("wavelet original_length must be >= 1, got " +
                          std::to_string(original_length));
  }
  if (vanishing_moments < 1 || vanishing_moments > 10) {
    throw ValidationError("wavelet vanishing_moments must be in 1..10, got " +
                          std::to_string(vanishing_moments));
  }
  if (levels < 0) throw ValidationError("wavelet levels must be >= 0");
  // every pyramid stage needs an input block of at least two samples
  if (levels > 0 && padded_length() < (1 << levels)) {
    throw ValidationError(
        "insufficient coarse-level length: padded length " +
        std::to_string(padded_length()) + " admits at most " +
        std::to_string(int(std::log2(padded_length()))) +
        " decomposition levels (filter length " + std::to_string(filter_length()) +
        "), requested " + std::to_string(levels));
  }
}

WaveletOperator::WaveletOperator(WaveletSpec spec) : spec_(spec) {
  spec_.validate();
  padded_ = spec_.padded_length();
  h_ = daubechies_filter(spec_.vanishing_moments);
  const int F = int(h_.size());
  g_.resize(F);
  for (int n = 0; n < F; ++n) g_[n] = ((n & 1) ? -1.0 : 1.0) * h_[F - 1 - n];
  // filter orthonormality, checked once per construction
  double s = 0, e = 0;
  for (double v : h_) {
    s += v;
    e += v * v;
  }
  if (std::abs(s - std::sqrt(2.0)) > 1e-12 || std::abs(e - 1.0) > 1e-12) {
    throw NumericalError("daubechies filter table failed orthonormality check");
  }
}

WaveletOperator build_operator(const WaveletSpec& spec) { return WaveletOperator(spec); }

void WaveletOperator::pad(const double* x, double* out) const {
  const int L = spec_.original_length;
  for (int i = 0; i < L; ++i) out[i] = x[i];
  for (int i = L; i < padded_; ++i) {
    switch (spec_.boundary) {
      case BoundaryRule::zero_pad:
        out[i] = 0.0;
        break;
      case BoundaryRule::periodic:
        out[i] = x[i % L];
        break;
      case BoundaryRule::reflect: {
        // half-sample symmetric extension, folded as needed
        int p = i % (2 * L);
        out[i] = p < L ? x[p] : x[2 * L - 1 - p];
        break;
      }
    }
  }
}

void WaveletOperator::forward_padded(double* v) const {
  const int F = int(h_.size());
  std::vector<double> scratch(padded_);
  int ncur = padded_;
  for (int lev = 0; lev < spec_.levels; ++lev) {
    const int half = ncur / 2;
    for (int k = 0; k < half; ++k) {
      double a = 0.0, d = 0.0;
      const int base = 2 * k;
      for (int n = 0; n < F; ++n) {
        int idx = base + n;
        while (idx >= ncur) idx -= ncur;  // circular on the current block
        const double xv = v[idx];
        a += h_[n] * xv;
        d += g_[n] * xv;
      }
      scratch[k] = a;
      scratch[half + k] = d;
    }
    for (int i = 0; i < ncur; ++i) v[i] = scratch[i];
    ncur = half;
  }
}

void WaveletOperator::inverse_padded(double* v) const {
  const int F = int(h_.size());
  std::vector<double> scratch(padded_);
  int ncur = padded_ >> spec_.levels;
  for (int lev = spec_.levels; lev >= 1; --lev) {
    const int full = 2 * ncur;
    for (int i = 0; i < full; ++i) scratch[i] = 0.0;
    for (int k = 0; k < ncur; ++k) {
      const double a = v[k];
      const double d = v[ncur + k];
      const int base = 2 * k;
      for (int n = 0; n < F; ++n) {
        int idx = base + n;
        while (idx >= full) idx -= full;
        scratch[idx] += h_[n] * a + g_[n] * d;
      }
    }
    for (int i = 0; i < full; ++i) v[i] = scratch[i];
    ncur = full;
  }
}

VectorXd WaveletOperator::forward(const VectorXd& x) const {
  if (int(x.size()) != spec_.original_length) {
    throw ValidationError("forward: expected length " +
                          std::to_string(spec_.original_length) + ", got " +
                          std::to_string(x.size()));
  }
  VectorXd out(padded_);
  pad(x.data(), out.data());
  forward_padded(out.data());
  return out;
}

VectorXd WaveletOperator::inverse(const VectorXd& coeffs) const {
  if (int(coeffs.size()) != padded_) {
    throw ValidationError("inverse: expected length " + std::to_string(padded_) +
                          ", got " + std::to_string(coeffs.size()));
  }
  VectorXd buf = coeffs;
  inverse_padded(buf.data());
  return buf.head(spec_.original_length);
}

int WaveletOperator::level_of(int flat) const {
  if (flat < 0 || flat >= padded_) throw ValidationError("level_of: flat index out of range");
  if (spec_.levels == 0) return 0;
  const int coarse = padded_ >> spec_.levels;
  if (flat < coarse) return 0;
  int j = spec_.levels;
  while (j > 1 && flat >= (padded_ >> (j - 1))) --j;
  return j;
}

int WaveletOperator::level_size(int level) const {
  if (level == 0) return padded_ >> spec_.levels;
  return padded_ >> level;
}

int WaveletOperator::flat_of(int level, int k) const {
  if (level < 0 || level > spec_.levels) throw ValidationError("flat_of: bad level");
  if (k < 0 || k >= level_size(level)) throw ValidationError("flat_of: bad k");
  return level == 0 ? k : (padded_ >> level) + k;
}

WaveletIndex WaveletOperator::index_of(int flat) const {
  WaveletIndex idx;
  idx.flat = flat;
  idx.level = level_of(flat);
  idx.k = idx.level == 0 ? flat : flat - (padded_ >> idx.level);
  return idx;
}

WaveletOperator::WaveletOperator(const WaveletOperator& other)
    : spec_(other.spec_), padded_(other.padded_), h_(other.h_), g_(other.g_) {
  std::lock_guard<std::mutex> lock(other.matrix_mutex_);
  matrix_ = other.matrix_;
}

WaveletOperator& WaveletOperator::operator=(const WaveletOperator& other) {
  if (this == &other) return *this;
  spec_ = other.spec_;
  padded_ = other.padded_;
  h_ = other.h_;
  g_ = other.g_;
  std::lock_guard<std::mutex> lock(other.matrix_mutex_);
  matrix_ = other.matrix_;
  return *this;
}

const MatrixXd& WaveletOperator::matrix() const {
  std::lock_guard<std::mutex> lock(matrix_mutex_);
  if (!matrix_) {
    auto m = std::make_shared<MatrixXd>(padded_, padded_);
    std::vector<double> col(padded_);
    for (int i = 0; i < padded_; ++i) {
      std::fill(col.begin(), col.end(), 0.0);
      col[i] = 1.0;
      forward_padded(col.data());
      for (int r = 0; r < padded_; ++r) (*m)(r, i) = col[r];
    }
    matrix_ = std::move(m);
  }
  return *matrix_;
}

MatrixXd dwt_rows(const MatrixXd& data, const WaveletOperator& op) {
  if (int(data.cols()) != op.original_length()) {
    throw ValidationError("dwt_rows: data has " + std::to_string(data.cols()) +
                          " columns, operator expects " +
                          std::to_string(op.original_length()));
  }
  const int n = int(data.rows());
  MatrixXd out(n, op.padded_length());
  std::vector<double> row(op.padded_length());
  std::vector<double> in(op.original_length());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < op.original_length(); ++j) in[j] = data(i, j);
    op.pad(in.data(), row.data());
    op.forward_padded(row.data());
    for (int j = 0; j < op.padded_length(); ++j) out(i, j) = row[j];
  }
  return out;
}

MatrixXd idwt_rows(const MatrixXd& coeffs, const WaveletOperator& op) {
  if (int(coeffs.cols()) != op.padded_length()) {
    throw ValidationError("idwt_rows: coeffs have " + std::to_string(coeffs.cols()) +
                          " columns, operator expects " +
                          std::to_string(op.padded_length()));
  }
  const int n = int(coeffs.rows());
  MatrixXd out(n, op.original_length());
  std::vector<double> row(op.padded_length());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < op.padded_length(); ++j) row[j] = coeffs(i, j);
    op.inverse_padded(row.data());
    for (int j = 0; j < op.original_length(); ++j) out(i, j) = row[j];
  }
  return out;
}

MatrixXd project_surface(const MatrixXd& beta_star, const WaveletOperator& t_op,
                         const WaveletOperator& s_op) {
  if (int(beta_star.rows()) != t_op.padded_length() ||
      int(beta_star.cols()) != s_op.padded_length()) {
    throw ValidationError("project_surface: beta_star is " +
                          std::to_string(beta_star.rows()) + "x" +
                          std::to_string(beta_star.cols()) + ", expected " +
                          std::to_string(t_op.padded_length()) + "x" +
                          std::to_string(s_op.padded_length()));
  }
  const int T = t_op.original_length();
  const int S = s_op.original_length();
  // columns first (T side), keep only the first T rows for the S side
  MatrixXd partial(T, s_op.padded_length());
  std::vector<double> buf(std::max(t_op.padded_length(), s_op.padded_length()));
  for (int c = 0; c < int(beta_star.cols()); ++c) {
    for (int r = 0; r < t_op.padded_length(); ++r) buf[r] = beta_star(r, c);
    t_op.inverse_padded(buf.data());
    for (int r = 0; r < T; ++r) partial(r, c) = buf[r];
  }
  MatrixXd out(T, S);
  for (int r = 0; r < T; ++r) {
    for (int c = 0; c < s_op.padded_length(); ++c) buf[c] = partial(r, c);
    s_op.inverse_padded(buf.data());
    for (int c = 0; c < S; ++c) out(r, c) = buf[c];
  }
  return out;
}

std::string to_hex(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

}  // namespace wffr
