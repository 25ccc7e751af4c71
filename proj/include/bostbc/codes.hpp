#pragma once

// Linear space-time block codes as weight-matrix families: the named codes,
// Clifford unitary weight designs (CUWD), coordinate interleaved orthogonal
// designs (CIOD), the four block-orthogonal constructions, and reordering.

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bostbc/error.hpp"
#include "bostbc/linalg.hpp"
#include "bostbc/matrix.hpp"
#include "bostbc/profile.hpp"

namespace bostbc {

inline constexpr Complex kJ{0.0, 1.0};

/// X(x_1, ..., x_K) = sum_i x_i A_i with real symbols x_i. Weights are kept
/// in the ordering currently in effect; `ordering[i]` is the original
/// (construction-time) index of the weight at position i.
struct LinearSTBC {
  std::size_t n_t = 0;
  std::size_t t = 0;
  std::vector<ComplexMatrix> weights;
  std::vector<std::string> labels;
  std::vector<std::size_t> ordering;
  std::optional<BlockOrthogonalProfile> declared_profile;

  std::size_t k_real() const noexcept { return weights.size(); }

  ComplexMatrix codeword(std::span<const double> x) const {
    if (x.size() != weights.size()) throw Error(Errc::DimensionMismatch, "symbol count");
    ComplexMatrix out(n_t, t);
    for (std::size_t i = 0; i < x.size(); ++i) out += weights[i] * Complex(x[i], 0.0);
    return out;
  }

  /// G = [vec~(A_1) ... vec~(A_K)], so that vec~(X) = G x.
  RealMatrix generator() const {
    RealMatrix g(2 * n_t * t, weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const RealVector col = tilde_vec(weights[i].data());
      std::copy(col.begin(), col.end(), g.column(i).begin());
    }
    return g;
  }

  /// Index of the weight labelled `label`, or throws.
  std::size_t index_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return i;
    throw Error(Errc::InvalidPermutation, "unknown symbol label '" + label + "'");
  }
};

/// Structural checks: shapes, label count, finiteness, ordering is a permutation.
inline void validate(const LinearSTBC& code) {
  if (code.n_t == 0 || code.t == 0) throw Error(Errc::DimensionMismatch, "empty code dimensions");
  if (code.weights.empty()) throw Error(Errc::DimensionMismatch, "code has no weights");
  if (code.labels.size() != code.weights.size())
    throw Error(Errc::DimensionMismatch, "label count differs from weight count");
  if (code.ordering.size() != code.weights.size())
    throw Error(Errc::DimensionMismatch, "ordering length differs from weight count");
  std::vector<bool> seen(code.weights.size(), false);
  for (std::size_t o : code.ordering) {
    if (o >= seen.size() || seen[o]) throw Error(Errc::InvalidPermutation, "ordering is not a permutation");
    seen[o] = true;
  }
  for (const auto& w : code.weights) {
    if (w.rows() != code.n_t || w.cols() != code.t)
      throw Error(Errc::DimensionMismatch, "weight matrix is not n_t x t");
    if (!w.is_finite()) throw Error(Errc::DimensionMismatch, "non-finite weight entry");
  }
  if (code.declared_profile && code.declared_profile->symbols() != code.k_real())
    throw Error(Errc::InvalidProfile, "declared profile does not multiply out to K");
}

inline std::size_t generator_rank(const LinearSTBC& code) {
  return numeric_rank(code.generator());
}

inline void require_full_rank(const LinearSTBC& code) {
  const std::size_t rank = generator_rank(code);
  if (rank < code.k_real())
    throw Error(Errc::RankDeficient, "generator rank " + std::to_string(rank) + " < K = " +
                                         std::to_string(code.k_real()));
}

inline std::vector<std::size_t> identity_permutation(std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  return p;
}

inline LinearSTBC make_code(std::size_t n_t, std::size_t t, std::vector<ComplexMatrix> weights,
                            std::vector<std::string> labels,
                            std::optional<BlockOrthogonalProfile> profile = std::nullopt) {
  LinearSTBC code;
  code.n_t = n_t;
  code.t = t;
  code.ordering = identity_permutation(weights.size());
  code.weights = std::move(weights);
  code.labels = std::move(labels);
  code.declared_profile = profile;
  validate(code);
  return code;
}

/// Labels s1I, s1Q, s2I, ... for `complex_symbols` complex symbols.
inline std::vector<std::string> iq_labels(std::size_t complex_symbols, const std::string& stem = "s",
                                          std::size_t first = 1) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < complex_symbols; ++i) {
    out.push_back(stem + std::to_string(first + i) + "I");
    out.push_back(stem + std::to_string(first + i) + "Q");
  }
  return out;
}

/// `perm[i]` names the current position whose weight moves to position i.
inline LinearSTBC reorder(const LinearSTBC& code, std::span<const std::size_t> perm) {
  const std::size_t k = code.k_real();
  if (perm.size() != k) throw Error(Errc::InvalidPermutation, "permutation length differs from K");
  std::vector<bool> seen(k, false);
  for (std::size_t p : perm) {
    if (p >= k || seen[p]) throw Error(Errc::InvalidPermutation, "not a bijection on 1..K");
    seen[p] = true;
  }
  LinearSTBC out;
  out.n_t = code.n_t;
  out.t = code.t;
  for (std::size_t i = 0; i < k; ++i) {
    out.weights.push_back(code.weights[perm[i]]);
    out.labels.push_back(code.labels[perm[i]]);
    out.ordering.push_back(code.ordering[perm[i]]);
  }
  bool same = true;
  for (std::size_t i = 0; i < k; ++i) same = same && perm[i] == i;
  if (same) out.declared_profile = code.declared_profile;
  return out;
}

inline LinearSTBC reorder_by_labels(const LinearSTBC& code, std::span<const std::string> labels) {
  std::vector<std::size_t> perm;
  for (const auto& l : labels) perm.push_back(code.index_of(l));
  return reorder(code, perm);
}

inline std::vector<std::size_t> inverse_permutation(std::span<const std::size_t> perm) {
  std::vector<std::size_t> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv.at(perm[i]) = i;
  return inv;
}

// ---------------------------------------------------------------------------
// Named codes

/// Alamouti X = [[s1, -s2*], [s2, s1*]], ordering [s1I, s1Q, s2I, s2Q].
inline std::vector<ComplexMatrix> alamouti_weights() {
  using M = ComplexMatrix;
  return {
      M::from_rows({{1, 0}, {0, 1}}),
      M::from_rows({{kJ, 0}, {0, -kJ}}),
      M::from_rows({{0, -1}, {1, 0}}),
      M::from_rows({{0, kJ}, {kJ, 0}}),
  };
}

inline LinearSTBC alamouti_code() {
  return make_code(2, 2, alamouti_weights(), iq_labels(2), BlockOrthogonalProfile{1, 4, 1});
}

/// Alamouti matrix X1(z1, z2) for complex z.
inline ComplexMatrix alamouti_matrix(Complex z1, Complex z2) {
  return ComplexMatrix::from_rows({{z1, -std::conj(z2)}, {z2, std::conj(z1)}});
}

namespace golden {
inline const double kSqrt5 = std::sqrt(5.0);
inline const double kTheta = (1.0 + kSqrt5) / 2.0;
inline const double kThetaBar = (1.0 - kSqrt5) / 2.0;
inline const Complex kAlpha = Complex(1.0, 1.0 - kTheta);
inline const Complex kAlphaBar = Complex(1.0, 1.0 - kThetaBar);
}  // namespace golden

/// Golden code, default ordering [s1I, s1Q, s2I, s2Q, s3I, s3Q, s4I, s4Q].
inline LinearSTBC golden_code() {
  using namespace golden;
  using M = ComplexMatrix;
  const double s = 1.0 / kSqrt5;
  const std::vector<M> complex_coeffs = {
      M::from_rows({{kAlpha, 0}, {0, kAlphaBar}}) * Complex(s),
      M::from_rows({{kAlpha * kTheta, 0}, {0, kAlphaBar * kThetaBar}}) * Complex(s),
      M::from_rows({{0, kJ * kAlphaBar}, {kAlpha, 0}}) * Complex(s),
      M::from_rows({{0, kJ * kAlphaBar * kThetaBar}, {kAlpha * kTheta, 0}}) * Complex(s),
  };
  std::vector<M> weights;
  for (const auto& c : complex_coeffs) {
    weights.push_back(c);
    weights.push_back(c * kJ);
  }
  return make_code(2, 2, std::move(weights), iq_labels(4), BlockOrthogonalProfile{4, 2, 1});
}

inline bool is_unitary(const ComplexMatrix& u, double tol = 1e-10) {
  if (u.rows() != u.cols()) return false;
  return max_abs_diff(u.adjoint() * u, ComplexMatrix::identity(u.rows())) < tol;
}

/// Real Givens rotation by 1/2 atan(2). Any unitary keeps the
/// block-orthogonal structure; this one is a documented default, not an
/// optimum.
inline ComplexMatrix default_bhv_rotation() {
  const double a = 0.5 * std::atan(2.0);
  return ComplexMatrix::from_rows({{std::cos(a), -std::sin(a)}, {std::sin(a), std::cos(a)}});
}

inline ComplexMatrix bhv_t_matrix() { return ComplexMatrix::from_rows({{1, 0}, {0, -1}}); }

/// X = X1(s1, s2) + T X1(z1, z2) with [z1, z2]^T = U [s3, s4]^T, both X1
/// Alamouti and T = diag(1, -1).
inline LinearSTBC bhv_code(const ComplexMatrix& u = default_bhv_rotation()) {
  if (u.rows() != 2 || u.cols() != 2 || !is_unitary(u)) throw Error(Errc::NotUnitary, "BHV rotation");
  std::vector<ComplexMatrix> weights = alamouti_weights();
  const ComplexMatrix t = bhv_t_matrix();
  for (std::size_t col = 0; col < 2; ++col)
    for (Complex unit : {Complex(1.0), kJ}) {
      const Complex z1 = unit * u(0, col);
      const Complex z2 = unit * u(1, col);
      weights.push_back(t * alamouti_matrix(z1, z2));
    }
  return make_code(2, 2, std::move(weights), iq_labels(4), BlockOrthogonalProfile{2, 4, 1});
}

/// Srinath-Rajan 2x2 code, entered exactly as its closed form:
/// [[x1I + j x2Q, w (x3I + j x4Q)], [w (x4I + j x3Q), x2I + j x1Q]], w = e^{j pi/4}.
/// Default ordering pairs the coordinate-interleaved components:
/// [x1I, x2Q, x2I, x1Q, x3I, x4Q, x4I, x3Q].
inline LinearSTBC srinath_rajan_code() {
  using M = ComplexMatrix;
  const Complex w = std::polar(1.0, std::numbers::pi / 4.0);
  std::vector<M> weights = {
      M::from_rows({{1, 0}, {0, 0}}),       // x1I
      M::from_rows({{kJ, 0}, {0, 0}}),      // x2Q
      M::from_rows({{0, 0}, {0, 1}}),       // x2I
      M::from_rows({{0, 0}, {0, kJ}}),      // x1Q
      M::from_rows({{0, w}, {0, 0}}),       // x3I
      M::from_rows({{0, w * kJ}, {0, 0}}),  // x4Q
      M::from_rows({{0, 0}, {w, 0}}),       // x4I
      M::from_rows({{0, 0}, {w * kJ, 0}}),  // x3Q
  };
  return make_code(2, 2, std::move(weights), {"x1I", "x2Q", "x2I", "x1Q", "x3I", "x4Q", "x4I", "x3Q"},
                   BlockOrthogonalProfile{2, 2, 2});
}

// ---------------------------------------------------------------------------
// Clifford unitary weight designs

namespace clifford {

inline ComplexMatrix sigma1() { return ComplexMatrix::from_rows({{0, 1}, {-1, 0}}); }
inline ComplexMatrix sigma2() { return ComplexMatrix::from_rows({{0, kJ}, {kJ, 0}}); }
inline ComplexMatrix sigma3() { return ComplexMatrix::from_rows({{1, 0}, {0, -1}}); }

/// R(gamma_1) = +-j sigma3^{(x) a}; `sign` is +1 or -1.
inline ComplexMatrix r_gamma1(unsigned a, int sign = 1) { return kron_power(sigma3(), a) * (kJ * double(sign)); }

/// R(gamma_{2k}) = I_2^{(x)(a-k)} (x) sigma1 (x) sigma3^{(x)(k-1)}.
inline ComplexMatrix r_gamma_even(unsigned a, unsigned k) {
  return kron(kron(kron_power(ComplexMatrix::identity(2), a - k), sigma1()), kron_power(sigma3(), k - 1));
}

/// R(gamma_{2k+1}) = I_2^{(x)(a-k)} (x) sigma2 (x) sigma3^{(x)(k-1)}.
inline ComplexMatrix r_gamma_odd(unsigned a, unsigned k) {
  return kron(kron(kron_power(ComplexMatrix::identity(2), a - k), sigma2()), kron_power(sigma3(), k - 1));
}

}  // namespace clifford

/// Rate-1, four-group decodable CUWD for n_t = 2^a. Weights follow the
/// column-major table layout: group g holds A_{g*lambda+1} .. A_{(g+1)*lambda}.
struct CuwdDesign {
  unsigned a = 1;
  std::size_t lambda = 1;
  std::vector<ComplexMatrix> weights;

  std::size_t n_t() const noexcept { return std::size_t{1} << a; }
  std::size_t group_of(std::size_t index) const noexcept { return index / lambda; }
};

inline CuwdDesign cuwd_rate1_4group(unsigned a, int r_gamma1_sign = 1) {
  using namespace clifford;
  if (a < 1 || a > 3) throw Error(Errc::UnsupportedSize, "CUWD exponent must be 1, 2 or 3");
  if (r_gamma1_sign != 1 && r_gamma1_sign != -1) throw Error(Errc::InvalidConfig, "sign must be +1 or -1");
  CuwdDesign d;
  d.a = a;
  d.lambda = std::size_t{1} << (a - 1);
  const std::size_t n = d.n_t();

  // alpha_i = j R(gamma_{2i}) R(gamma_{2i+1}), i = 1 .. a-1
  std::vector<ComplexMatrix> alpha;
  for (unsigned i = 1; i < a; ++i) alpha.push_back(r_gamma_even(a, i) * r_gamma_odd(a, i) * kJ);

  // A_k = prod_i alpha_i^{k_i}, (k_1, ..., k_{a-1}) the bits of k-1, k_1 least significant.
  std::vector<ComplexMatrix> first_column;
  for (std::size_t k = 0; k < d.lambda; ++k) {
    ComplexMatrix prod = ComplexMatrix::identity(n);
    for (unsigned i = 0; i + 1 < a; ++i)
      if ((k >> i) & 1U) prod = prod * alpha[i];
    first_column.push_back(prod);
  }

  const std::vector<ComplexMatrix> first_row = {
      ComplexMatrix::identity(n),
      r_gamma1(a, r_gamma1_sign),
      r_gamma_odd(a, a),   // R(gamma_{2a+1})
      r_gamma_even(a, a),  // R(gamma_{2a})
  };
  for (std::size_t g = 0; g < 4; ++g)
    for (std::size_t k = 0; k < d.lambda; ++k) d.weights.push_back(first_column[k] * first_row[g]);
  return d;
}

inline LinearSTBC to_code(const CuwdDesign& d) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < d.weights.size(); ++i) labels.push_back("x" + std::to_string(i + 1));
  return make_code(d.n_t(), d.n_t(), d.weights, std::move(labels),
                   BlockOrthogonalProfile{1, 4, d.lambda});
}

// ---------------------------------------------------------------------------
// Coordinate interleaved orthogonal designs

/// Rate-1 CIOD for n_t = 2^a: S = diag(Theta_1, Theta_2) over the
/// interleaved symbols x~_i = x_iI + j x_{(i + K/2) mod K, Q}. Weights come in
/// pairs (x_iI, x_{(i+K/2) mod K, Q}), one pair per interleaved symbol.
struct CiodDesign {
  unsigned a = 1;
  std::size_t complex_symbols = 2;
  std::vector<ComplexMatrix> weights;
  std::vector<std::string> labels;

  std::size_t n_t() const noexcept { return std::size_t{1} << a; }
};

inline CiodDesign ciod(unsigned a) {
  if (a < 1 || a > 2) throw Error(Errc::UnsupportedSize, "CIOD exponent must be 1 or 2");
  CiodDesign d;
  d.a = a;
  const std::size_t n = d.n_t();
  const std::size_t half = n / 2;  // size of each Theta block
  d.complex_symbols = a == 1 ? 2 : 4;
  const std::size_t per_block = d.complex_symbols / 2;

  // Orthogonal design unit matrices for one Theta block: scalar for a = 1,
  // Alamouti for a = 2. Entry (m, unit) is the block for x~_m = unit.
  auto theta_unit = [&](std::size_t m, Complex unit) {
    if (a == 1) return ComplexMatrix(1, 1, unit);
    return m == 0 ? alamouti_matrix(unit, 0.0) : alamouti_matrix(0.0, unit);
  };

  for (std::size_t i = 0; i < d.complex_symbols; ++i) {
    const std::size_t block = i / per_block;
    const std::size_t m = i % per_block;
    const std::size_t partner = (i + d.complex_symbols / 2) % d.complex_symbols;
    for (Complex unit : {Complex(1.0), kJ}) {
      ComplexMatrix w(n, n);
      const ComplexMatrix theta = theta_unit(m, unit);
      for (std::size_t r = 0; r < half; ++r)
        for (std::size_t c = 0; c < half; ++c) w(block * half + r, block * half + c) = theta(r, c);
      d.weights.push_back(w);
    }
    d.labels.push_back("x" + std::to_string(i) + "I");
    d.labels.push_back("x" + std::to_string(partner) + "Q");
  }
  return d;
}

inline LinearSTBC to_code(const CiodDesign& d) {
  return make_code(d.n_t(), d.n_t(), d.weights, d.labels,
                   BlockOrthogonalProfile{1, d.weights.size(), 1});
}

// ---------------------------------------------------------------------------
// Block-orthogonal constructions

namespace detail {

inline std::vector<ComplexMatrix> append_left_multiplied(const std::vector<ComplexMatrix>& base,
                                                         const ComplexMatrix& m) {
  std::vector<ComplexMatrix> out = base;
  for (const auto& a : base) out.push_back(m * a);
  return out;
}

inline void require_square(const ComplexMatrix& m, std::size_t n) {
  if (m.rows() != n || m.cols() != n)
    throw Error(Errc::DimensionMismatch, "M must be " + std::to_string(n) + "x" + std::to_string(n));
}

inline std::vector<std::string> suffixed(const std::vector<std::string>& labels, const std::string& s) {
  std::vector<std::string> out;
  for (const auto& l : labels) out.push_back(l + s);
  return out;
}

}  // namespace detail

/// Construction I: X = X1(s_1..s_{4 lambda}) + M X1(s_{4 lambda+1}..s_{8 lambda})
/// for a rate-1 four-group CUWD X1. Declared profile (2, 4, lambda).
inline LinearSTBC construction_i(const CuwdDesign& x1, const ComplexMatrix& m) {
  detail::require_square(m, x1.n_t());
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < 8 * x1.lambda; ++i) labels.push_back("s" + std::to_string(i + 1));
  LinearSTBC code = make_code(x1.n_t(), x1.n_t(), detail::append_left_multiplied(x1.weights, m),
                              std::move(labels), BlockOrthogonalProfile{2, 4, x1.lambda});
  require_full_rank(code);
  return code;
}

/// A square design whose entries are complex-linear forms in complex
/// symbols: X = sum_k x_k C_k, no conjugates.
struct ComplexLinearDesign {
  std::size_t n = 1;
  std::vector<ComplexMatrix> coefficients;
  std::vector<std::string> symbol_names;
};

/// Construction II: weights A_i = C_i for x_iI and B_i = j A_i for x_iQ,
/// ordered {A_1, B_1, ..., A_K, B_K}. Declared profile (K, 2, 1).
inline LinearSTBC construction_ii(const ComplexLinearDesign& design) {
  if (design.coefficients.empty()) throw Error(Errc::DimensionMismatch, "empty design");
  if (design.symbol_names.size() != design.coefficients.size())
    throw Error(Errc::DimensionMismatch, "symbol name count");
  std::vector<ComplexMatrix> weights;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < design.coefficients.size(); ++i) {
    detail::require_square(design.coefficients[i], design.n);
    weights.push_back(design.coefficients[i]);
    weights.push_back(design.coefficients[i] * kJ);
    labels.push_back(design.symbol_names[i] + "I");
    labels.push_back(design.symbol_names[i] + "Q");
  }
  LinearSTBC code = make_code(design.n, design.n, std::move(weights), std::move(labels),
                              BlockOrthogonalProfile{design.coefficients.size(), 2, 1});
  require_full_rank(code);
  return code;
}

/// Golden code entries as complex-linear forms in s1..s4.
inline ComplexLinearDesign golden_cda_design() {
  using namespace golden;
  using M = ComplexMatrix;
  const Complex s(1.0 / kSqrt5);
  return {2,
          {
              M::from_rows({{kAlpha, 0}, {0, kAlphaBar}}) * s,
              M::from_rows({{kAlpha * kTheta, 0}, {0, kAlphaBar * kThetaBar}}) * s,
              M::from_rows({{0, kJ * kAlphaBar}, {kAlpha, 0}}) * s,
              M::from_rows({{0, kJ * kAlphaBar * kThetaBar}, {kAlpha * kTheta, 0}}) * s,
          },
          {"s1", "s2", "s3", "s4"}};
}

/// Diagonal 2x2 form of the cyclic algebra with gamma = j:
/// X = diag(x0 + zeta x1, x0 - zeta x1), zeta^2 = j.
inline ComplexLinearDesign diagonal_cda_design() {
  const Complex zeta = std::polar(1.0, std::numbers::pi / 4.0);
  return {2,
          {ComplexMatrix::identity(2), ComplexMatrix::from_rows({{zeta, 0}, {0, -zeta}})},
          {"x0", "x1"}};
}

/// The 1x1 design X = x0.
inline ComplexLinearDesign scalar_cda_design() { return {1, {ComplexMatrix::identity(1)}, {"x0"}}; }

/// True when the design's second half of weights is j times the first half
/// and the two halves are Hurwitz-Radon orthogonal to each other.
inline bool is_two_group_with_jb(const LinearSTBC& x1, double tol = 1e-12) {
  const std::size_t k2 = x1.k_real();
  if (k2 % 2 != 0) return false;
  const std::size_t k = k2 / 2;
  for (std::size_t i = 0; i < k; ++i)
    if (max_abs_diff(x1.weights[k + i], x1.weights[i] * kJ) > tol) return false;
  for (std::size_t l = 0; l < k; ++l)
    for (std::size_t m = k; m < k2; ++m) {
      const ComplexMatrix s = x1.weights[l] * x1.weights[m].adjoint() + x1.weights[m] * x1.weights[l].adjoint();
      if (s.max_abs() > tol) return false;
    }
  return true;
}

/// Diagonal half of the Golden code in (s1, s2), ordering [s1I, s2I, s1Q, s2Q].
inline LinearSTBC golden_diagonal_half() {
  using namespace golden;
  using M = ComplexMatrix;
  const Complex s(1.0 / kSqrt5);
  const M a1 = M::from_rows({{kAlpha, 0}, {0, kAlphaBar}}) * s;
  const M a2 = M::from_rows({{kAlpha * kTheta, 0}, {0, kAlphaBar * kThetaBar}}) * s;
  return make_code(2, 2, {a1, a2, a1 * kJ, a2 * kJ}, {"s1I", "s2I", "s1Q", "s2Q"},
                   BlockOrthogonalProfile{1, 2, 2});
}

inline ComplexMatrix golden_m_matrix() { return ComplexMatrix::from_rows({{0, kJ}, {1, 0}}); }

/// Construction III: X = X1(x_1..x_2K) + M X1(x_2K+1..x_4K) where X1 is
/// two-group decodable with B_i = j A_i. Declared profile (2, 2, K).
inline LinearSTBC construction_iii(const LinearSTBC& x1, const ComplexMatrix& m,
                                   std::optional<std::vector<std::string>> second_labels = std::nullopt) {
  validate(x1);
  if (x1.n_t != x1.t) throw Error(Errc::PremiseViolated, "X1 must be square");
  if (!is_two_group_with_jb(x1))
    throw Error(Errc::PremiseViolated, "X1 is not two-group decodable with B_i = j A_i");
  detail::require_square(m, x1.n_t);
  std::vector<std::string> labels = x1.labels;
  const auto tail = second_labels ? *second_labels : detail::suffixed(x1.labels, "'");
  if (tail.size() != x1.k_real()) throw Error(Errc::DimensionMismatch, "second-half label count");
  labels.insert(labels.end(), tail.begin(), tail.end());
  LinearSTBC code = make_code(x1.n_t, x1.t, detail::append_left_multiplied(x1.weights, m), std::move(labels),
                              BlockOrthogonalProfile{2, 2, x1.k_real() / 2});
  require_full_rank(code);
  return code;
}

/// Construction IV: X = X1(s_1..s_K) + M X1(s_K+1..s_2K) for a rate-1 CIOD
/// X1 with K real weights. Declared profile (2, K/2, 2).
inline LinearSTBC construction_iv(const CiodDesign& x1, const ComplexMatrix& m) {
  detail::require_square(m, x1.n_t());
  std::vector<std::string> labels = x1.labels;
  for (const auto& l : detail::suffixed(x1.labels, "'")) labels.push_back(l);
  LinearSTBC code = make_code(x1.n_t(), x1.n_t(), detail::append_left_multiplied(x1.weights, m),
                              std::move(labels), BlockOrthogonalProfile{2, x1.weights.size() / 2, 2});
  require_full_rank(code);
  return code;
}

inline ComplexMatrix srinath_rajan_m_matrix() {
  const Complex w = std::polar(1.0, std::numbers::pi / 4.0);
  return ComplexMatrix::from_rows({{0, w}, {w, 0}});
}

/// 4x4 M for Constructions I and IV at a = 2: the first complex Gaussian
/// draw of Rng(1), rounded to four decimals. Full rank for both.
inline ComplexMatrix a2_m_matrix() {
  using C = Complex;
  return ComplexMatrix::from_rows({
      {C(0.9283, 1.0719), C(-0.4951, -0.5632), C(0.3643, -1.0482), C(0.8068, 0.6950)},
      {C(0.8843, 0.1175), C(-1.4579, -0.5371), C(-0.1079, 0.8565), C(1.3226, 0.6135)},
      {C(0.8687, -0.5409), C(0.0862, 0.4783), C(-0.0071, -1.1187), C(-0.3614, -0.4833)},
      {C(0.7748, 0.3913), C(0.0013, 0.9331), C(-0.3055, 0.8290), C(-0.3787, 0.3033)},
  });
}

/// Codes addressable by id from configs and the CLI.
inline const std::vector<std::string>& shipped_code_ids() {
  static const std::vector<std::string> ids = {"alamouti",      "golden", "golden-cii", "golden-ciii", "bhv",
                                               "srinath-rajan", "ci-a2",  "civ-a1",     "civ-a2"};
  return ids;
}

inline LinearSTBC shipped_code(const std::string& id) {
  if (id == "alamouti") return alamouti_code();
  if (id == "golden") return golden_code();
  if (id == "golden-cii") return construction_ii(golden_cda_design());
  if (id == "golden-ciii") return construction_iii(golden_diagonal_half(), golden_m_matrix());
  if (id == "bhv") return bhv_code();
  if (id == "srinath-rajan") return srinath_rajan_code();
  if (id == "ci-a2") return construction_i(cuwd_rate1_4group(2), a2_m_matrix());
  if (id == "civ-a1") return construction_iv(ciod(1), srinath_rajan_m_matrix());
  if (id == "civ-a2") return construction_iv(ciod(2), a2_m_matrix());
  throw Error(Errc::InvalidConfig, "unknown code id '" + id + "'");
}

}  // namespace bostbc
