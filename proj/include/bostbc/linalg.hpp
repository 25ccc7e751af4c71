#pragma once

// Real/complex kernels: the check-expansion and interleaving operators,
// Kronecker products, and Gram-Schmidt QR.

#include <cmath>
#include <span>

#include "bostbc/error.hpp"
#include "bostbc/matrix.hpp"

namespace bostbc {

/// Replace each complex entry x by the real 2x2 block [[x_I, -x_Q], [x_Q, x_I]].
inline RealMatrix check_expand(const ComplexMatrix& m) {
  RealMatrix out(2 * m.rows(), 2 * m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const Complex x = m(i, j);
      out(2 * i, 2 * j) = x.real();
      out(2 * i, 2 * j + 1) = -x.imag();
      out(2 * i + 1, 2 * j) = x.imag();
      out(2 * i + 1, 2 * j + 1) = x.real();
    }
  return out;
}

/// [x1, ..., xn] -> [x1_I, x1_Q, ..., xn_I, xn_Q].
inline RealVector tilde_vec(std::span<const Complex> x) {
  RealVector out(2 * x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[2 * i] = x[i].real();
    out[2 * i + 1] = x[i].imag();
  }
  return out;
}

/// Inverse of tilde_vec.
inline ComplexVector untilde_vec(std::span<const double> x) {
  if (x.size() % 2 != 0) throw Error(Errc::DimensionMismatch, "untilde_vec needs even length");
  ComplexVector out(x.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = Complex(x[2 * i], x[2 * i + 1]);
  return out;
}

/// Column stacking, i.e. the column-major storage of the matrix.
template <typename T>
std::vector<T> vec(const Matrix<T>& m) {
  return {m.data().begin(), m.data().end()};
}

template <typename T>
Matrix<T> kron(const Matrix<T>& a, const Matrix<T>& b) {
  Matrix<T> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t ja = 0; ja < a.cols(); ++ja)
    for (std::size_t ia = 0; ia < a.rows(); ++ia) {
      const T s = a(ia, ja);
      for (std::size_t jb = 0; jb < b.cols(); ++jb)
        for (std::size_t ib = 0; ib < b.rows(); ++ib)
          out(ia * b.rows() + ib, ja * b.cols() + jb) = s * b(ib, jb);
    }
  return out;
}

/// Kronecker power m^{(x) n}; the empty power is the 1x1 identity.
template <typename T>
Matrix<T> kron_power(const Matrix<T>& m, unsigned n) {
  Matrix<T> out = Matrix<T>::identity(1);
  for (unsigned i = 0; i < n; ++i) out = kron(out, m);
  return out;
}

struct QrResult {
  RealMatrix q;  ///< orthonormal columns
  RealMatrix r;  ///< upper triangular, positive diagonal
};

/// Relative threshold below which a Gram-Schmidt residual counts as a
/// linearly dependent column.
inline constexpr double kRankTolerance = 1e-10;

/// Thin QR of a tall matrix by modified Gram-Schmidt. Produces the same R
/// as the classical recursion r(i,j) = <q_i, h_j>, r(j,j) = ||r_j||.
inline QrResult gram_schmidt_qr(const RealMatrix& h) {
  const std::size_t n = h.rows();
  const std::size_t k = h.cols();
  if (n < k) throw Error(Errc::RankDeficient, "more columns than rows");
  if (!h.is_finite()) throw Error(Errc::DimensionMismatch, "non-finite input to QR");

  double max_col_norm = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const auto c = h.column(j);
    max_col_norm = std::max(max_col_norm, std::sqrt(dot(c, c)));
  }
  const double tol = kRankTolerance * max_col_norm;

  QrResult out{h, RealMatrix(k, k)};
  RealMatrix& q = out.q;
  RealMatrix& r = out.r;
  for (std::size_t i = 0; i < k; ++i) {
    auto qi = q.column(i);
    const double norm = std::sqrt(dot(qi, qi));
    if (!(norm > tol) || max_col_norm == 0.0)
      throw Error(Errc::RankDeficient, "column " + std::to_string(i + 1) + " is linearly dependent");
    r(i, i) = norm;
    for (auto& v : qi) v /= norm;
    for (std::size_t j = i + 1; j < k; ++j) {
      auto vj = q.column(j);
      const double rij = dot(qi, vj);
      r(i, j) = rij;
      for (std::size_t l = 0; l < n; ++l) vj[l] -= rij * qi[l];
    }
  }
  return out;
}

/// Numeric rank by Gram-Schmidt with column pivot skipping: columns whose
/// residual falls under the relative tolerance are dropped.
inline std::size_t numeric_rank(const RealMatrix& m, double rel_tol = kRankTolerance) {
  double max_col_norm = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    const auto c = m.column(j);
    max_col_norm = std::max(max_col_norm, std::sqrt(dot(c, c)));
  }
  if (max_col_norm == 0.0) return 0;
  std::vector<RealVector> basis;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    RealVector v(m.column(j).begin(), m.column(j).end());
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        const double c = dot(b, v);
        for (std::size_t l = 0; l < v.size(); ++l) v[l] -= c * b[l];
      }
    const double norm = std::sqrt(dot(v, v));
    if (norm > rel_tol * max_col_norm) {
      for (auto& x : v) x /= norm;
      basis.push_back(std::move(v));
    }
  }
  return basis.size();
}

inline double trace(const RealMatrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i) s += m(i, i);
  return s;
}

/// 1/2 tr(H^ A_k^ A_j^T H^T), with ^ the check expansion. Equals the inner
/// product of the equivalent-channel columns belonging to A_k and A_j.
inline double trace_inner_product(const ComplexMatrix& h, const ComplexMatrix& a_k,
                                  const ComplexMatrix& a_j) {
  if (h.cols() != a_k.rows() || a_k.rows() != a_j.rows() || a_k.cols() != a_j.cols())
    throw Error(Errc::DimensionMismatch, "trace_inner_product");
  const RealMatrix hc = check_expand(h);
  return 0.5 * trace(hc * check_expand(a_k) * check_expand(a_j).transpose() * hc.transpose());
}

}  // namespace bostbc
