#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <type_traits>
#include <vector>

#include "bostbc/error.hpp"

namespace bostbc {

using Complex = std::complex<double>;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

/// Dense column-major matrix. Sizes in this library never exceed a few
/// dozen rows, so storage is a plain vector.
template <typename T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  /// Row-major literal, e.g. `Matrix<double>::from_rows({{1, 2}, {3, 4}})`.
  static Matrix from_rows(std::initializer_list<std::initializer_list<T>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != c) throw Error(Errc::DimensionMismatch, "ragged matrix literal");
      std::size_t j = 0;
      for (const auto& v : row) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  static Matrix diagonal(std::span<const T> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  /// Column-major storage; this is exactly vec(*this).
  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  std::span<T> column(std::size_t j) { return std::span<T>(data_).subspan(j * rows_, rows_); }
  std::span<const T> column(std::size_t j) const {
    return std::span<const T>(data_).subspan(j * rows_, rows_);
  }

  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) throw Error(Errc::DimensionMismatch, "block out of range");
    Matrix out(nr, nc);
    for (std::size_t j = 0; j < nc; ++j)
      for (std::size_t i = 0; i < nr; ++i) out(i, j) = (*this)(r0 + i, c0 + j);
    return out;
  }

  Matrix transpose() const {
    Matrix out(cols_, rows_);
    for (std::size_t j = 0; j < cols_; ++j)
      for (std::size_t i = 0; i < rows_; ++i) out(j, i) = (*this)(i, j);
    return out;
  }

  /// Conjugate transpose; plain transpose for real T.
  Matrix adjoint() const {
    Matrix out(cols_, rows_);
    for (std::size_t j = 0; j < cols_; ++j)
      for (std::size_t i = 0; i < rows_; ++i) {
        if constexpr (is_complex<T>::value)
          out(j, i) = std::conj((*this)(i, j));
        else
          out(j, i) = (*this)(i, j);
      }
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, static_cast<double>(std::abs(v)));
    return m;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return std::sqrt(s);
  }

  bool is_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](const T& v) {
      if constexpr (is_complex<T>::value)
        return std::isfinite(v.real()) && std::isfinite(v.imag());
      else
        return std::isfinite(v);
    });
  }

  Matrix& operator+=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Matrix& operator*=(const T& s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator-(Matrix a) { return a *= T{-1}; }
  friend Matrix operator*(Matrix a, const T& s) { return a *= s; }
  friend Matrix operator*(const T& s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw Error(Errc::DimensionMismatch, "matrix product");
    Matrix out(a.rows_, b.cols_);
    for (std::size_t j = 0; j < b.cols_; ++j)
      for (std::size_t l = 0; l < a.cols_; ++l) {
        const T blj = b(l, j);
        for (std::size_t i = 0; i < a.rows_; ++i) out(i, j) += a(i, l) * blj;
      }
    return out;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  void require_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(Errc::DimensionMismatch, "shape mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<Complex>;
using RealVector = std::vector<double>;
using ComplexVector = std::vector<Complex>;

/// Boolean support pattern of a square matrix; true marks a structural zero.
using ZeroPattern = Matrix<unsigned char>;

template <typename T>
double max_abs_diff(const Matrix<T>& a, const Matrix<T>& b) {
  return (a - b).max_abs();
}

inline RealMatrix real_part(const ComplexMatrix& m) {
  RealMatrix out(m.rows(), m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) out(i, j) = m(i, j).real();
  return out;
}

inline RealVector matvec(const RealMatrix& m, std::span<const double> x) {
  if (m.cols() != x.size()) throw Error(Errc::DimensionMismatch, "matvec");
  RealVector out(m.rows(), 0.0);
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) out[i] += m(i, j) * x[j];
  return out;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace bostbc
