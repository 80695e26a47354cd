#pragma once

#include <complex>
#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace cohinfo {

using cplx = std::complex<double>;

/// Hard cap on any matrix side. Everything in this library lives in small
/// Hilbert spaces; hitting this limit signals misuse, not a resource problem.
inline constexpr int kMaxDim = 64;

/// Dense complex matrix, row-major. The substrate for states, Kraus
/// operators and isometries.
class ComplexMatrix {
 public:
  ComplexMatrix() : rows_(0), cols_(0) {}

  ComplexMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows <= 0 || cols <= 0)
      throw std::invalid_argument("ComplexMatrix: dimensions must be positive");
    if (rows > kMaxDim || cols > kMaxDim)
      throw std::invalid_argument("ComplexMatrix: dimension exceeds limit " +
                                  std::to_string(kMaxDim));
    a_.assign(static_cast<std::size_t>(rows) * cols, cplx(0.0, 0.0));
  }

  static ComplexMatrix identity(int n) {
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  cplx& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  const cplx& operator()(int i, int j) const {
    return a_[static_cast<std::size_t>(i) * cols_ + j];
  }

  const std::vector<cplx>& data() const { return a_; }

  bool all_finite() const {
    for (const cplx& z : a_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  ComplexMatrix& operator*=(cplx s) {
    for (cplx& z : a_) z *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_)
      throw std::invalid_argument("ComplexMatrix: inner dimensions do not match");
    ComplexMatrix c(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i) {
      for (int k = 0; k < a.cols_; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx(0.0, 0.0)) continue;
        for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    }
    return c;
  }

  cplx trace() const {
    if (rows_ != cols_) throw std::invalid_argument("trace: matrix not square");
    cplx t = 0.0;
    for (int i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const cplx& z : a_) s += std::norm(z);
    return std::sqrt(s);
  }

 private:
  void require_same_shape(const ComplexMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw std::invalid_argument("ComplexMatrix: shape mismatch");
  }

  int rows_, cols_;
  std::vector<cplx> a_;
};

inline ComplexMatrix adjoint(const ComplexMatrix& a) {
  ComplexMatrix r(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r(j, i) = std::conj(a(i, j));
  return r;
}

/// Kronecker product; block (i,j) of the result equals a(i,j)*b.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const long rr = static_cast<long>(a.rows()) * b.rows();
  const long cc = static_cast<long>(a.cols()) * b.cols();
  if (rr > kMaxDim || cc > kMaxDim)
    throw std::invalid_argument("kron: result dimension exceeds limit " +
                                std::to_string(kMaxDim));
  ComplexMatrix r(static_cast<int>(rr), static_cast<int>(cc));
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      if (aij == cplx(0.0, 0.0)) continue;
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l)
          r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return r;
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

inline double hermiticity_defect(const ComplexMatrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) s += std::norm(a(i, j) - std::conj(a(j, i)));
  return std::sqrt(s);
}

inline ComplexMatrix hermitize(const ComplexMatrix& a) {
  ComplexMatrix m(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
  return m;
}

/// Gaussian elimination with partial pivoting. Small systems only.
inline ComplexMatrix invert(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("invert: matrix not square");
  const int n = a.rows();
  ComplexMatrix m = a;
  ComplexMatrix inv = ComplexMatrix::identity(n);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(m(col, col));
    for (int r = col + 1; r < n; ++r)
      if (std::abs(m(r, col)) > best) { best = std::abs(m(r, col)); piv = r; }
    if (best < 1e-300) throw std::runtime_error("invert: singular matrix");
    if (piv != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(m(piv, j), m(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    }
    const cplx d = m(col, col);
    for (int j = 0; j < n; ++j) { m(col, j) /= d; inv(col, j) /= d; }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const cplx f = m(r, col);
      if (f == cplx(0.0, 0.0)) continue;
      for (int j = 0; j < n; ++j) {
        m(r, j) -= f * m(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

}  // namespace cohinfo
