#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cohinfo/matrix.hpp"

namespace cohinfo {

/// Spectral decomposition of a Hermitian matrix. Eigenvalues are sorted in
/// descending order; eigenvector columns match that order.
struct EigenDecomposition {
  std::vector<double> eigenvalues;
  ComplexMatrix eigenvectors;
};

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// The input is symmetrized as (A+A†)/2 first and rejected only when the
/// Hermiticity defect exceeds 1e-6 relative to ||A||_F (tomography
/// reconstructions are Hermitian only up to noise). Sweeps stop when the
/// off-diagonal Frobenius norm falls below 1e-12*||A||_F, or after 100
/// sweeps.
inline EigenDecomposition hermitian_eig(const ComplexMatrix& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("hermitian_eig: matrix not square");
  if (!a.all_finite())
    throw std::invalid_argument("hermitian_eig: non-finite entries");
  const int n = a.rows();
  const double norm = a.frobenius_norm();
  if (hermiticity_defect(a) > 1e-6 * std::max(norm, 1e-300))
    throw std::invalid_argument("hermitian_eig: matrix is not Hermitian");

  ComplexMatrix m = hermitize(a);
  ComplexMatrix v = ComplexMatrix::identity(n);

  if (norm > 0.0) {
    const double stop = 1e-12 * norm;
    for (int sweep = 0; sweep < 100; ++sweep) {
      double off = 0.0;
      for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q) off += 2.0 * std::norm(m(p, q));
      if (std::sqrt(off) < stop) break;

      for (int p = 0; p < n; ++p) {
        for (int q = p + 1; q < n; ++q) {
          const cplx g = m(p, q);
          const double absg = std::abs(g);
          if (absg < 1e-300) continue;
          // Factor out the phase of the pivot, then a real Givens rotation.
          const cplx phase = g / absg;  // e^{i phi}
          const double alpha = m(p, p).real();
          const double beta = m(q, q).real();
          const double tau = (beta - alpha) / (2.0 * absg);
          const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(tau) + std::sqrt(1.0 + tau * tau));
          const double c = 1.0 / std::sqrt(1.0 + t * t);
          const double s = t * c;

          // Column rotation entries of the combined unitary:
          //   col_p' =  c*col_p - s*conj(phase)*col_q
          //   col_q' =  s*col_p + c*conj(phase)*col_q
          const cplx qp = -s * std::conj(phase);
          const cplx qq = c * std::conj(phase);
          for (int i = 0; i < n; ++i) {
            const cplx mp = m(i, p), mq = m(i, q);
            m(i, p) = c * mp + qp * mq;
            m(i, q) = s * mp + qq * mq;
            const cplx vp = v(i, p), vq = v(i, q);
            v(i, p) = c * vp + qp * vq;
            v(i, q) = s * vp + qq * vq;
          }
          for (int j = 0; j < n; ++j) {
            const cplx mp = m(p, j), mq = m(q, j);
            m(p, j) = c * mp + std::conj(qp) * mq;
            m(q, j) = s * mp + std::conj(qq) * mq;
          }
          m(p, p) = m(p, p).real();
          m(q, q) = m(q, q).real();
          m(p, q) = 0.0;
          m(q, p) = 0.0;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&m](int i, int j) { return m(i, i).real() > m(j, j).real(); });

  EigenDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors = ComplexMatrix(n, n);
  for (int k = 0; k < n; ++k) {
    out.eigenvalues[k] = m(order[k], order[k]).real();
    for (int i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

/// Eigenvalues only, descending.
inline std::vector<double> hermitian_eigenvalues(const ComplexMatrix& a) {
  return hermitian_eig(a).eigenvalues;
}

}  // namespace cohinfo
