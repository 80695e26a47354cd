#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cohinfo/eig.hpp"
#include "cohinfo/matrix.hpp"

namespace cohinfo {

namespace detail {
inline int product(const std::vector<int>& dims) {
  int p = 1;
  for (int d : dims) {
    if (d <= 0) throw std::invalid_argument("subsystem dimensions must be positive");
    p *= d;
  }
  return p;
}
}  // namespace detail

/// Hermitian, unit-trace, positive semidefinite matrix with subsystem
/// dimension labels. Hermiticity and trace are checked on construction;
/// positivity is enforced where spectra are actually computed.
struct DensityMatrix {
  ComplexMatrix mat;
  std::vector<int> dims;

  DensityMatrix() = default;

  DensityMatrix(ComplexMatrix m, std::vector<int> subsystem_dims)
      : mat(std::move(m)), dims(std::move(subsystem_dims)) {
    if (mat.rows() != mat.cols())
      throw std::invalid_argument("DensityMatrix: matrix not square");
    if (detail::product(dims) != mat.rows())
      throw std::invalid_argument("DensityMatrix: dims product does not match size");
    if (!mat.all_finite())
      throw std::invalid_argument("DensityMatrix: non-finite entries");
    const double scale = std::max(1.0, mat.frobenius_norm());
    if (hermiticity_defect(mat) > 1e-9 * scale)
      throw std::invalid_argument("DensityMatrix: not Hermitian");
    if (std::abs(mat.trace() - cplx(1.0, 0.0)) > 1e-9)
      throw std::invalid_argument("DensityMatrix: trace differs from 1");
  }

  /// Bypass validation. For internal hot paths that construct states known
  /// to be valid, and for tests probing error handling downstream.
  static DensityMatrix unchecked(ComplexMatrix m, std::vector<int> subsystem_dims) {
    DensityMatrix d;
    d.mat = std::move(m);
    d.dims = std::move(subsystem_dims);
    return d;
  }

  int dim() const { return mat.rows(); }

  /// Same matrix, relabeled subsystem structure.
  DensityMatrix reshaped(std::vector<int> new_dims) const {
    if (detail::product(new_dims) != dim())
      throw std::invalid_argument("reshaped: dims product does not match size");
    return unchecked(mat, std::move(new_dims));
  }
};

/// State vector with subsystem dimension labels; unit norm.
struct PureState {
  std::vector<cplx> vec;
  std::vector<int> dims;

  PureState() = default;

  PureState(std::vector<cplx> amplitudes, std::vector<int> subsystem_dims)
      : vec(std::move(amplitudes)), dims(std::move(subsystem_dims)) {
    if (detail::product(dims) != static_cast<int>(vec.size()))
      throw std::invalid_argument("PureState: dims product does not match size");
    double n = 0.0;
    for (const cplx& z : vec) n += std::norm(z);
    if (std::abs(std::sqrt(n) - 1.0) > 1e-10)
      throw std::invalid_argument("PureState: vector is not normalized");
  }

  int dim() const { return static_cast<int>(vec.size()); }
};

inline DensityMatrix density_from_pure(const PureState& psi) {
  ComplexMatrix m(psi.dim(), psi.dim());
  for (int i = 0; i < psi.dim(); ++i)
    for (int j = 0; j < psi.dim(); ++j) m(i, j) = psi.vec[i] * std::conj(psi.vec[j]);
  return DensityMatrix::unchecked(std::move(m), psi.dims);
}

inline DensityMatrix kron(const DensityMatrix& a, const DensityMatrix& b) {
  std::vector<int> dims = a.dims;
  dims.insert(dims.end(), b.dims.begin(), b.dims.end());
  return DensityMatrix::unchecked(kron(a.mat, b.mat), std::move(dims));
}

/// Shannon entropy (base 2) of a spectrum; eigenvalues below the 1e-12
/// clamp contribute nothing, anything below -1e-9 signals an invalid state.
inline double entropy_of_spectrum(const std::vector<double>& eigenvalues) {
  double s = 0.0;
  for (double lam : eigenvalues) {
    if (lam < -1e-9)
      throw std::invalid_argument("entropy: eigenvalue below -1e-9, state is not PSD");
    if (lam > 1e-12) s -= lam * std::log2(lam);
  }
  return s;
}

/// Von Neumann entropy in bits.
inline double von_neumann_entropy(const DensityMatrix& rho) {
  return entropy_of_spectrum(hermitian_eigenvalues(rho.mat));
}

/// Reduced state on the kept subsystems (indices into rho.dims, any order;
/// output subsystems follow ascending index order).
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::vector<int> keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  const int k = static_cast<int>(rho.dims.size());
  for (int idx : keep)
    if (idx < 0 || idx >= k)
      throw std::invalid_argument("partial_trace: subsystem index out of range");

  std::vector<int> strides(k);
  int stride = 1;
  for (int s = k - 1; s >= 0; --s) {
    strides[s] = stride;
    stride *= rho.dims[s];
  }

  std::vector<int> kept = keep, traced;
  for (int s = 0; s < k; ++s)
    if (!std::binary_search(kept.begin(), kept.end(), s)) traced.push_back(s);

  std::vector<int> kept_dims, traced_dims;
  int dk = 1, dt = 1;
  for (int s : kept) { kept_dims.push_back(rho.dims[s]); dk *= rho.dims[s]; }
  for (int s : traced) { traced_dims.push_back(rho.dims[s]); dt *= rho.dims[s]; }

  auto offset = [&](const std::vector<int>& subsystems, const std::vector<int>& sub_dims,
                    int flat) {
    int off = 0;
    for (int s = static_cast<int>(subsystems.size()) - 1; s >= 0; --s) {
      off += (flat % sub_dims[s]) * strides[subsystems[s]];
      flat /= sub_dims[s];
    }
    return off;
  };

  ComplexMatrix out(dk, dk);
  for (int i = 0; i < dk; ++i) {
    const int oi = offset(kept, kept_dims, i);
    for (int j = 0; j < dk; ++j) {
      const int oj = offset(kept, kept_dims, j);
      cplx acc = 0.0;
      for (int t = 0; t < dt; ++t) {
        const int ot = offset(traced, traced_dims, t);
        acc += rho.mat(oi + ot, oj + ot);
      }
      out(i, j) = acc;
    }
  }
  return DensityMatrix::unchecked(std::move(out), kept_dims);
}

/// Canonical purification |psi> = sum_i sqrt(lambda_i) |v_i> (x) |i> on
/// dims [d, rank], rank counting eigenvalues above 1e-12.
inline PureState purify(const DensityMatrix& rho) {
  const EigenDecomposition ed = hermitian_eig(rho.mat);
  const int d = rho.dim();
  int rank = 0;
  for (double lam : ed.eigenvalues) {
    if (lam < -1e-9)
      throw std::invalid_argument("purify: eigenvalue below -1e-9, state is not PSD");
    if (lam > 1e-12) ++rank;
  }
  rank = std::max(rank, 1);
  std::vector<cplx> vec(static_cast<std::size_t>(d) * rank, cplx(0.0, 0.0));
  for (int r = 0; r < rank; ++r) {
    const double w = std::sqrt(std::max(ed.eigenvalues[r], 0.0));
    for (int i = 0; i < d; ++i) vec[static_cast<std::size_t>(i) * rank + r] = w * ed.eigenvectors(i, r);
  }
  // Renormalize away the clamp residue.
  double n = 0.0;
  for (const cplx& z : vec) n += std::norm(z);
  n = std::sqrt(n);
  for (cplx& z : vec) z /= n;
  return PureState(std::move(vec), {d, rank});
}

/// Uhlmann fidelity F = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, in [0,1].
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim())
    throw std::invalid_argument("fidelity: dimension mismatch");
  const EigenDecomposition ed = hermitian_eig(rho.mat);
  const int d = rho.dim();
  ComplexMatrix sqrt_rho(d, d);
  for (int k = 0; k < d; ++k) {
    const double w = std::sqrt(std::max(ed.eigenvalues[k], 0.0));
    if (w == 0.0) continue;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        sqrt_rho(i, j) += w * ed.eigenvectors(i, k) * std::conj(ed.eigenvectors(j, k));
  }
  const ComplexMatrix inner = sqrt_rho * sigma.mat * sqrt_rho;
  double root_sum = 0.0;
  for (double lam : hermitian_eigenvalues(hermitize(inner)))
    root_sum += std::sqrt(std::max(lam, 0.0));
  return std::clamp(root_sum * root_sum, 0.0, 1.0);
}

namespace detail {
inline void require_unit_interval(double x, const char* name) {
  if (!(x >= -1e-12 && x <= 1.0 + 1e-12))
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
}
inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }
}  // namespace detail

/// Qutrit family (1-u)|0><0| + u|2><2|.
inline DensityMatrix family_rho_u(double u) {
  detail::require_unit_interval(u, "u");
  u = detail::clamp01(u);
  ComplexMatrix m(3, 3);
  m(0, 0) = 1.0 - u;
  m(2, 2) = u;
  return DensityMatrix::unchecked(std::move(m), {3});
}

/// Two-subsystem family (1-w)|00><00| + w|xi><xi| on dims [3,2], with
/// |xi> = sqrt(1-v)|20> + sqrt(v)|11>.
inline DensityMatrix family_rho_wv(double w, double v) {
  detail::require_unit_interval(w, "w");
  detail::require_unit_interval(v, "v");
  w = detail::clamp01(w);
  v = detail::clamp01(v);
  ComplexMatrix m(6, 6);
  m(0, 0) = 1.0 - w;  // |00>, index 2*i + j
  std::vector<cplx> xi(6, cplx(0.0, 0.0));
  xi[4] = std::sqrt(1.0 - v);  // |20>
  xi[3] = std::sqrt(v);        // |11>
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) m(i, j) += w * xi[i] * std::conj(xi[j]);
  return DensityMatrix::unchecked(std::move(m), {3, 2});
}

/// Three-parameter family r1|00><00| + r2|01><01| + (1-r1-r2)|phi><phi| on
/// dims [3,2], with |phi> = sqrt(1-r3)|20> + sqrt(r3)|11>.
inline DensityMatrix family_rho_r(double r1, double r2, double r3) {
  if (r1 < -1e-12 || r2 < -1e-12 || r1 + r2 > 1.0 + 1e-12)
    throw std::invalid_argument("family_rho_r: (r1, r2) outside the simplex");
  detail::require_unit_interval(r3, "r3");
  r1 = detail::clamp01(r1);
  r2 = detail::clamp01(r2);
  r3 = detail::clamp01(r3);
  const double rp = std::max(1.0 - r1 - r2, 0.0);
  ComplexMatrix m(6, 6);
  m(0, 0) = r1;
  m(1, 1) = r2;
  std::vector<cplx> phi(6, cplx(0.0, 0.0));
  phi[4] = std::sqrt(1.0 - r3);
  phi[3] = std::sqrt(r3);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) m(i, j) += rp * phi[i] * std::conj(phi[j]);
  return DensityMatrix::unchecked(std::move(m), {3, 2});
}

}  // namespace cohinfo
