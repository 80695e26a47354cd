#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cohinfo/matrix.hpp"
#include "cohinfo/states.hpp"

namespace cohinfo {

/// CPTP map in operator-sum form: rho -> sum_i K_i rho K_i†.
/// Operators with negligible norm are pruned so the environment dimension
/// stays minimal after compositions.
struct KrausChannel {
  std::vector<ComplexMatrix> ops;
  int d_in = 0;
  int d_out = 0;

  KrausChannel() = default;

  KrausChannel(std::vector<ComplexMatrix> kraus_ops, int din, int dout)
      : d_in(din), d_out(dout) {
    if (din <= 0 || dout <= 0)
      throw std::invalid_argument("KrausChannel: dimensions must be positive");
    if (kraus_ops.empty())
      throw std::invalid_argument("KrausChannel: needs at least one Kraus operator");
    for (ComplexMatrix& k : kraus_ops) {
      if (k.rows() != dout || k.cols() != din)
        throw std::invalid_argument("KrausChannel: operator shape mismatch");
      if (k.frobenius_norm() >= 1e-12) ops.push_back(std::move(k));
    }
    if (ops.empty())
      throw std::invalid_argument("KrausChannel: all operators are numerically zero");
    ComplexMatrix sum(din, din);
    for (const ComplexMatrix& k : ops) sum += adjoint(k) * k;
    sum -= ComplexMatrix::identity(din);
    if (sum.frobenius_norm() > 1e-9)
      throw std::invalid_argument("KrausChannel: completeness sum_i K_i† K_i != I");
  }

  int env_dim() const { return static_cast<int>(ops.size()); }
};

/// CPTP map in Stinespring form: rho -> Tr_env(G rho G†), with G a
/// (d_out*d_env) x d_in isometry. Row ordering is output-major: row index
/// b*d_env + e addresses |b>_out (x) |e>_env.
struct IsometryChannel {
  ComplexMatrix g;
  int d_in = 0;
  int d_out = 0;
  int d_env = 0;

  IsometryChannel() = default;

  IsometryChannel(ComplexMatrix isometry, int din, int dout, int denv)
      : g(std::move(isometry)), d_in(din), d_out(dout), d_env(denv) {
    if (din <= 0 || dout <= 0 || denv <= 0)
      throw std::invalid_argument("IsometryChannel: dimensions must be positive");
    if (g.rows() != dout * denv || g.cols() != din)
      throw std::invalid_argument("IsometryChannel: isometry shape mismatch");
    ComplexMatrix gram = adjoint(g) * g;
    gram -= ComplexMatrix::identity(din);
    if (gram.frobenius_norm() > 1e-9)
      throw std::invalid_argument("IsometryChannel: G†G != I");
  }
};

/// Normalized Choi state of a channel, on dims [d_in, d_out].
struct ChoiMatrix {
  DensityMatrix mat;
  int d_in = 0;
  int d_out = 0;

  ChoiMatrix() = default;

  ChoiMatrix(DensityMatrix m, int din, int dout) : mat(std::move(m)), d_in(din), d_out(dout) {
    if (mat.dims != std::vector<int>{din, dout})
      throw std::invalid_argument("ChoiMatrix: dims must be [d_in, d_out]");
    // Trace-preservation witness: Tr_out(C) = I/d_in.
    const DensityMatrix marg = partial_trace(mat, {0});
    ComplexMatrix delta = marg.mat;
    delta -= ComplexMatrix::identity(din) * cplx(1.0 / din, 0.0);
    if (delta.frobenius_norm() > 1e-8)
      throw std::invalid_argument("ChoiMatrix: trace-preservation witness violated");
  }
};

// ---------------------------------------------------------------------------
// Constructors for the concrete channels.

/// Platypus channel isometry: column 0 is the uniform entangled branch
/// sum_i |i>(x)|i>/sqrt(d-1) over i < d-1; column j (j >= 1) maps to the
/// classical flag |d-1>(x)|j-1>.
inline IsometryChannel platypus(int d) {
  if (d < 3) throw std::invalid_argument("platypus: requires d >= 3");
  const int denv = d - 1;
  ComplexMatrix g(d * denv, d);
  const double amp = 1.0 / std::sqrt(static_cast<double>(d - 1));
  for (int i = 0; i < d - 1; ++i) g(i * denv + i, 0) = amp;
  for (int j = 1; j < d; ++j) g((d - 1) * denv + (j - 1), j) = 1.0;
  return IsometryChannel(std::move(g), d, d, denv);
}

/// Qubit amplitude damping: K0 = |0><0| + sqrt(1-gamma)|1><1|,
/// K1 = sqrt(gamma)|0><1|.
inline KrausChannel amplitude_damping(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("amplitude_damping: gamma outside [0, 1]");
  ComplexMatrix k0(2, 2), k1(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - gamma);
  k1(0, 1) = std::sqrt(gamma);
  return KrausChannel({std::move(k0), std::move(k1)}, 2, 2);
}

inline KrausChannel identity_channel(int d) {
  if (d < 1) throw std::invalid_argument("identity_channel: d must be positive");
  return KrausChannel({ComplexMatrix::identity(d)}, d, d);
}

/// Erasure channel: with probability p the input is replaced by the flag
/// state |d> on a (d+1)-dimensional output.
inline KrausChannel erasure(double p, int d) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("erasure: p outside [0, 1]");
  if (d < 2) throw std::invalid_argument("erasure: requires d >= 2");
  std::vector<ComplexMatrix> ops;
  ComplexMatrix keep(d + 1, d);
  for (int i = 0; i < d; ++i) keep(i, i) = std::sqrt(1.0 - p);
  ops.push_back(std::move(keep));
  for (int j = 0; j < d; ++j) {
    ComplexMatrix flag(d + 1, d);
    flag(d, j) = std::sqrt(p);
    ops.push_back(std::move(flag));
  }
  return KrausChannel(std::move(ops), d, d + 1);
}

/// Depolarizing channel (1-p) rho + p I/d via d^2 weighted generalized-Pauli
/// operators X^a Z^b.
inline KrausChannel depolarizing(double p, int d) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("depolarizing: p outside [0, 1]");
  if (d < 2) throw std::invalid_argument("depolarizing: requires d >= 2");
  const double two_pi = 6.283185307179586476925286766559;
  std::vector<ComplexMatrix> ops;
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      const double w = (a == 0 && b == 0) ? std::sqrt(1.0 - p + p / (d * d))
                                          : std::sqrt(p) / d;
      ComplexMatrix k(d, d);
      for (int j = 0; j < d; ++j) {
        const double phase = two_pi * b * j / d;
        k((j + a) % d, j) = w * cplx(std::cos(phase), std::sin(phase));
      }
      ops.push_back(std::move(k));
    }
  }
  return KrausChannel(std::move(ops), d, d);
}

// ---------------------------------------------------------------------------
// Representation conversions.

inline KrausChannel to_kraus(const IsometryChannel& iso) {
  std::vector<ComplexMatrix> ops;
  ops.reserve(iso.d_env);
  for (int e = 0; e < iso.d_env; ++e) {
    ComplexMatrix k(iso.d_out, iso.d_in);
    for (int b = 0; b < iso.d_out; ++b)
      for (int a = 0; a < iso.d_in; ++a) k(b, a) = iso.g(b * iso.d_env + e, a);
    ops.push_back(std::move(k));
  }
  return KrausChannel(std::move(ops), iso.d_in, iso.d_out);
}

/// Canonical dilation G = sum_i K_i (x) |i>_env.
inline IsometryChannel to_isometry(const KrausChannel& ch) {
  const int denv = ch.env_dim();
  ComplexMatrix g(ch.d_out * denv, ch.d_in);
  for (int e = 0; e < denv; ++e)
    for (int b = 0; b < ch.d_out; ++b)
      for (int a = 0; a < ch.d_in; ++a) g(b * denv + e, a) = ch.ops[e](b, a);
  return IsometryChannel(std::move(g), ch.d_in, ch.d_out, denv);
}

// ---------------------------------------------------------------------------
// Application.

/// Operator-sum action on an arbitrary matrix (not necessarily a state).
inline ComplexMatrix apply_to_matrix(const KrausChannel& ch, const ComplexMatrix& x) {
  if (x.rows() != ch.d_in || x.cols() != ch.d_in)
    throw std::invalid_argument("apply: input dimension mismatch");
  ComplexMatrix out(ch.d_out, ch.d_out);
  for (const ComplexMatrix& k : ch.ops) out += k * x * adjoint(k);
  return out;
}

inline DensityMatrix apply(const KrausChannel& ch, const DensityMatrix& rho) {
  if (rho.dim() != ch.d_in)
    throw std::invalid_argument("apply: input dimension mismatch");
  return DensityMatrix::unchecked(hermitize(apply_to_matrix(ch, rho.mat)), {ch.d_out});
}

/// Stinespring-route action: form G rho G† on output (x) environment and
/// trace out the environment. Intentionally a separate code path from the
/// operator-sum route; the two must agree.
inline DensityMatrix apply(const IsometryChannel& iso, const DensityMatrix& rho) {
  if (rho.dim() != iso.d_in)
    throw std::invalid_argument("apply: input dimension mismatch");
  const ComplexMatrix big = iso.g * rho.mat * adjoint(iso.g);
  const DensityMatrix joint =
      DensityMatrix::unchecked(hermitize(big), {iso.d_out, iso.d_env});
  return partial_trace(joint, {0});
}

// ---------------------------------------------------------------------------
// Complementary channel, tensor product, Choi matrix.

/// Complementary channel from operator-sum form. With the canonical dilation
/// G = sum_i K_i (x) |i>_env, the complement's Kraus operators are
/// (L_b)_{e,a} = (K_e)_{b,a} for b = 0..d_out-1; its output dimension equals
/// the number of Kraus operators. Complements are unique only up to an
/// environment isometry, so callers should compare spectra or entropies,
/// never raw matrices.
inline KrausChannel complementary(const KrausChannel& ch) {
  const int denv = ch.env_dim();
  std::vector<ComplexMatrix> ops;
  ops.reserve(ch.d_out);
  for (int b = 0; b < ch.d_out; ++b) {
    ComplexMatrix l(denv, ch.d_in);
    for (int e = 0; e < denv; ++e)
      for (int a = 0; a < ch.d_in; ++a) l(e, a) = ch.ops[e](b, a);
    ops.push_back(std::move(l));
  }
  return KrausChannel(std::move(ops), ch.d_in, denv);
}

/// Complementary channel from Stinespring form: swap the roles of output
/// and environment in the dilation. Independent route from the Kraus one.
inline KrausChannel complementary(const IsometryChannel& iso) {
  ComplexMatrix swapped(iso.d_env * iso.d_out, iso.d_in);
  for (int b = 0; b < iso.d_out; ++b)
    for (int e = 0; e < iso.d_env; ++e)
      for (int a = 0; a < iso.d_in; ++a)
        swapped(e * iso.d_out + b, a) = iso.g(b * iso.d_env + e, a);
  return to_kraus(IsometryChannel(std::move(swapped), iso.d_in, iso.d_env, iso.d_out));
}

/// Parallel use of two channels; Kraus set {K_i (x) L_j}, subsystem order
/// [ch1, ch2] on both input and output. The environment index of the
/// canonical dilation orders as [env1, env2] (i-major), which makes
/// complementary(tensor(a, b)) and tensor(complementary(a), complementary(b))
/// agree entrywise, not just up to isometry.
inline KrausChannel tensor(const KrausChannel& a, const KrausChannel& b) {
  std::vector<ComplexMatrix> ops;
  ops.reserve(a.ops.size() * b.ops.size());
  for (const ComplexMatrix& ka : a.ops)
    for (const ComplexMatrix& kb : b.ops) ops.push_back(kron(ka, kb));
  return KrausChannel(std::move(ops), a.d_in * b.d_in, a.d_out * b.d_out);
}

/// Normalized Choi state: (I (x) ch) applied to the maximally entangled
/// state on d_in^2.
inline ChoiMatrix choi(const KrausChannel& ch) {
  const int d = ch.d_in;
  std::vector<cplx> omega(static_cast<std::size_t>(d) * d, cplx(0.0, 0.0));
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (int i = 0; i < d; ++i) omega[static_cast<std::size_t>(i) * d + i] = amp;
  const DensityMatrix omega_state = density_from_pure(PureState(std::move(omega), {d, d}));
  const KrausChannel extended = tensor(identity_channel(d), ch);
  DensityMatrix c = apply(extended, omega_state).reshaped({d, ch.d_out});
  return ChoiMatrix(std::move(c), d, ch.d_out);
}

/// State fidelity between two normalized Choi matrices.
inline double process_fidelity(const ChoiMatrix& a, const ChoiMatrix& b) {
  if (a.d_in != b.d_in || a.d_out != b.d_out)
    throw std::invalid_argument("process_fidelity: dimension mismatch");
  return fidelity(a.mat, b.mat);
}

}  // namespace cohinfo
