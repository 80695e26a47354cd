#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cohinfo/channels.hpp"
#include "cohinfo/matrix.hpp"
#include "cohinfo/rng.hpp"
#include "cohinfo/states.hpp"

namespace cohinfo {

/// One complete projective measurement: an orthonormal basis of the space.
struct MeasurementSetting {
  std::vector<std::vector<cplx>> basis;  // d unit vectors
};

/// Informationally complete measurement collection. The first basis vector
/// of each setting doubles as a probe direction for process tomography.
struct ProjectorSet {
  int dim = 0;
  std::vector<MeasurementSetting> settings;

  int setting_count() const { return static_cast<int>(settings.size()); }

  const std::vector<cplx>& probe_direction(int k) const { return settings[k].basis[0]; }

  ComplexMatrix projector(int setting, int outcome) const {
    const std::vector<cplx>& v = settings[setting].basis[outcome];
    ComplexMatrix p(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) p(i, j) = v[i] * std::conj(v[j]);
    return p;
  }
};

namespace detail {

/// Orthonormal basis whose first element is the given direction;
/// deterministic Gram-Schmidt against the computational basis.
inline MeasurementSetting complete_setting(const std::vector<cplx>& direction, int d) {
  MeasurementSetting setting;
  setting.basis.push_back(direction);
  for (int cand = 0; cand < d && static_cast<int>(setting.basis.size()) < d; ++cand) {
    std::vector<cplx> v(d, cplx(0.0, 0.0));
    v[cand] = 1.0;
    for (const std::vector<cplx>& prev : setting.basis) {
      cplx overlap = 0.0;
      for (int i = 0; i < d; ++i) overlap += std::conj(prev[i]) * v[i];
      for (int i = 0; i < d; ++i) v[i] -= overlap * prev[i];
    }
    double n = 0.0;
    for (const cplx& z : v) n += std::norm(z);
    n = std::sqrt(n);
    if (n < 1e-8) continue;  // candidate lies in the span already
    for (cplx& z : v) z /= n;
    setting.basis.push_back(std::move(v));
  }
  if (static_cast<int>(setting.basis.size()) != d)
    throw std::runtime_error("complete_setting: failed to complete the basis");
  return setting;
}

}  // namespace detail

/// The d^2 probe directions {|j>} then {(|j>+|k>)/sqrt2} then
/// {(|j>+i|k>)/sqrt2} for j < k, each completed to a full orthonormal
/// setting. The projectors span the full operator space.
inline ProjectorSet ic_projectors(int d) {
  if (d < 2 || d > 8) throw std::invalid_argument("ic_projectors: d must lie in [2, 8]");
  ProjectorSet ps;
  ps.dim = d;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < d; ++j) {
    std::vector<cplx> v(d, cplx(0.0, 0.0));
    v[j] = 1.0;
    ps.settings.push_back(detail::complete_setting(v, d));
  }
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      std::vector<cplx> plus(d, cplx(0.0, 0.0));
      plus[j] = inv_sqrt2;
      plus[k] = inv_sqrt2;
      ps.settings.push_back(detail::complete_setting(plus, d));
      std::vector<cplx> plus_i(d, cplx(0.0, 0.0));
      plus_i[j] = inv_sqrt2;
      plus_i[k] = cplx(0.0, inv_sqrt2);
      ps.settings.push_back(detail::complete_setting(plus_i, d));
    }
  }
  return ps;
}

/// Simulated detector counts: one multinomial draw per setting.
struct CountRecord {
  int dim = 0;
  std::vector<std::vector<std::int64_t>> counts;  // [setting][outcome]
  std::int64_t shots_per_setting = 0;
  std::uint64_t seed = 0;
};

/// Born-rule probabilities of one setting on a state, clipped at zero and
/// renormalized. Throws when the raw probabilities fail to sum to 1 within
/// 1e-6 (a broken projector set or dimension mismatch).
inline std::vector<double> outcome_probabilities(const DensityMatrix& rho,
                                                 const ProjectorSet& ps, int setting) {
  const int d = ps.dim;
  if (rho.dim() != d)
    throw std::invalid_argument("outcome_probabilities: dimension mismatch");
  const MeasurementSetting& ms = ps.settings[setting];
  std::vector<double> p(ms.basis.size());
  double total = 0.0;
  for (std::size_t o = 0; o < ms.basis.size(); ++o) {
    const std::vector<cplx>& v = ms.basis[o];
    cplx val = 0.0;
    for (int i = 0; i < d; ++i) {
      cplx row = 0.0;
      for (int j = 0; j < d; ++j) row += rho.mat(i, j) * v[j];
      val += std::conj(v[i]) * row;
    }
    p[o] = std::max(val.real(), 0.0);
    total += p[o];
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw std::runtime_error("outcome_probabilities: setting probabilities sum to " +
                             std::to_string(total));
  for (double& x : p) x /= total;
  return p;
}

inline CountRecord simulate_counts(const DensityMatrix& rho, const ProjectorSet& ps,
                                   std::int64_t shots, std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("simulate_counts: shots must be >= 1");
  CountRecord rec;
  rec.dim = ps.dim;
  rec.shots_per_setting = shots;
  rec.seed = seed;
  SplitMix64 rng(seed);
  rec.counts.reserve(ps.settings.size());
  for (int s = 0; s < ps.setting_count(); ++s) {
    const std::vector<double> p = outcome_probabilities(rho, ps, s);
    rec.counts.push_back(multinomial(rng, shots, p));
  }
  return rec;
}

struct ReconstructionResult {
  DensityMatrix rho_hat;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  double mc_std_entropy = 0.0;
  std::vector<double> ll_history;  // one entry per accepted iterate
};

namespace detail {

inline double log_likelihood_of(const CountRecord& counts, const ProjectorSet& ps,
                                const DensityMatrix& rho) {
  double ll = 0.0;
  for (int s = 0; s < ps.setting_count(); ++s) {
    const std::vector<double> p = outcome_probabilities(rho, ps, s);
    for (std::size_t o = 0; o < p.size(); ++o) {
      const std::int64_t n = counts.counts[s][o];
      if (n > 0) ll += static_cast<double>(n) * std::log(std::max(p[o], 1e-300));
    }
  }
  return ll;
}

inline DensityMatrix project_to_state(const ComplexMatrix& m, std::vector<int> dims) {
  const EigenDecomposition ed = hermitian_eig(hermitize(m));
  const int d = m.rows();
  double total = 0.0;
  std::vector<double> clipped(d);
  for (int k = 0; k < d; ++k) {
    clipped[k] = std::max(ed.eigenvalues[k], 0.0);
    total += clipped[k];
  }
  ComplexMatrix out(d, d);
  for (int k = 0; k < d; ++k) {
    const double w = clipped[k] / total;
    if (w == 0.0) continue;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        out(i, j) += w * ed.eigenvectors(i, k) * std::conj(ed.eigenvectors(j, k));
  }
  return DensityMatrix::unchecked(hermitize(out), std::move(dims));
}

}  // namespace detail

/// Maximum-likelihood reconstruction via the diluted R*rho*R fixed point:
/// R = sum_i n_i/(N_i p_i) Pi_i and rho <- (1-a) rho + a R rho R / Tr(...)
/// with a = 0.5, starting from the maximally mixed state. Iterations stop
/// when the likelihood gain drops below tol; a final step that would lower
/// the likelihood is rejected, so the recorded history is non-decreasing.
inline ReconstructionResult mle_reconstruct(const CountRecord& counts,
                                            const ProjectorSet& ps, int max_iter = 5000,
                                            double tol = 1e-10) {
  const int d = ps.dim;
  if (counts.dim != d || static_cast<int>(counts.counts.size()) != ps.setting_count())
    throw std::invalid_argument("mle_reconstruct: counts do not match projector set");
  for (int s = 0; s < ps.setting_count(); ++s) {
    std::int64_t sum = 0;
    for (std::int64_t n : counts.counts[s]) {
      if (n < 0) throw std::invalid_argument("mle_reconstruct: negative count");
      sum += n;
    }
    if (sum != counts.shots_per_setting)
      throw std::invalid_argument("mle_reconstruct: counts do not sum to shots_per_setting");
  }

  constexpr double alpha = 0.5;
  ComplexMatrix rho = ComplexMatrix::identity(d) * cplx(1.0 / d, 0.0);
  auto as_state = [&](const ComplexMatrix& m) {
    return DensityMatrix::unchecked(m, {d});
  };

  ReconstructionResult result;
  double ll = detail::log_likelihood_of(counts, ps, as_state(rho));
  result.ll_history.push_back(ll);
  const double n_total = static_cast<double>(counts.shots_per_setting);

  int it = 0;
  bool converged = false;
  for (; it < max_iter; ++it) {
    ComplexMatrix r(d, d);
    for (int s = 0; s < ps.setting_count(); ++s) {
      const std::vector<double> p = outcome_probabilities(as_state(rho), ps, s);
      for (std::size_t o = 0; o < p.size(); ++o) {
        const std::int64_t n = counts.counts[s][o];
        if (n == 0) continue;
        const double w = static_cast<double>(n) / (n_total * std::max(p[o], 1e-12));
        const std::vector<cplx>& v = ps.settings[s].basis[o];
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) r(i, j) += w * v[i] * std::conj(v[j]);
      }
    }
    ComplexMatrix stepped = r * rho * r;
    const double tr = stepped.trace().real();
    if (!(tr > 0.0)) break;
    stepped *= cplx(1.0 / tr, 0.0);
    ComplexMatrix candidate = rho * cplx(1.0 - alpha, 0.0) + stepped * cplx(alpha, 0.0);
    candidate = hermitize(candidate);

    const double ll_next = detail::log_likelihood_of(counts, ps, as_state(candidate));
    const double gain = ll_next - ll;
    if (gain < tol) {
      if (gain >= 0.0) {
        rho = candidate;
        ll = ll_next;
        result.ll_history.push_back(ll);
        ++it;
      }
      converged = true;
      break;
    }
    rho = candidate;
    ll = ll_next;
    result.ll_history.push_back(ll);
  }

  result.rho_hat = detail::project_to_state(rho, {d});
  result.log_likelihood = ll;
  result.iterations = it;
  result.converged = converged;
  return result;
}

/// Monte Carlo spread of an arbitrary functional of the reconstructed state:
/// counts are resampled around the observed frequencies, the reconstruction
/// repeated, and the sample standard deviation returned. With resample set
/// to false the same counts are reused (spread is then exactly zero).
inline double monte_carlo_std(const CountRecord& counts, const ProjectorSet& ps,
                              int resamples,
                              const std::function<double(const DensityMatrix&)>& functional,
                              bool resample = true, int max_iter = 5000,
                              double tol = 1e-10) {
  if (resamples < 2) throw std::invalid_argument("monte_carlo_std: resamples must be >= 2");
  SplitMix64 base(counts.seed);
  std::vector<double> values(resamples);
  const double n = static_cast<double>(counts.shots_per_setting);
  for (int r = 0; r < resamples; ++r) {
    CountRecord draw = counts;
    if (resample) {
      SplitMix64 rng = base.split(0xAC000000ULL + static_cast<std::uint64_t>(r));
      for (std::size_t s = 0; s < counts.counts.size(); ++s) {
        std::vector<double> freq(counts.counts[s].size());
        for (std::size_t o = 0; o < freq.size(); ++o)
          freq[o] = static_cast<double>(counts.counts[s][o]) / n;
        draw.counts[s] = multinomial(rng, counts.shots_per_setting, freq);
      }
    }
    values[r] = functional(mle_reconstruct(draw, ps, max_iter, tol).rho_hat);
  }
  double mean = 0.0;
  for (double v : values) mean += v / resamples;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return std::sqrt(var / (resamples - 1));
}

/// Monte Carlo standard deviation of the reconstructed state's entropy.
inline double monte_carlo_errors(const CountRecord& counts, const ProjectorSet& ps,
                                 int resamples, bool resample = true) {
  return monte_carlo_std(counts, ps, resamples,
                         [](const DensityMatrix& rho) { return von_neumann_entropy(rho); },
                         resample);
}

struct ProcessTomographyResult {
  ChoiMatrix estimate;
  double fidelity_to_truth = 0.0;
  bool all_converged = true;
  std::vector<std::vector<double>> ll_histories;  // per probe state
};

/// Full process tomography: send every probe direction through the channel,
/// state-tomograph each output (shots == 0 short-circuits to the exact
/// output states), then rebuild the map by linear inversion over the probe
/// basis. The raw Choi estimate is projected to the PSD cone, rescaled so
/// the trace-preservation witness holds, and renormalized.
inline ProcessTomographyResult process_tomography(const KrausChannel& truth, int probe_dim,
                                                  std::int64_t shots, std::uint64_t seed) {
  if (probe_dim != truth.d_in)
    throw std::invalid_argument("process_tomography: probe_dim must equal channel d_in");
  if (probe_dim > 6)
    throw std::invalid_argument("process_tomography: probe dimension above 6");
  const int din = truth.d_in;
  const int dout = truth.d_out;
  const ProjectorSet probes = ic_projectors(din);
  const ProjectorSet ps_out = ic_projectors(dout);
  const int n_probes = din * din;

  // Probe density matrices and the inversion operator over vec(sigma_k).
  std::vector<ComplexMatrix> sigmas(n_probes);
  ComplexMatrix smat(din * din, n_probes);
  for (int k = 0; k < n_probes; ++k) {
    const std::vector<cplx>& v = probes.probe_direction(k);
    ComplexMatrix sigma(din, din);
    for (int i = 0; i < din; ++i)
      for (int j = 0; j < din; ++j) sigma(i, j) = v[i] * std::conj(v[j]);
    for (int i = 0; i < din; ++i)
      for (int j = 0; j < din; ++j) smat(i * din + j, k) = sigma(i, j);
    sigmas[k] = std::move(sigma);
  }
  const ComplexMatrix sinv = invert(smat);
  if (smat.frobenius_norm() * sinv.frobenius_norm() > 1e8)
    throw std::runtime_error("process_tomography: probe basis is ill-conditioned");

  ProcessTomographyResult result;
  SplitMix64 rng(seed);
  std::vector<ComplexMatrix> outputs(n_probes);
  for (int k = 0; k < n_probes; ++k) {
    const DensityMatrix out_true =
        apply(truth, DensityMatrix::unchecked(sigmas[k], {din}));
    if (shots == 0) {
      outputs[k] = out_true.mat;
    } else {
      const CountRecord counts =
          simulate_counts(out_true, ps_out, shots, rng.split(k).next_u64());
      ReconstructionResult rec = mle_reconstruct(counts, ps_out);
      result.all_converged = result.all_converged && rec.converged;
      result.ll_histories.push_back(std::move(rec.ll_history));
      outputs[k] = rec.rho_hat.mat;
    }
  }

  // E(E_ab) = sum_k c_k rho_k with c = S^{-1} vec(E_ab); assemble the Choi
  // matrix (1/d) sum_ab |a><b| (x) E(E_ab).
  ComplexMatrix c(din * dout, din * dout);
  for (int a = 0; a < din; ++a) {
    for (int b = 0; b < din; ++b) {
      std::vector<cplx> coeff(n_probes, cplx(0.0, 0.0));
      for (int k = 0; k < n_probes; ++k) coeff[k] = sinv(k, a * din + b);
      for (int m = 0; m < dout; ++m)
        for (int n2 = 0; n2 < dout; ++n2) {
          cplx val = 0.0;
          for (int k = 0; k < n_probes; ++k) val += coeff[k] * outputs[k](m, n2);
          c(a * dout + m, b * dout + n2) += val / static_cast<double>(din);
        }
    }
  }

  // PSD projection.
  c = hermitize(c);
  {
    const EigenDecomposition ed = hermitian_eig(c);
    const int dim = c.rows();
    ComplexMatrix proj(dim, dim);
    double tr = 0.0;
    for (int k = 0; k < dim; ++k) {
      const double w = std::max(ed.eigenvalues[k], 0.0);
      if (w == 0.0) continue;
      tr += w;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
          proj(i, j) += w * ed.eigenvectors(i, k) * std::conj(ed.eigenvectors(j, k));
    }
    c = proj * cplx(1.0 / tr, 0.0);
  }

  // Rescale so Tr_out(C) = I/d_in exactly: conjugate by (d*M)^{-1/2} (x) I.
  {
    DensityMatrix cd = DensityMatrix::unchecked(hermitize(c), {din, dout});
    const DensityMatrix marg = partial_trace(cd, {0});
    const EigenDecomposition ed = hermitian_eig(marg.mat);
    ComplexMatrix a(din, din);
    for (int k = 0; k < din; ++k) {
      const double lam = std::max(ed.eigenvalues[k] * din, 1e-14);
      const double w = 1.0 / std::sqrt(lam);
      for (int i = 0; i < din; ++i)
        for (int j = 0; j < din; ++j)
          a(i, j) += w * ed.eigenvectors(i, k) * std::conj(ed.eigenvectors(j, k));
    }
    const ComplexMatrix a_full = kron(a, ComplexMatrix::identity(dout));
    c = a_full * c * adjoint(a_full);
    c = hermitize(c);
    c *= cplx(1.0 / c.trace().real(), 0.0);
  }

  result.estimate = ChoiMatrix(DensityMatrix(c, {din, dout}), din, dout);
  result.fidelity_to_truth = process_fidelity(result.estimate, choi(truth));
  return result;
}

}  // namespace cohinfo
