#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cohinfo/channels.hpp"
#include "cohinfo/nelder_mead.hpp"
#include "cohinfo/parallel.hpp"
#include "cohinfo/random.hpp"
#include "cohinfo/rng.hpp"
#include "cohinfo/states.hpp"

namespace cohinfo {

/// Parameterized family of input states over a closed box of parameters.
struct StateFamily {
  int arity = 0;
  std::function<DensityMatrix(const std::vector<double>&)> generator;
  std::vector<std::array<double, 2>> bounds;
};

inline StateFamily family_u() {
  return {1, [](const std::vector<double>& p) { return family_rho_u(p[0]); }, {{0.0, 1.0}}};
}

/// One-parameter slice of the (w, v) family at fixed v; the scan parameter
/// is w.
inline StateFamily family_w_at_v(double v) {
  return {1,
          [v](const std::vector<double>& p) { return family_rho_wv(p[0], v); },
          {{0.0, 1.0}}};
}

inline StateFamily family_r() {
  return {3,
          [](const std::vector<double>& p) { return family_rho_r(p[0], p[1], p[2]); },
          {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}};
}

struct SingularityEstimate {
  enum class Method { spectral, regression };
  double x = 0.0;
  Method method = Method::spectral;
  double fit_residual = 0.0;
  std::array<double, 2> eps_window{0.0, 0.0};
};

struct OptimizationResult {
  std::vector<double> best_params;
  double best_value = 0.0;
  long evaluations = 0;
  bool converged = false;
};

/// Evaluates S(B(rho)) - S(B^c(rho)) with the complement's state computed
/// directly as [B^c(rho)]_{ij} = Tr(K_i rho K_j†); the products K_j† K_i are
/// cached so optimizer loops avoid rebuilding the complementary channel.
class CoherentInfoEvaluator {
 public:
  explicit CoherentInfoEvaluator(KrausChannel ch) : ch_(std::move(ch)) {
    const int n = ch_.env_dim();
    products_.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) products_.push_back(adjoint(ch_.ops[j]) * ch_.ops[i]);
  }

  const KrausChannel& channel() const { return ch_; }

  DensityMatrix output_state(const DensityMatrix& rho) const { return apply(ch_, rho); }

  DensityMatrix environment_state(const DensityMatrix& rho) const {
    const int n = ch_.env_dim();
    ComplexMatrix env(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        const ComplexMatrix& m = products_[static_cast<std::size_t>(i) * n + j];
        cplx t = 0.0;
        for (int a = 0; a < ch_.d_in; ++a)
          for (int b = 0; b < ch_.d_in; ++b) t += m(a, b) * rho.mat(b, a);
        env(i, j) = t;
        env(j, i) = std::conj(t);
      }
    }
    return DensityMatrix::unchecked(std::move(env), {n});
  }

  double operator()(const DensityMatrix& rho) const {
    return von_neumann_entropy(output_state(rho)) -
           von_neumann_entropy(environment_state(rho));
  }

 private:
  KrausChannel ch_;
  std::vector<ComplexMatrix> products_;
};

/// Single-use coherent information S(B(rho)) - S(B^c(rho)); may be negative.
inline double coherent_information(const KrausChannel& ch, const DensityMatrix& rho) {
  if (rho.dim() != ch.d_in)
    throw std::invalid_argument("coherent_information: dimension mismatch");
  return CoherentInfoEvaluator(ch)(rho);
}

/// Same quantity via a purification: S(B(rho)) - S((B (x) I)(psi)) with
/// psi purifying rho. The joint output entropy of channel-plus-reference
/// equals the complementary entropy, so this must match the direct route.
inline double coherent_information_via_purification(const KrausChannel& ch,
                                                    const DensityMatrix& rho) {
  if (rho.dim() != ch.d_in)
    throw std::invalid_argument("coherent_information: dimension mismatch");
  const PureState psi = purify(rho);
  const int ref_dim = psi.dims[1];
  const KrausChannel extended = tensor(ch, identity_channel(ref_dim));
  const DensityMatrix joint_out = apply(extended, density_from_pure(psi));
  return von_neumann_entropy(apply(ch, rho)) - von_neumann_entropy(joint_out);
}

namespace detail {

inline std::vector<double> clamp_to_bounds(std::vector<double> p,
                                           const std::vector<std::array<double, 2>>& bounds) {
  for (std::size_t i = 0; i < p.size(); ++i)
    p[i] = std::clamp(p[i], bounds[i][0], bounds[i][1]);
  return p;
}

/// Projects the (r1, r2) corner of the simplex family back onto the feasible
/// set; other families are plain boxes so this is a no-op for them.
inline DensityMatrix generate_clamped(const StateFamily& family,
                                      const std::vector<double>& params) {
  std::vector<double> p = clamp_to_bounds(params, family.bounds);
  if (family.arity == 3 && p[0] + p[1] > 1.0) {
    const double excess = (p[0] + p[1] - 1.0) / 2.0;
    p[0] = std::clamp(p[0] - excess, 0.0, 1.0);
    p[1] = std::clamp(1.0 - p[0], 0.0, p[1]);
  }
  return family.generator(p);
}

}  // namespace detail

/// Coarse grid scan over the family box followed by Nelder-Mead refinement
/// from the best grid point.
inline OptimizationResult optimize_ci_family(const KrausChannel& ch,
                                             const StateFamily& family,
                                             int grid_points_per_axis = 51) {
  if (family.arity < 1 || family.arity > 3)
    throw std::invalid_argument("optimize_ci_family: family arity must be 1..3");
  if (grid_points_per_axis < 2)
    throw std::invalid_argument("optimize_ci_family: grid needs at least 2 points per axis");
  const CoherentInfoEvaluator eval(ch);
  {
    const DensityMatrix probe = detail::generate_clamped(
        family, std::vector<double>(family.arity, family.bounds[0][0]));
    if (probe.dim() != ch.d_in)
      throw std::invalid_argument("optimize_ci_family: family/channel dimension mismatch");
  }

  long evaluations = 0;
  auto objective = [&](const std::vector<double>& p) {
    ++evaluations;
    try {
      return -eval(detail::generate_clamped(family, p));
    } catch (const std::invalid_argument&) {
      return 1e30;  // outside the family's domain
    }
  };

  // Grid stage.
  std::vector<double> best_params(family.arity, 0.0);
  double best = 1e300;
  std::vector<int> idx(family.arity, 0);
  const int g = grid_points_per_axis;
  while (true) {
    std::vector<double> p(family.arity);
    for (int a = 0; a < family.arity; ++a) {
      const auto& b = family.bounds[a];
      p[a] = b[0] + (b[1] - b[0]) * idx[a] / (g - 1);
    }
    const double f = objective(p);
    if (f < best) {
      best = f;
      best_params = p;
    }
    int a = family.arity - 1;
    while (a >= 0 && ++idx[a] == g) idx[a--] = 0;
    if (a < 0) break;
  }

  // Refinement stage.
  const NelderMeadResult nm = nelder_mead_minimize(objective, best_params);
  std::vector<double> final_params = detail::clamp_to_bounds(nm.x, family.bounds);
  if (family.arity == 3 && final_params[0] + final_params[1] > 1.0) {
    const double excess = (final_params[0] + final_params[1] - 1.0) / 2.0;
    final_params[0] -= excess;
    final_params[1] = std::min(final_params[1], 1.0 - final_params[0]);
  }

  OptimizationResult result;
  result.best_params = final_params;
  result.best_value = eval(detail::generate_clamped(family, final_params));
  result.evaluations = evaluations;
  result.converged = nm.converged;
  return result;
}

/// Unconstrained maximization over all input states via the Cholesky-style
/// parameterization rho = L L†/Tr(L L†) (d^2 real parameters), refined by
/// Nelder-Mead from seeded random starts. The reported value is a lower
/// bound on the true maximum; converged means the two best restarts agree
/// within 1e-5.
inline OptimizationResult optimize_ci_general(const KrausChannel& ch, int restarts,
                                              std::uint64_t seed = 0x5EED5EED5EEDULL) {
  if (ch.d_in > 8)
    throw std::invalid_argument("optimize_ci_general: input dimension above 8");
  if (restarts < 1) throw std::invalid_argument("optimize_ci_general: restarts must be >= 1");
  const int d = ch.d_in;
  const int nparams = d * d;
  const CoherentInfoEvaluator eval(ch);

  auto build_state = [d](const std::vector<double>& p) {
    ComplexMatrix l(d, d);
    int k = 0;
    for (int i = 0; i < d; ++i) l(i, i) = p[k++];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < i; ++j) {
        l(i, j) = cplx(p[k], p[k + 1]);
        k += 2;
      }
    ComplexMatrix m = hermitize(l * adjoint(l));
    const double tr = m.trace().real();
    if (!(tr > 1e-12)) return DensityMatrix();  // degenerate point
    m *= cplx(1.0 / tr, 0.0);
    return DensityMatrix::unchecked(std::move(m), {d});
  };

  long evaluations = 0;
  auto objective = [&](const std::vector<double>& p) {
    ++evaluations;
    const DensityMatrix rho = build_state(p);
    if (rho.dim() == 0) return 1e30;
    return -eval(rho);
  };

  SplitMix64 rng(seed);
  std::vector<NelderMeadResult> finals;
  for (int r = 0; r < restarts; ++r) {
    SplitMix64 stream = rng.split(static_cast<std::uint64_t>(r));
    std::vector<double> x0(nparams);
    for (double& x : x0) x = 0.6 * next_gaussian(stream);
    finals.push_back(nelder_mead_minimize(objective, x0));
  }
  std::stable_sort(finals.begin(), finals.end(),
                   [](const NelderMeadResult& a, const NelderMeadResult& b) { return a.f < b.f; });

  // Polish the winner with a tighter simplex.
  NelderMeadOptions polish;
  polish.initial_edge = 0.01;
  const NelderMeadResult refined = nelder_mead_minimize(objective, finals[0].x, polish);
  const NelderMeadResult& top = refined.f <= finals[0].f ? refined : finals[0];

  OptimizationResult result;
  result.best_params = top.x;
  result.best_value = -objective(top.x);
  --evaluations;  // the re-evaluation above is bookkeeping, not search
  result.evaluations = evaluations;
  result.converged = finals.size() < 2 || std::abs(finals[0].f - finals[1].f) < 1e-5;
  return result;
}

/// dS/deps sampled on a log-spaced grid and regressed against -log2(eps);
/// the slope is the log-singularity strength.
inline SingularityEstimate singularity_rate_regression(
    const KrausChannel& ch, const StateFamily& family,
    std::array<double, 2> eps_window = {1e-4, 1e-1}, int points = 40) {
  if (family.arity != 1)
    throw std::invalid_argument("singularity_rate_regression: family must have arity 1");
  if (!(eps_window[0] > 0.0 && eps_window[1] > eps_window[0]))
    throw std::invalid_argument("singularity_rate_regression: degenerate window");
  if (eps_window[0] < family.bounds[0][0] - 1e-15 || eps_window[1] > family.bounds[0][1] + 1e-15)
    throw std::invalid_argument("singularity_rate_regression: window outside family bounds");
  if (points < 3)
    throw std::invalid_argument("singularity_rate_regression: needs at least 3 points");

  const CoherentInfoEvaluator eval(ch);
  const int n = points;
  std::vector<double> eps(n), s(n);
  const double ratio = eps_window[1] / eps_window[0];
  for (int i = 0; i < n; ++i) {
    eps[i] = eps_window[0] * std::pow(ratio, static_cast<double>(i) / (n - 1));
    s[i] = von_neumann_entropy(eval.output_state(family.generator({eps[i]})));
  }

  // Three-point derivative stencils on the nonuniform grid; one-sided at the
  // endpoints. Written in difference form so a constant S gives exactly zero.
  std::vector<double> ds(n);
  for (int i = 0; i < n; ++i) {
    const int i0 = (i == 0) ? 0 : (i == n - 1 ? n - 3 : i - 1);
    const double x0 = eps[i0], x1 = eps[i0 + 1], x2 = eps[i0 + 2];
    const double f0 = s[i0], f1 = s[i0 + 1], f2 = s[i0 + 2];
    const double xi = eps[i];
    const double c1 = (2 * xi - x0 - x2) / ((x1 - x0) * (x1 - x2));
    const double c2 = (2 * xi - x0 - x1) / ((x2 - x0) * (x2 - x1));
    ds[i] = c1 * (f1 - f0) + c2 * (f2 - f0);
  }

  double tbar = 0.0, ybar = 0.0;
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) {
    t[i] = -std::log2(eps[i]);
    tbar += t[i] / n;
    ybar += ds[i] / n;
  }
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    num += (t[i] - tbar) * (ds[i] - ybar);
    den += (t[i] - tbar) * (t[i] - tbar);
  }
  const double slope = num / den;
  const double intercept = ybar - slope * tbar;
  double rss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ds[i] - (slope * t[i] + intercept);
    rss += r * r;
  }

  SingularityEstimate est;
  est.x = std::max(slope, 0.0);
  est.method = SingularityEstimate::Method::regression;
  est.fit_residual = std::sqrt(rss / n);
  est.eps_window = eps_window;
  return est;
}

/// Detects eigenvalues growing linearly through the origin by comparing the
/// output spectra at eps and 2*eps; the strength is the summed growth rate.
inline SingularityEstimate singularity_rate_spectral(const KrausChannel& ch,
                                                     const StateFamily& family) {
  if (family.arity != 1)
    throw std::invalid_argument("singularity_rate_spectral: family must have arity 1");
  const CoherentInfoEvaluator eval(ch);
  const double e1 = 1e-6, e2 = 2e-6;
  std::vector<double> w1 = hermitian_eigenvalues(eval.output_state(family.generator({e1})).mat);
  std::vector<double> w2 = hermitian_eigenvalues(eval.output_state(family.generator({e2})).mat);

  double x = 0.0;
  for (std::size_t i = 0; i < w1.size(); ++i) {
    if (w1[i] <= 1e-10) continue;
    const double ratio = w2[i] / w1[i];
    if (ratio >= 1.9 && ratio <= 2.1) x += w1[i] / e1;
  }

  SingularityEstimate est;
  est.x = x;
  est.method = SingularityEstimate::Method::spectral;
  est.fit_residual = 0.0;
  est.eps_window = {e1, e2};
  return est;
}

/// Coherent-information nonadditivity at a given joint input:
/// Ic(chA (x) chB, rho) - qA - qB. The single-channel maxima are supplied
/// so callers can use either ideal or measured values.
inline double delta_nonadditivity(const KrausChannel& cha, const KrausChannel& chb,
                                  const DensityMatrix& joint_input, double qa, double qb) {
  if (joint_input.dim() != cha.d_in * chb.d_in)
    throw std::invalid_argument("delta_nonadditivity: joint input dimension mismatch");
  return coherent_information(tensor(cha, chb), joint_input) - qa - qb;
}

/// Delta evaluated along one axis of a three-parameter family, the other
/// two parameters fixed; emitted in ascending parameter order. qA/qB are
/// passed through to delta_nonadditivity. Grid points are independent work
/// items, so the scan may run on several workers; results are written by
/// index and match a serial run exactly.
inline std::vector<std::pair<double, double>> scan_delta(
    const KrausChannel& cha, const KrausChannel& chb, const StateFamily& family,
    int axis, std::array<double, 2> fixed, int grid_points, double qa, double qb,
    int threads = 1) {
  if (family.arity != 3) throw std::invalid_argument("scan_delta: family must have arity 3");
  if (axis < 0 || axis > 2) throw std::invalid_argument("scan_delta: axis must be 0, 1 or 2");
  if (grid_points < 1) throw std::invalid_argument("scan_delta: grid_points must be >= 1");
  int slot = 0;
  std::vector<double> base(3, 0.0);
  for (int a = 0; a < 3; ++a) {
    if (a == axis) continue;
    const double v = fixed[slot++];
    if (v < family.bounds[a][0] - 1e-12 || v > family.bounds[a][1] + 1e-12)
      throw std::invalid_argument("scan_delta: fixed value out of bounds");
    base[a] = v;
  }

  const CoherentInfoEvaluator eval(tensor(cha, chb));
  const auto& b = family.bounds[axis];
  std::vector<double> params_at(grid_points);
  std::vector<double> values(grid_points, 0.0);
  std::vector<char> feasible(grid_points, 0);
  parallel_for(grid_points, threads, [&](int i) {
    const double p =
        grid_points == 1 ? b[0] : b[0] + (b[1] - b[0]) * i / (grid_points - 1);
    params_at[i] = p;
    std::vector<double> params = base;
    params[axis] = p;
    try {
      values[i] = eval(family.generator(params)) - qa - qb;
      feasible[i] = 1;
    } catch (const std::invalid_argument&) {
      // Point is outside the family's domain (simplex corner); skip it.
    }
  });
  std::vector<std::pair<double, double>> curve;
  curve.reserve(grid_points);
  for (int i = 0; i < grid_points; ++i)
    if (feasible[i]) curve.emplace_back(params_at[i], values[i]);
  return curve;
}

}  // namespace cohinfo
