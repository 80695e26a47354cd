#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace cohinfo {

struct NelderMeadOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double initial_edge = 0.05;
  int max_evals = 5000;
  double diameter_tol = 1e-7;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Downhill simplex minimization. Derivative-free and deterministic; the
/// simplex starts at x0 with one vertex displaced by initial_edge per axis.
inline NelderMeadResult nelder_mead_minimize(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x0, const NelderMeadOptions& opts = {}) {
  const int n = static_cast<int>(x0.size());
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };

  std::vector<std::vector<double>> xs(n + 1, x0);
  std::vector<double> fs(n + 1);
  for (int i = 0; i < n; ++i) xs[i + 1][i] += opts.initial_edge;
  for (int i = 0; i <= n; ++i) fs[i] = eval(xs[i]);

  auto sort_simplex = [&]() {
    std::vector<int> idx(n + 1);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    std::vector<std::vector<double>> xs2(n + 1);
    std::vector<double> fs2(n + 1);
    for (int k = 0; k <= n; ++k) {
      xs2[k] = xs[idx[k]];
      fs2[k] = fs[idx[k]];
    }
    xs.swap(xs2);
    fs.swap(fs2);
  };

  auto diameter = [&]() {
    double d = 0.0;
    for (int k = 1; k <= n; ++k)
      for (int i = 0; i < n; ++i) d = std::max(d, std::abs(xs[k][i] - xs[0][i]));
    return d;
  };

  NelderMeadResult result;
  while (true) {
    sort_simplex();
    if (diameter() < opts.diameter_tol) {
      result.converged = true;
      break;
    }
    if (evals >= opts.max_evals) break;

    std::vector<double> centroid(n, 0.0);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) centroid[i] += xs[k][i] / n;

    auto blend = [&](const std::vector<double>& base, const std::vector<double>& dir,
                     double t) {
      std::vector<double> p(n);
      for (int i = 0; i < n; ++i) p[i] = base[i] + t * (dir[i] - base[i]);
      return p;
    };

    const std::vector<double> reflected = blend(centroid, xs[n], -opts.reflection);
    const double fr = eval(reflected);

    if (fr < fs[0]) {
      const std::vector<double> expanded = blend(centroid, reflected, opts.expansion);
      const double fe = eval(expanded);
      if (fe < fr) {
        xs[n] = expanded;
        fs[n] = fe;
      } else {
        xs[n] = reflected;
        fs[n] = fr;
      }
    } else if (fr < fs[n - 1]) {
      xs[n] = reflected;
      fs[n] = fr;
    } else {
      const bool outside = fr < fs[n];
      const std::vector<double> contracted =
          outside ? blend(centroid, reflected, opts.contraction)
                  : blend(centroid, xs[n], opts.contraction);
      const double fc = eval(contracted);
      if (fc < (outside ? fr : fs[n])) {
        xs[n] = contracted;
        fs[n] = fc;
      } else {
        for (int k = 1; k <= n; ++k) {
          xs[k] = blend(xs[0], xs[k], opts.shrink);
          fs[k] = eval(xs[k]);
        }
      }
    }
  }

  result.x = xs[0];
  result.f = fs[0];
  result.evaluations = evals;
  return result;
}

}  // namespace cohinfo
