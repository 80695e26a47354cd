#pragma once

#include <cmath>
#include <vector>

#include "cohinfo/matrix.hpp"
#include "cohinfo/rng.hpp"
#include "cohinfo/states.hpp"

namespace cohinfo {

inline ComplexMatrix random_gaussian_matrix(int rows, int cols, SplitMix64& rng) {
  ComplexMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = cplx(next_gaussian(rng), next_gaussian(rng));
  return m;
}

/// Haar-ish random unitary: Gram-Schmidt orthonormalization of a complex
/// Gaussian matrix.
inline ComplexMatrix random_unitary(int d, SplitMix64& rng) {
  ComplexMatrix g = random_gaussian_matrix(d, d, rng);
  for (int c = 0; c < d; ++c) {
    for (int prev = 0; prev < c; ++prev) {
      cplx overlap = 0.0;
      for (int i = 0; i < d; ++i) overlap += std::conj(g(i, prev)) * g(i, c);
      for (int i = 0; i < d; ++i) g(i, c) -= overlap * g(i, prev);
    }
    double n = 0.0;
    for (int i = 0; i < d; ++i) n += std::norm(g(i, c));
    n = std::sqrt(n);
    if (n < 1e-12) {
      // Pathologically unlucky draw; restart the column from a basis vector.
      for (int i = 0; i < d; ++i) g(i, c) = (i == c) ? 1.0 : 0.0;
      c -= 1;
      continue;
    }
    for (int i = 0; i < d; ++i) g(i, c) /= n;
  }
  return g;
}

/// Full-rank random state: G G†/Tr(G G†) with Gaussian G.
inline DensityMatrix random_density_matrix(int d, SplitMix64& rng,
                                           std::vector<int> dims = {}) {
  const ComplexMatrix g = random_gaussian_matrix(d, d, rng);
  ComplexMatrix m = g * adjoint(g);
  m = hermitize(m);
  const double tr = m.trace().real();
  m *= cplx(1.0 / tr, 0.0);
  if (dims.empty()) dims = {d};
  return DensityMatrix(std::move(m), std::move(dims));
}

inline PureState random_pure_state(int d, SplitMix64& rng, std::vector<int> dims = {}) {
  std::vector<cplx> v(d);
  double n = 0.0;
  for (int i = 0; i < d; ++i) {
    v[i] = cplx(next_gaussian(rng), next_gaussian(rng));
    n += std::norm(v[i]);
  }
  n = std::sqrt(n);
  for (cplx& z : v) z /= n;
  if (dims.empty()) dims = {d};
  return PureState(std::move(v), std::move(dims));
}

}  // namespace cohinfo
