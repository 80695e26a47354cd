#include <catch2/catch_amalgamated.hpp>

#include "cohinfo/channels.hpp"
#include "cohinfo/random.hpp"

#include "oracles.hpp"

using namespace cohinfo;
using Catch::Approx;

namespace {

DensityMatrix basis_state(int k, int d) {
  ComplexMatrix m(d, d);
  m(k, k) = 1.0;
  return DensityMatrix(std::move(m), {d});
}

DensityMatrix maximally_mixed(int d) {
  return DensityMatrix(ComplexMatrix::identity(d) * cplx(1.0 / d, 0.0), {d});
}

double kraus_completeness_defect(const KrausChannel& ch) {
  ComplexMatrix sum(ch.d_in, ch.d_in);
  for (const ComplexMatrix& k : ch.ops) sum += adjoint(k) * k;
  sum -= ComplexMatrix::identity(ch.d_in);
  return sum.frobenius_norm();
}

}  // namespace

TEST_CASE("platypus isometry columns") {
  const IsometryChannel g3 = platypus(3);
  REQUIRE(g3.d_in == 3);
  REQUIRE(g3.d_out == 3);
  REQUIRE(g3.d_env == 2);
  const double s = 1.0 / std::sqrt(2.0);
  // Column 0: (|0>|0> + |1>|1>)/sqrt2, rows b*d_env + e.
  REQUIRE(g3.g(0, 0) == cplx(s, 0.0));
  REQUIRE(g3.g(3, 0) == cplx(s, 0.0));
  // Column 1: |2>|0>; column 2: |2>|1>.
  REQUIRE(g3.g(4, 1) == cplx(1.0, 0.0));
  REQUIRE(g3.g(5, 2) == cplx(1.0, 0.0));
  double total = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 3; ++j) total += std::norm(g3.g(i, j));
  REQUIRE(total == Approx(3.0).margin(1e-12));

  REQUIRE_THROWS_AS(platypus(2), std::invalid_argument);
}

TEST_CASE("platypus Kraus form matches the hand-written operators") {
  const KrausChannel m3 = to_kraus(platypus(3));
  REQUIRE(m3.env_dim() == 2);
  const double s = 1.0 / std::sqrt(2.0);
  ComplexMatrix k0(3, 3), k1(3, 3);
  k0(0, 0) = s;
  k0(2, 1) = 1.0;  // |0><0|/sqrt2 + |2><1|
  k1(1, 0) = s;
  k1(2, 2) = 1.0;  // |1><0|/sqrt2 + |2><2|
  REQUIRE(max_abs_diff(m3.ops[0], k0) < 1e-14);
  REQUIRE(max_abs_diff(m3.ops[1], k1) < 1e-14);
}

TEST_CASE("platypus(4) is an isometry") {
  const IsometryChannel g4 = platypus(4);
  ComplexMatrix gram = adjoint(g4.g) * g4.g;
  gram -= ComplexMatrix::identity(4);
  REQUIRE(gram.frobenius_norm() < 1e-12);
}

TEST_CASE("amplitude damping endpoints") {
  REQUIRE_THROWS_AS(amplitude_damping(-0.1), std::invalid_argument);
  REQUIRE_THROWS_AS(amplitude_damping(1.1), std::invalid_argument);

  SplitMix64 rng(31);
  const DensityMatrix rho = random_density_matrix(2, rng);
  REQUIRE(max_abs_diff(apply(amplitude_damping(0.0), rho).mat, rho.mat) < 1e-12);
  REQUIRE(max_abs_diff(apply(amplitude_damping(1.0), rho).mat, basis_state(0, 2).mat) <
          1e-12);
}

TEST_CASE("amplitude damping at gamma = 1/2") {
  const KrausChannel ad = amplitude_damping(0.5);
  REQUIRE(max_abs_diff(apply(ad, basis_state(1, 2)).mat, maximally_mixed(2).mat) < 1e-12);

  // Plus state: coherence scales by sqrt(1/2).
  std::vector<cplx> plus = {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  const DensityMatrix out = apply(ad, density_from_pure(PureState(plus, {2})));
  REQUIRE(out.mat(0, 0).real() == Approx(0.75).margin(1e-4));
  REQUIRE(out.mat(0, 1).real() == Approx(0.3536).margin(1e-4));
  REQUIRE(out.mat(1, 0).real() == Approx(0.3536).margin(1e-4));
  REQUIRE(out.mat(1, 1).real() == Approx(0.25).margin(1e-4));
}

TEST_CASE("identity, erasure and depolarizing constructors") {
  SplitMix64 rng(32);
  const DensityMatrix rho3 = random_density_matrix(3, rng);
  REQUIRE(max_abs_diff(apply(identity_channel(3), rho3).mat, rho3.mat) < 1e-12);

  const DensityMatrix rho2 = random_density_matrix(2, rng);
  REQUIRE(max_abs_diff(apply(erasure(1.0, 2), rho2).mat, basis_state(2, 3).mat) < 1e-12);

  REQUIRE(max_abs_diff(apply(depolarizing(1.0, 2), basis_state(0, 2)).mat,
                       maximally_mixed(2).mat) < 1e-12);
  REQUIRE_THROWS_AS(erasure(1.5, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(depolarizing(-0.2, 2), std::invalid_argument);
}

TEST_CASE("platypus action on basis states") {
  const KrausChannel m3 = to_kraus(platypus(3));
  ComplexMatrix half01(3, 3);
  half01(0, 0) = 0.5;
  half01(1, 1) = 0.5;
  REQUIRE(max_abs_diff(apply(m3, basis_state(0, 3)).mat, half01) < 1e-12);
  REQUIRE(max_abs_diff(apply(m3, basis_state(1, 3)).mat, basis_state(2, 3).mat) < 1e-12);
  REQUIRE(max_abs_diff(apply(m3, basis_state(2, 3)).mat, basis_state(2, 3).mat) < 1e-12);

  REQUIRE_THROWS_AS(apply(m3, basis_state(0, 2)), std::invalid_argument);
}

TEST_CASE("Kraus and Stinespring application routes agree") {
  SplitMix64 rng(33);
  const IsometryChannel g3 = platypus(3);
  const KrausChannel m3 = to_kraus(g3);
  for (int trial = 0; trial < 50; ++trial) {
    const DensityMatrix rho = random_density_matrix(3, rng);
    REQUIRE(max_abs_diff(apply(m3, rho).mat, apply(g3, rho).mat) < 1e-10);
  }
  const KrausChannel ad = amplitude_damping(0.3);
  const IsometryChannel ad_iso = to_isometry(ad);
  for (int trial = 0; trial < 50; ++trial) {
    const DensityMatrix rho = random_density_matrix(2, rng);
    REQUIRE(max_abs_diff(apply(ad, rho).mat, apply(ad_iso, rho).mat) < 1e-10);
  }
}

TEST_CASE("complementary of platypus on |0><0| is maximally mixed") {
  const KrausChannel comp = complementary(to_kraus(platypus(3)));
  REQUIRE(comp.d_out == 2);
  REQUIRE(max_abs_diff(apply(comp, basis_state(0, 3)).mat, maximally_mixed(2).mat) <
          1e-12);
}

TEST_CASE("both complementary routes give the same spectra") {
  SplitMix64 rng(34);
  const IsometryChannel g3 = platypus(3);
  const KrausChannel via_kraus = complementary(to_kraus(g3));
  const KrausChannel via_iso = complementary(g3);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix rho = random_density_matrix(3, rng);
    const auto s1 = hermitian_eigenvalues(apply(via_kraus, rho).mat);
    const auto s2 = hermitian_eigenvalues(apply(via_iso, rho).mat);
    for (std::size_t k = 0; k < s1.size(); ++k)
      REQUIRE(s1[k] == Approx(s2[k]).margin(1e-10));
  }
}

TEST_CASE("complementary of the identity is trivial") {
  const KrausChannel comp = complementary(identity_channel(2));
  REQUIRE(comp.d_out == 1);
  SplitMix64 rng(35);
  const DensityMatrix rho = random_density_matrix(2, rng);
  REQUIRE(von_neumann_entropy(apply(comp, rho)) == Approx(0.0).margin(1e-12));
}

TEST_CASE("double complement preserves output entropy") {
  SplitMix64 rng(36);
  const KrausChannel m3 = to_kraus(platypus(3));
  const KrausChannel twice = complementary(complementary(m3));
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix rho = random_density_matrix(3, rng);
    REQUIRE(von_neumann_entropy(apply(twice, rho)) ==
            Approx(von_neumann_entropy(apply(m3, rho))).margin(1e-8));
  }
}

TEST_CASE("tensor structure") {
  const KrausChannel id23 = tensor(identity_channel(2), identity_channel(3));
  SplitMix64 rng(37);
  const DensityMatrix rho6 = random_density_matrix(6, rng);
  REQUIRE(max_abs_diff(apply(id23, rho6).mat, rho6.mat) < 1e-12);

  const KrausChannel joint = tensor(to_kraus(platypus(3)), amplitude_damping(0.5));
  REQUIRE(joint.env_dim() == 4);
  REQUIRE(joint.d_in == 6);
  REQUIRE(joint.d_out == 6);
  for (const ComplexMatrix& k : joint.ops) {
    REQUIRE(k.rows() == 6);
    REQUIRE(k.cols() == 6);
  }
}

TEST_CASE("tensor factorizes on product inputs") {
  SplitMix64 rng(38);
  const KrausChannel m3 = to_kraus(platypus(3));
  const KrausChannel ad = amplitude_damping(0.5);
  const KrausChannel joint = tensor(m3, ad);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix a = random_density_matrix(3, rng);
    const DensityMatrix b = random_density_matrix(2, rng);
    const DensityMatrix lhs = apply(joint, kron(a, b).reshaped({6}));
    const DensityMatrix rhs = kron(apply(m3, a), apply(ad, b));
    REQUIRE(max_abs_diff(lhs.mat, rhs.mat) < 1e-10);
  }
}

TEST_CASE("completeness survives tensor and complement") {
  const KrausChannel m3 = to_kraus(platypus(3));
  const KrausChannel joint = tensor(m3, amplitude_damping(0.5));
  REQUIRE(kraus_completeness_defect(joint) < 1e-9);
  REQUIRE(kraus_completeness_defect(complementary(joint)) < 1e-9);
  REQUIRE(kraus_completeness_defect(complementary(m3)) < 1e-9);
  REQUIRE(kraus_completeness_defect(tensor(erasure(0.3, 2), depolarizing(0.2, 2))) <
          1e-9);
}

TEST_CASE("entropy exchange symmetry for pure inputs") {
  SplitMix64 rng(39);
  const KrausChannel m3 = to_kraus(platypus(3));
  const KrausChannel comp = complementary(m3);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix psi = density_from_pure(random_pure_state(3, rng));
    REQUIRE(von_neumann_entropy(apply(m3, psi)) ==
            Approx(von_neumann_entropy(apply(comp, psi))).margin(1e-8));
  }
}

TEST_CASE("complement of tensor equals tensor of complements in entropy") {
  SplitMix64 rng(40);
  const KrausChannel m3 = to_kraus(platypus(3));
  const KrausChannel ad = amplitude_damping(0.5);
  const KrausChannel lhs = complementary(tensor(m3, ad));
  const KrausChannel rhs = tensor(complementary(m3), complementary(ad));
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix rho = random_density_matrix(6, rng);
    REQUIRE(von_neumann_entropy(apply(lhs, rho)) ==
            Approx(von_neumann_entropy(apply(rhs, rho))).margin(1e-8));
  }
}

TEST_CASE("choi of simple channels") {
  const ChoiMatrix id2 = choi(identity_channel(2));
  std::vector<cplx> bell(4, cplx(0.0, 0.0));
  bell[0] = bell[3] = 1.0 / std::sqrt(2.0);
  REQUIRE(max_abs_diff(id2.mat.mat, density_from_pure(PureState(bell, {2, 2})).mat) <
          1e-12);

  const ChoiMatrix dep = choi(depolarizing(1.0, 2));
  REQUIRE(max_abs_diff(dep.mat.mat, ComplexMatrix::identity(4) * cplx(0.25, 0.0)) <
          1e-12);

  // Trace-preservation witness for amplitude damping.
  const ChoiMatrix ad = choi(amplitude_damping(0.5));
  const DensityMatrix marg = partial_trace(ad.mat, {0});
  REQUIRE(max_abs_diff(marg.mat, ComplexMatrix::identity(2) * cplx(0.5, 0.0)) < 1e-10);
}

TEST_CASE("process fidelity") {
  const ChoiMatrix m3 = choi(to_kraus(platypus(3)));
  REQUIRE(process_fidelity(m3, m3) == Approx(1.0).margin(1e-10));
  REQUIRE(process_fidelity(choi(identity_channel(2)), choi(depolarizing(1.0, 2))) ==
          Approx(0.25).margin(1e-10));
  REQUIRE_THROWS_AS(process_fidelity(m3, choi(identity_channel(2))),
                    std::invalid_argument);
}

TEST_CASE("Kraus validation") {
  // Not trace preserving.
  ComplexMatrix half = ComplexMatrix::identity(2) * cplx(0.5, 0.0);
  REQUIRE_THROWS_AS(KrausChannel({half}, 2, 2), std::invalid_argument);
  // Shape mismatch.
  REQUIRE_THROWS_AS(KrausChannel({ComplexMatrix::identity(3)}, 2, 2),
                    std::invalid_argument);
  // Zero operators get pruned.
  const KrausChannel pruned = amplitude_damping(0.0);
  REQUIRE(pruned.env_dim() == 1);
}
