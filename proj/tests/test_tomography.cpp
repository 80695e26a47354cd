#include <catch2/catch_amalgamated.hpp>

#include "cohinfo/random.hpp"
#include "cohinfo/serialize.hpp"
#include "cohinfo/tomography.hpp"

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

int operator_space_rank(const ProjectorSet& ps) {
  // Rank of span{vec(Pi)} from the PSD moment matrix sum_i vec(Pi) vec(Pi)†.
  const int d = ps.dim;
  ComplexMatrix w(d * d, d * d);
  for (int s = 0; s < ps.setting_count(); ++s) {
    for (std::size_t o = 0; o < ps.settings[s].basis.size(); ++o) {
      const ComplexMatrix p = ps.projector(s, static_cast<int>(o));
      std::vector<cplx> v(static_cast<std::size_t>(d) * d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) v[static_cast<std::size_t>(i) * d + j] = p(i, j);
      for (int i = 0; i < d * d; ++i)
        for (int j = 0; j < d * d; ++j) w(i, j) += v[i] * std::conj(v[j]);
    }
  }
  int rank = 0;
  for (double lam : hermitian_eigenvalues(w))
    if (lam > 1e-9) ++rank;
  return rank;
}

}  // namespace

TEST_CASE("ic_projectors qubit probe directions") {
  const ProjectorSet ps = ic_projectors(2);
  REQUIRE(ps.setting_count() == 4);
  // |0>, |1>, |+>, |+i>
  const double s = 1.0 / std::sqrt(2.0);
  REQUIRE(std::abs(ps.probe_direction(0)[0] - cplx(1.0, 0.0)) < 1e-14);
  REQUIRE(std::abs(ps.probe_direction(1)[1] - cplx(1.0, 0.0)) < 1e-14);
  REQUIRE(std::abs(ps.probe_direction(2)[0] - cplx(s, 0.0)) < 1e-14);
  REQUIRE(std::abs(ps.probe_direction(2)[1] - cplx(s, 0.0)) < 1e-14);
  REQUIRE(std::abs(ps.probe_direction(3)[1] - cplx(0.0, s)) < 1e-14);
}

TEST_CASE("ic_projectors counting and completeness") {
  REQUIRE(ic_projectors(6).setting_count() == 36);
  REQUIRE_THROWS_AS(ic_projectors(1), std::invalid_argument);
  REQUIRE_THROWS_AS(ic_projectors(9), std::invalid_argument);

  for (int d : {2, 3, 6}) {
    const ProjectorSet ps = ic_projectors(d);
    for (int s = 0; s < ps.setting_count(); ++s) {
      ComplexMatrix sum(d, d);
      for (int o = 0; o < d; ++o) sum += ps.projector(s, o);
      sum -= ComplexMatrix::identity(d);
      REQUIRE(sum.frobenius_norm() < 1e-9);
    }
  }
}

TEST_CASE("ic_projectors span the operator space") {
  REQUIRE(operator_space_rank(ic_projectors(3)) == 9);
}

TEST_CASE("counts concentrate on the prepared basis state") {
  const ProjectorSet ps = ic_projectors(2);
  const CountRecord rec = simulate_counts(basis_state(0, 2), ps, 1000, 7);
  // Setting 0 is the computational basis with |0> first.
  REQUIRE(rec.counts[0][0] == 1000);
  REQUIRE(rec.counts[0][1] == 0);
}

TEST_CASE("counts follow the Born rule within multinomial bands") {
  const ProjectorSet ps = ic_projectors(2);
  const std::int64_t shots = 1000000;
  const CountRecord rec = simulate_counts(maximally_mixed(2), ps, shots, 11);
  for (int s = 0; s < ps.setting_count(); ++s) {
    for (int o = 0; o < 2; ++o) {
      const double freq = static_cast<double>(rec.counts[s][o]) / shots;
      const double sigma = std::sqrt(0.25 / shots);
      REQUIRE(std::abs(freq - 0.5) < 3.0 * sigma + 1e-6);
    }
  }
}

TEST_CASE("count simulation is deterministic in the seed") {
  const ProjectorSet ps = ic_projectors(3);
  SplitMix64 rng(12);
  const DensityMatrix rho = random_density_matrix(3, rng);
  const CountRecord a = simulate_counts(rho, ps, 5000, 99);
  const CountRecord b = simulate_counts(rho, ps, 5000, 99);
  REQUIRE(a.counts == b.counts);
  const CountRecord c = simulate_counts(rho, ps, 5000, 100);
  REQUIRE(a.counts != c.counts);
}

TEST_CASE("broken settings are rejected") {
  ProjectorSet ps = ic_projectors(2);
  ps.settings[0].basis.pop_back();  // no longer sums to identity
  REQUIRE_THROWS_AS(simulate_counts(maximally_mixed(2), ps, 100, 1),
                    std::runtime_error);
}

TEST_CASE("MLE fixes the maximally mixed state from exact counts") {
  const ProjectorSet ps = ic_projectors(2);
  CountRecord rec;
  rec.dim = 2;
  rec.shots_per_setting = 1000;
  rec.seed = 0;
  for (int s = 0; s < ps.setting_count(); ++s) {
    const std::vector<double> p = outcome_probabilities(maximally_mixed(2), ps, s);
    std::vector<std::int64_t> counts(p.size());
    for (std::size_t o = 0; o < p.size(); ++o)
      counts[o] = static_cast<std::int64_t>(std::llround(p[o] * 1000));
    rec.counts.push_back(std::move(counts));
  }
  const ReconstructionResult res = mle_reconstruct(rec, ps);
  REQUIRE(res.converged);
  REQUIRE(max_abs_diff(res.rho_hat.mat, maximally_mixed(2).mat) < 1e-6);
}

TEST_CASE("MLE reconstructs a pure state to high fidelity") {
  const ProjectorSet ps = ic_projectors(2);
  const DensityMatrix truth = basis_state(0, 2);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const CountRecord rec = simulate_counts(truth, ps, 100000, seed);
    const ReconstructionResult res = mle_reconstruct(rec, ps);
    REQUIRE(fidelity(res.rho_hat, truth) >= 0.999);
  }
}

TEST_CASE("MLE reconstructs the six-dimensional entangled input") {
  const DensityMatrix truth = family_rho_r(0.44, 0.07, 0.27).reshaped({6});
  const ProjectorSet ps = ic_projectors(6);
  const CountRecord rec = simulate_counts(truth, ps, 100000, 5);
  const ReconstructionResult res = mle_reconstruct(rec, ps);
  REQUIRE(fidelity(res.rho_hat, truth) >= 0.99);
}

TEST_CASE("MLE likelihood history is non-decreasing") {
  const ProjectorSet ps = ic_projectors(3);
  SplitMix64 rng(21);
  const DensityMatrix truth = random_density_matrix(3, rng);
  const CountRecord rec = simulate_counts(truth, ps, 20000, 3);
  const ReconstructionResult res = mle_reconstruct(rec, ps);
  REQUIRE(res.ll_history.size() >= 2);
  for (std::size_t k = 1; k < res.ll_history.size(); ++k)
    REQUIRE(res.ll_history[k] >= res.ll_history[k - 1]);
}

TEST_CASE("MLE input validation") {
  const ProjectorSet ps = ic_projectors(2);
  CountRecord rec = simulate_counts(maximally_mixed(2), ps, 100, 1);
  rec.counts[0][0] += 1;  // breaks the per-setting sum
  REQUIRE_THROWS_AS(mle_reconstruct(rec, ps), std::invalid_argument);
}

TEST_CASE("Monte Carlo spread vanishes when resampling is disabled") {
  const ProjectorSet ps = ic_projectors(2);
  const CountRecord rec = simulate_counts(maximally_mixed(2), ps, 1000, 17);
  REQUIRE(monte_carlo_errors(rec, ps, 10, /*resample=*/false) == 0.0);
  REQUIRE_THROWS_AS(monte_carlo_errors(rec, ps, 1), std::invalid_argument);
}

TEST_CASE("Monte Carlo entropy spread is small but nonzero") {
  const ProjectorSet ps = ic_projectors(2);
  const CountRecord rec = simulate_counts(maximally_mixed(2), ps, 10000, 23);
  const double std_s = monte_carlo_errors(rec, ps, 100);
  REQUIRE(std_s > 0.0);
  REQUIRE(std_s < 0.05);
}

TEST_CASE("Monte Carlo spread shrinks with more shots") {
  const ProjectorSet ps = ic_projectors(2);
  SplitMix64 rng(29);
  int wins = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix truth = random_density_matrix(2, rng);
    const CountRecord low = simulate_counts(truth, ps, 1000, 100 + trial);
    const CountRecord high = simulate_counts(truth, ps, 10000, 200 + trial);
    const double s_low = monte_carlo_std(
        low, ps, 50, [](const DensityMatrix& r) { return von_neumann_entropy(r); });
    const double s_high = monte_carlo_std(
        high, ps, 50, [](const DensityMatrix& r) { return von_neumann_entropy(r); });
    if (s_high < s_low) ++wins;
  }
  REQUIRE(wins > 10);
}

TEST_CASE("noiseless process tomography is exact") {
  const ProcessTomographyResult res =
      process_tomography(to_kraus(platypus(3)), 3, 0, 1);
  REQUIRE(res.fidelity_to_truth == Approx(1.0).margin(1e-6));
}

TEST_CASE("process tomography at finite shots stays accurate") {
  const ProcessTomographyResult res =
      process_tomography(to_kraus(platypus(3)), 3, 100000, 7);
  REQUIRE(res.fidelity_to_truth >= 0.99);
}

TEST_CASE("MLE reports hitting the iteration cap without failing") {
  const KrausChannel ch = to_kraus(platypus(3));
  const ProjectorSet ps = ic_projectors(3);
  std::vector<cplx> probe = {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0};
  const DensityMatrix out = apply(ch, density_from_pure(PureState(probe, {3})));
  const CountRecord rec = simulate_counts(out, ps, 100000, 7);
  const ReconstructionResult res = mle_reconstruct(rec, ps, /*max_iter=*/3);
  REQUIRE_FALSE(res.converged);
  REQUIRE(res.iterations == 3);
  // The estimate is still a valid state and the default run stays accurate.
  REQUIRE(res.rho_hat.mat.trace().real() == Approx(1.0).margin(1e-9));
  REQUIRE(fidelity(mle_reconstruct(rec, ps).rho_hat, out) >= 0.99);
}

TEST_CASE("process tomography validates the probe dimension") {
  REQUIRE_THROWS_AS(process_tomography(to_kraus(platypus(3)), 4, 100, 1),
                    std::invalid_argument);
}

TEST_CASE("count records round-trip through JSON") {
  const ProjectorSet ps = ic_projectors(3);
  SplitMix64 rng(31);
  const DensityMatrix rho = random_density_matrix(3, rng);
  const CountRecord rec = simulate_counts(rho, ps, 2500, 41);
  const nlohmann::json j = counts_to_json(rec, ps);
  const auto [rec2, ps2] = counts_from_json(j);
  REQUIRE(rec2.counts == rec.counts);
  REQUIRE(rec2.dim == rec.dim);
  REQUIRE(rec2.shots_per_setting == rec.shots_per_setting);
  REQUIRE(rec2.seed == rec.seed);
  REQUIRE(ps2.setting_count() == ps.setting_count());
  for (int s = 0; s < ps.setting_count(); ++s)
    for (int o = 0; o < ps.dim; ++o)
      for (int i = 0; i < ps.dim; ++i)
        REQUIRE(std::abs(ps2.settings[s].basis[o][i] - ps.settings[s].basis[o][i]) <
                1e-15);
  // Reconstruction from the deserialized pair works identically.
  const ReconstructionResult a = mle_reconstruct(rec, ps);
  const ReconstructionResult b = mle_reconstruct(rec2, ps2);
  REQUIRE(max_abs_diff(a.rho_hat.mat, b.rho_hat.mat) < 1e-12);
}

TEST_CASE("reconstruction improves monotonically with shots") {
  const ProjectorSet ps = ic_projectors(3);
  SplitMix64 rng(47);
  const DensityMatrix truth = random_density_matrix(3, rng);
  std::vector<double> median_infidelity;
  for (std::int64_t shots : {1000, 10000, 100000}) {
    std::vector<double> infid;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const CountRecord rec = simulate_counts(truth, ps, shots, seed);
      infid.push_back(1.0 - fidelity(mle_reconstruct(rec, ps).rho_hat, truth));
    }
    std::sort(infid.begin(), infid.end());
    median_infidelity.push_back(infid[2]);
  }
  REQUIRE(median_infidelity[1] < median_infidelity[0]);
  REQUIRE(median_infidelity[2] < median_infidelity[1]);
}
