#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "golden.hpp"
#include "mixspin/error.hpp"
#include "mixspin/exact_engine.hpp"
#include "oracle.hpp"

using namespace mixspin;

namespace {

const SpectralDecomposition& decomposition_of(double alpha) {
  static std::map<double, SpectralDecomposition> cache;
  auto it = cache.find(alpha);
  if (it == cache.end()) it = cache.emplace(alpha, diagonalize(ChainSpec{8, 1.0, alpha})).first;
  return it->second;
}

// Embeds a sector vector into the full product space.
Eigen::VectorXd embed(const SectorBasis& basis, const Eigen::VectorXd& v, std::uint64_t dim) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t k = 0; k < basis.size(); ++k) out(static_cast<Eigen::Index>(basis.states[k])) = v(static_cast<Eigen::Index>(k));
  return out;
}

}  // namespace

TEST_CASE("full spectrum against golden energies") {
  CHECK(diagonalize(ChainSpec{4, 1.0, 1.0}).ground_energy() ==
        doctest::Approx(golden::value(4, 1.0, "ground_energy")).epsilon(1e-12));
  const auto& d = decomposition_of(0.5);
  CHECK(d.size() == 1296);
  CHECK(d.mode == SpectrumMode::full);
  CHECK(d.ground_energy() == doctest::Approx(golden::value(8, 0.5, "ground_energy")).epsilon(1e-12));
  const auto levels = energy_levels(d);
  REQUIRE(levels.size() > 2);
  CHECK(levels[0].degeneracy == 1);
  CHECK(levels[1].degeneracy == golden::value(8, 0.5, "first_excited_degeneracy"));
  CHECK(levels[1].energy - levels[0].energy == doctest::Approx(golden::value(8, 0.5, "gap")).epsilon(1e-10));
  for (std::size_t k = 1; k < d.size(); ++k) CHECK(d.eigenvalues[k] >= d.eigenvalues[k - 1]);
  for (const double r : d.residuals) CHECK(r < 1e-10);
}

TEST_CASE("eigenvalues sum to the trace and eigenvectors are orthonormal within sectors") {
  const auto& d = decomposition_of(0.5);
  double sum = 0.0;
  for (const double e : d.eigenvalues) sum += e;
  CHECK(sum == doctest::Approx(0.0).scale(1.0));
  for (std::size_t k = 0; k < d.size(); k += 97) {
    CHECK(d.eigenvectors[k].norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("Lanczos matches the dense sector spectrum, degenerate levels included") {
  const ChainSpec spec{8, 1.0, 1.0};
  const auto& dense = decomposition_of(1.0);
  std::vector<double> sector0;
  for (std::size_t k = 0; k < dense.size(); ++k) {
    if (dense.twice_sz[k] == 0) sector0.push_back(dense.eigenvalues[k]);
  }
  const auto lanczos = lanczos_lowest(spec, 12, 0);
  REQUIRE(lanczos.size() == 12);
  CHECK(lanczos.mode == SpectrumMode::truncated);
  CHECK(lanczos.su2_folded());
  for (std::size_t k = 0; k < 12; ++k) {
    CHECK(lanczos.eigenvalues[k] == doctest::Approx(sector0[k]).epsilon(1e-10));
    CHECK(lanczos.residuals[k] < 1e-8);
  }
  CHECK(lanczos.twice_total_spin[0] == 0);
  CHECK(lanczos.multiplicity(1) == 3);
  CHECK_THROWS_AS(lanczos_lowest(spec, 0, 0), ValidationError);
  CHECK_THROWS_AS(lanczos_lowest(spec, 12, 99), ValidationError);
}

TEST_CASE("sector reduction agrees with the index-loop partial trace") {
  const ChainSpec spec{8, 1.0, 0.3};
  const auto basis = enumerate_sector(spec, 2);
  Eigen::VectorXd v(static_cast<Eigen::Index>(basis.size()));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = std::cos(0.37 * static_cast<double>(k * k) + 0.1);
  v.normalize();
  const auto full = embed(basis, v, ProductSpace(spec).dimension());
  const auto ts = oracle::twice_spins(8);
  for (const auto [i, j] : {std::pair{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 5}, {6, 2}}) {
    const auto rho = reduce_state_to_pair(spec, basis, v, SitePair{i, j});
    CHECK((rho.matrix - oracle::reduce_pure(ts, full, i, j)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(rho.trace() == doctest::Approx(1.0));
  }
}

TEST_CASE("thermal pair density matrices against the oracle (N=4)") {
  const ChainSpec spec{4, 1.0, 0.8};
  const auto d = diagonalize(spec);
  const auto sp = oracle::solve(oracle::hamiltonian(4, 0.8));
  const auto ts = oracle::twice_spins(4);
  for (const double beta : {0.1, 1.0, 4.0, 50.0, -1.0}) {
    const auto thermal = beta < 0 ? ThermalSpec::ground() : ThermalSpec{beta};
    for (const auto [i, j] : {std::pair{0, 1}, {1, 2}, {2, 3}, {0, 2}}) {
      const auto rho = reduce_to_pair(d, thermal, SitePair{i, j});
      CAPTURE(beta);
      CHECK((rho.matrix - oracle::reduce_thermal(ts, sp, beta, i, j)).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(thermal_energy(d, thermal) ==
          doctest::Approx(oracle::expectation(sp, beta, oracle::hamiltonian(4, 0.8))).epsilon(1e-12));
  }
}

TEST_CASE("thermal correlator golden value") {
  const auto& d = decomposition_of(0.768);
  const auto c = thermal_correlator(d, ThermalSpec{16.0}, SitePair{0, 1});
  CHECK(c.value == doctest::Approx(golden::value(8, 0.768, "corr_1_2_beta16")).epsilon(1e-10));
  CHECK(c.error == 0.0);
  CHECK(c.source == EstimateSource::ed);
}

TEST_CASE("energy equals the bond sum of correlators") {
  const auto& d = decomposition_of(1.0);
  const ChainSpec spec{8, 1.0, 1.0};
  for (const double beta : {0.5, 4.0, 16.0, std::numeric_limits<double>::infinity()}) {
    const ThermalSpec thermal{beta};
    double bond_sum = 0.0;
    for (const auto& b : make_bonds(spec)) {
      bond_sum += b.coupling * thermal_correlator(d, thermal, SitePair{b.site_i, b.site_j}).value;
    }
    CHECK(bond_sum == doctest::Approx(thermal_energy(d, thermal)).epsilon(1e-11));
  }
  CHECK(thermal_correlator(d, ThermalSpec::ground(), SitePair{0, 1}).value ==
        doctest::Approx(golden::value(8, 1.0, "ground_corr_1_2")).epsilon(1e-10));
  CHECK(thermal_correlator(d, ThermalSpec::ground(), SitePair{1, 2}).value ==
        doctest::Approx(golden::value(8, 1.0, "ground_corr_2_3")).epsilon(1e-10));
}

TEST_CASE("singlet ground state sum rule") {
  const auto& d = decomposition_of(0.5);
  for (const int i : {0, 2}) {
    double sum = site_spin(i).s() * (site_spin(i).s() + 1);
    for (int j = 0; j < 8; ++j) {
      if (j != i) sum += thermal_correlator(d, ThermalSpec::ground(), SitePair{i, j}).value;
    }
    CHECK(sum == doctest::Approx(0.0).scale(1.0));
  }
}

TEST_CASE("ground-state and high-temperature limits") {
  const auto& d = decomposition_of(0.5);
  PairEnsemble ens(d, SitePair{1, 2});
  CHECK(ens.correlator(ThermalSpec{1e4}).value == doctest::Approx(ens.correlator(ThermalSpec::ground()).value).epsilon(1e-9));
  CHECK(std::abs(ens.correlator(ThermalSpec{1e-9}).value) < 1e-8);
  CHECK(ThermalSpec::from_kbt(0.0).is_ground());
  CHECK(ThermalSpec::from_kbt(0.25).beta == 4.0);
  CHECK_THROWS_AS(ThermalSpec::from_kbt(-1.0), ValidationError);
}

TEST_CASE("SU(2)-folded Lanczos thermal sums match full ED") {
  const auto& full = decomposition_of(0.768);
  const auto lanczos = lanczos_lowest(ChainSpec{8, 1.0, 0.768}, 40, 0);
  for (const double beta : {8.0, 16.0, 40.0}) {
    for (const auto pair : {SitePair{0, 1}, SitePair{1, 2}, SitePair{2, 3}}) {
      const auto a = reduce_to_pair(full, ThermalSpec{beta}, pair);
      const auto b = reduce_to_pair(lanczos, ThermalSpec{beta}, pair);
      CAPTURE(beta);
      CHECK((a.matrix - b.matrix).cwiseAbs().maxCoeff() < 1e-7);
    }
    CHECK(thermal_energy(lanczos, ThermalSpec{beta}) == doctest::Approx(thermal_energy(full, ThermalSpec{beta})).epsilon(1e-7));
  }
  CHECK_THROWS_AS(reduce_to_pair(lanczos, ThermalSpec{0.5}, SitePair{0, 1}), NumericalError);
}

TEST_CASE("SU(2) twirl keeps invariant states and projects others") {
  const auto& d = decomposition_of(0.5);
  const auto rho = reduce_to_pair(d, ThermalSpec{2.0}, SitePair{1, 2});
  CHECK((su2_twirl(rho).matrix - rho.matrix).cwiseAbs().maxCoeff() < 1e-12);
  PairDensityMatrix up{kSpinHalf, kSpinOne, Eigen::MatrixXd::Zero(6, 6)};
  up.matrix(0, 0) = 1.0;
  const auto twirled = su2_twirl(up);
  CHECK(twirled.trace() == doctest::Approx(1.0));
  CHECK((twirled.matrix - Eigen::MatrixXd::Identity(6, 6) / 6.0).cwiseAbs().maxCoeff() > 1e-3);
  CHECK(pair_correlator(twirled) == doctest::Approx(pair_correlator(up)));
}

TEST_CASE("excited multiplet: subtraction against direct construction") {
  for (const double alpha : {0.5, 1.0}) {
    const auto& d = decomposition_of(alpha);
    const ChainSpec spec{8, 1.0, alpha};
    for (const auto pair : {SitePair{0, 1}, SitePair{1, 2}, SitePair{2, 3}}) {
      const auto sub = excited_pair_dm_by_subtraction(d, pair, default_beta_probe(d));
      const auto direct = excited_pair_dm_direct(spec, pair);
      CAPTURE(alpha);
      CHECK(sub.rho.trace() == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(sub.multiplet_dim == 3);
      CHECK(direct.multiplet_dim == 3);
      CHECK(sub.excited_energy == doctest::Approx(direct.excited_energy).epsilon(1e-10));
      CHECK(sub.contamination <= kMaxExcitedContamination);
      CHECK((sub.rho.matrix - direct.rho.matrix).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
  const auto& d = decomposition_of(0.5);
  CHECK_THROWS_AS(excited_pair_dm_by_subtraction(d, SitePair{0, 1}, 1.0), NumericalError);
  CHECK_THROWS_AS(excited_pair_dm_by_subtraction(d, SitePair{0, 1}, 5000.0), NumericalError);
  CHECK_THROWS_AS(excited_pair_dm_by_subtraction(d, SitePair{0, 1}, -1.0), ValidationError);
}

TEST_CASE("spin gap") {
  CHECK(spin_gap(ChainSpec{4, 1.0, 0.0}).gap == doctest::Approx(1.0).epsilon(1e-10));
  const auto hash = golden::hash_of(8, 0.0);
  double best = 1e9, best_alpha = 0.0;
  for (int k = 1; k <= 12; ++k) {
    const double alpha = 0.1 * k;
    char name[32];
    std::snprintf(name, sizeof name, "gap_alpha_%.1f", alpha);
    const auto gap = spin_gap(ChainSpec{8, 1.0, alpha});
    CHECK(gap.gap >= 0.0);
    CHECK(gap.gap == doctest::Approx(golden::value(hash, name)).epsilon(1e-9));
    if (gap.gap < best) best = gap.gap, best_alpha = alpha;
  }
  CHECK(best_alpha == doctest::Approx(golden::value(hash, "gap_argmin_alpha_grid")));
  CHECK(best_alpha > 0.1);
  CHECK(best_alpha < 1.2);
}

TEST_CASE("dense path refuses large spaces with a clear message") {
  try {
    diagonalize(ChainSpec{12, 1.0, 0.5});
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    CHECK(what.find("46656") != std::string::npos);
    CHECK(what.find("10000") != std::string::npos);
  }
}
