#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <sstream>

#include "mixspin/chain_model.hpp"
#include "mixspin/error.hpp"
#include "oracle.hpp"

using namespace mixspin;

TEST_CASE("spec validation") {
  CHECK_NOTHROW((ChainSpec{8, 1.0, 0.5}.validate()));
  CHECK_THROWS_AS((ChainSpec{6, 1.0, 0.5}.validate()), ValidationError);
  CHECK_THROWS_AS((ChainSpec{0, 1.0, 0.5}.validate()), ValidationError);
  CHECK_THROWS_AS((ChainSpec{8, 1.0, -0.1}.validate()), ValidationError);
  CHECK_THROWS_AS((ChainSpec{8, 0.0, 0.5}.validate()), ValidationError);
  CHECK_THROWS_AS((ChainSpec{8, 1.0, 0.5, Boundary::open}.validate()), ValidationError);
}

TEST_CASE("site spins repeat 1/2, 1/2, 1, 1") {
  const std::vector<int> expected{1, 1, 2, 2, 1, 1, 2, 2};
  for (int i = 0; i < 8; ++i) CHECK(site_spin(i).twice_s == expected[static_cast<std::size_t>(i)]);
}

TEST_CASE("bonds alternate J1 and J2 around the ring") {
  const auto bonds = make_bonds({8, 1.0, 0.3});
  REQUIRE(bonds.size() == 8);
  for (std::size_t b = 0; b < bonds.size(); ++b) {
    CHECK(bonds[b].site_i == static_cast<int>(b));
    CHECK(bonds[b].site_j == static_cast<int>((b + 1) % 8));
    CHECK(bonds[b].coupling == doctest::Approx(b % 2 == 0 ? 1.0 : 0.3));
  }
}

TEST_CASE("pairs are reported 1-based") {
  const auto p = SitePair::from_one_based(4, 5);
  CHECK(p.first == 3);
  CHECK(p.to_string() == "(4,5)");
  CHECK_NOTHROW((validate_pair({8, 1.0, 0.0}, p)));
  try {
    validate_pair({4, 1.0, 0.0}, p);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("(4,5)") != std::string::npos);
  }
  CHECK_THROWS_AS((validate_pair({8, 1.0, 0.0}, SitePair{2, 2})), ValidationError);
}

TEST_CASE("sector enumeration") {
  for (const int n : {4, 8}) {
    const ChainSpec spec{n, 1.0, 0.5};
    const ProductSpace space(spec);
    CHECK(space.dimension() == static_cast<std::uint64_t>(std::pow(6, n / 2)));
    std::uint64_t total = 0;
    for (const int label : sector_labels(spec)) {
      const auto basis = enumerate_sector(spec, label);
      total += basis.size();
      CHECK(std::is_sorted(basis.states.begin(), basis.states.end()));
      for (std::size_t k = 0; k < basis.size(); ++k) {
        CHECK(space.twice_total_sz(basis.states[k]) == label);
        CHECK(basis.find(basis.states[k]).value() == k);
      }
    }
    CHECK(total == space.dimension());
    CHECK(enumerate_sector(spec, space.max_twice_sz()).size() == 1);
    CHECK(space.max_twice_sz() == 3 * n / 2);
  }
  CHECK_THROWS_AS((enumerate_sector({4, 1.0, 0.0}, 8)), ValidationError);
}

TEST_CASE("full Hamiltonian matches the Kronecker-product reference") {
  for (const double alpha : {0.0, 0.5, 1.0, 1.3}) {
    const ChainSpec spec{4, 1.0, alpha};
    const auto h = build_hamiltonian(spec);
    CHECK(h.is_symmetric());
    CHECK((h.to_dense() - oracle::hamiltonian(4, alpha)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("Hamiltonian is traceless, and sector blocks are projections of the full matrix") {
  const ChainSpec spec{8, 1.0, 0.7};
  const auto full = build_hamiltonian(spec);
  CHECK(full.trace() == doctest::Approx(0.0).scale(1.0));
  CHECK(full.is_symmetric());
  const Eigen::MatrixXd dense = full.to_dense();
  std::uint64_t sector_nonzeros = 0;
  for (const int label : sector_labels(spec)) {
    const auto basis = enumerate_sector(spec, label);
    const auto block = build_hamiltonian(spec, &basis);
    sector_nonzeros += block.nonzeros();
    for (const auto& e : block.entries()) {
      CHECK(e.value == dense(static_cast<Eigen::Index>(basis.states[e.row]),
                             static_cast<Eigen::Index>(basis.states[e.col])));
    }
  }
  CHECK(sector_nonzeros == full.nonzeros());
}

TEST_CASE("decoupled dimers at alpha = 0") {
  const ChainSpec spec{4, 1.0, 0.0};
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_hamiltonian(spec).to_dense());
  CHECK(es.eigenvalues()(0) == doctest::Approx(-2.75));
}

TEST_CASE("translation by one cell commutes with H") {
  const ChainSpec spec{8, 1.0, 0.6};
  const ProductSpace space(spec);
  const auto h = build_hamiltonian(spec);
  const auto dim = space.dimension();
  const auto shift = [&](std::uint64_t x) {
    std::uint64_t y = 0;
    for (int s = 0; s < 8; ++s) y += static_cast<std::uint64_t>(space.digit(x, s)) * space.stride((s + 4) % 8);
    return y;
  };
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(dim), 0.1, 1.7);
  v = v.array().sin();
  const auto apply_shift = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(x.size());
    for (std::uint64_t k = 0; k < dim; ++k) y(static_cast<Eigen::Index>(shift(k))) = x(static_cast<Eigen::Index>(k));
    return y;
  };
  CHECK((h.apply(apply_shift(v)) - apply_shift(h.apply(v))).norm() < 1e-12);
}

TEST_CASE("dense cap") {
  const ChainSpec spec{12, 1.0, 0.5};
  try {
    build_hamiltonian(spec);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    CHECK(what.find("46656") != std::string::npos);
    CHECK(what.find("10000") != std::string::npos);
  }
  const auto basis = enumerate_sector(spec, 0);
  CHECK_NOTHROW((build_hamiltonian(spec, &basis, {1'000'000})));
}

TEST_CASE("key=value spec files") {
  std::istringstream good("# ring\nn_sites = 12\nalpha=0.768\nboundary=periodic\n");
  const auto spec = parse_chain_spec(good);
  CHECK(spec.n_sites == 12);
  CHECK(spec.alpha == 0.768);
  std::istringstream round_trip(format_chain_spec(spec));
  CHECK(parse_chain_spec(round_trip).canonical() == spec.canonical());

  std::istringstream unknown("n_sites=8\ncolor=blue\n");
  CHECK_THROWS_AS((parse_chain_spec(unknown)), ValidationError);
  std::istringstream malformed("n_sites=eight\n");
  CHECK_THROWS_AS((parse_chain_spec(malformed)), ValidationError);
  std::istringstream open("n_sites=8\nboundary=open\n");
  CHECK_THROWS_AS((parse_chain_spec(open)), ValidationError);
  std::istringstream no_equals("n_sites 8\n");
  CHECK_THROWS_AS((parse_chain_spec(no_equals)), ValidationError);
}

TEST_CASE("provenance hash is stable") {
  CHECK(hex64(fnv1a("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a("a")) == "af63dc4c8601ec8c");
  CHECK(ChainSpec{8, 1.0, 0.5}.canonical() != ChainSpec{8, 1.0, 0.50000001}.canonical());
}
