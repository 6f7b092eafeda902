#include <doctest.h>

#include "fluidfrag/tensors.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using namespace fluidfrag;

TEST_CASE("to_chemist on a single orbital") {
    RawIntegrals raw;
    raw.n_orbitals = 1;
    raw.n_electrons = 2;
    raw.core_h = Eigen::MatrixXd::Constant(1, 1, -1.25);
    raw.eri = FourIndex(1);
    raw.eri(0, 0, 0, 0) = 0.675;
    raw.e_nuc = 0.7;

    const SpatialTensors t = to_chemist(raw);
    CHECK(t.g_tilde(0, 0, 0, 0) == doctest::Approx(0.3375).epsilon(1e-14));
    CHECK(t.h_tilde(0, 0) == doctest::Approx(-1.25 - 0.3375).epsilon(1e-14));
    CHECK(t.e_nuc == doctest::Approx(0.7));
}

TEST_CASE("to_chemist with zero eri reduces to core_h") {
    RawIntegrals raw;
    raw.n_orbitals = 3;
    raw.n_electrons = 2;
    raw.core_h = testutil::random_symmetric(3, 11);
    raw.eri = FourIndex(3);
    const SpatialTensors t = to_chemist(raw);
    CHECK((t.h_tilde - raw.core_h).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("reassembled Hamiltonian reproduces the RHF energy of h4") {
    // oracle: occupied-orbital trace formula on the raw MO integrals
    const RawIntegrals raw = parse_fcidump_file(testutil::fixture("h4.fcidump"));
    const int nocc = raw.n_electrons / 2;
    double e_trace = 0.0;
    for (int i = 0; i < nocc; ++i) {
        e_trace += 2.0 * raw.core_h(i, i);
        for (int j = 0; j < nocc; ++j)
            e_trace += 2.0 * raw.eri(i, i, j, j) - raw.eri(i, j, j, i);
    }
    e_trace += raw.e_nuc;

    const auto& p = testutil::load("h4.fcidump");
    const ProxyState hf = ground_state(p.hamiltonian, p.basis, ProxyKind::HF);
    CHECK(hf.energy + p.tensors.e_nuc == doctest::Approx(e_trace).epsilon(1e-8));
    // frozen from fixtures/PROVENANCE.md (independent SCF)
    CHECK(e_trace == doctest::Approx(-2.0985459370).epsilon(1e-8));
}

TEST_CASE("spin expansion of a scalar lambda") {
    Eigen::MatrixXd lam(1, 1);
    lam << 1.0;
    Eigen::MatrixXd u(1, 1);
    u << 1.0;
    const auto [lambda, uu] = spin_expand_fragment(lam, u);
    CHECK(lambda.rows() == 2);
    CHECK((lambda - Eigen::MatrixXd::Ones(2, 2)).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0));
    CHECK((uu - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0));
}

TEST_CASE("spin expansion of the identity rotation") {
    Eigen::MatrixXd u = Eigen::MatrixXd::Identity(2, 2);
    const auto [lambda, uu] =
        spin_expand_fragment(Eigen::MatrixXd::Zero(2, 2), u);
    CHECK((uu - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0));
    (void)lambda;
}

TEST_CASE("spin expansion block pattern for a random orthogonal matrix") {
    const Eigen::MatrixXd u = testutil::random_orthogonal(3, 5);
    const Eigen::MatrixXd lam = testutil::random_symmetric(3, 6);
    const auto [lambda, uu] = spin_expand_fragment(lam, u);
    CHECK(orthogonality_residual(uu) < 1e-10);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            CHECK(uu(2 * i, 2 * j) == doctest::Approx(u(i, j)));
            CHECK(uu(2 * i + 1, 2 * j + 1) == doctest::Approx(u(i, j)));
            CHECK(uu(2 * i, 2 * j + 1) == doctest::Approx(0.0));
            CHECK(uu(2 * i + 1, 2 * j) == doctest::Approx(0.0));
            for (int s = 0; s < 2; ++s)
                for (int t = 0; t < 2; ++t)
                    CHECK(lambda(2 * i + s, 2 * j + t) == doctest::Approx(lam(i, j)));
        }
}

TEST_CASE("spin expansion rejects a non-orthogonal rotation") {
    Eigen::MatrixXd u(2, 2);
    u << 1.0, 0.5, 0.0, 1.0;
    CHECK_THROWS_AS(spin_expand_fragment(Eigen::MatrixXd::Zero(2, 2), u), ValidationError);
}

TEST_CASE("spin expansion doubles each one-body eigenvalue") {
    const Eigen::MatrixXd h = testutil::random_symmetric(4, 7);
    const Eigen::MatrixXd hs = spin_expand_one_body(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(h), big(hs);
    for (int i = 0; i < 4; ++i) {
        CHECK(big.eigenvalues()(2 * i) == doctest::Approx(small.eigenvalues()(i)).epsilon(1e-12));
        CHECK(big.eigenvalues()(2 * i + 1) ==
              doctest::Approx(small.eigenvalues()(i)).epsilon(1e-12));
    }
}

TEST_CASE("parsed tensors keep their symmetries") {
    for (const char* name : {"h3plus.fcidump", "h4.fcidump"}) {
        const auto& p = testutil::load(name);
        CHECK(symmetry_residual(p.tensors.h_tilde) < 1e-12);
        CHECK(p.tensors.g_tilde.symmetry_residual() < 1e-12);
    }
}
