#include <doctest.h>

#include <sstream>

#include "fluidfrag/fcidump.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using namespace fluidfrag;

namespace {
const char* kTiny =
    "&FCI NORB=1,NELEC=2,MS2=0,\n"
    "  ORBSYM=1,\n"
    "  ISYM=1,\n"
    "&END\n"
    " 0.675 1 1 1 1\n"
    " -1.25 1 1 0 0\n"
    " 0.7 0 0 0 0\n";
}

TEST_CASE("parse a minimal file") {
    const RawIntegrals raw = parse_fcidump_string(kTiny);
    CHECK(raw.n_orbitals == 1);
    CHECK(raw.n_electrons == 2);
    CHECK(raw.e_nuc == doctest::Approx(0.7));
    CHECK(raw.core_h(0, 0) == doctest::Approx(-1.25));
    CHECK(raw.eri(0, 0, 0, 0) == doctest::Approx(0.675));
}

TEST_CASE("one line fills all eight symmetry images") {
    const RawIntegrals raw = parse_fcidump_string(
        "&FCI NORB=2,NELEC=2,&END\n"
        " 0.1 1 2 1 1\n");
    CHECK(raw.eri(0, 1, 0, 0) == doctest::Approx(0.1));
    CHECK(raw.eri(1, 0, 0, 0) == doctest::Approx(0.1));
    CHECK(raw.eri(0, 0, 0, 1) == doctest::Approx(0.1));
    CHECK(raw.eri(0, 0, 1, 0) == doctest::Approx(0.1));
    CHECK(raw.eri.symmetry_residual() == doctest::Approx(0.0));
}

TEST_CASE("header errors name the line") {
    CHECK_THROWS_WITH_AS(parse_fcidump_string("&FCI NELEC=2,&END\n"),
                         doctest::Contains("missing NORB"), ParseError);
    CHECK_THROWS_AS(parse_fcidump_string("&FCI NORB=2,NELEC=2,\n 0.1 1 1 1 1\n"), ParseError);
}

TEST_CASE("out-of-range index is a bounds error") {
    CHECK_THROWS_WITH_AS(parse_fcidump_string("&FCI NORB=2,NELEC=2,&END\n 0.1 3 1 1 1\n"),
                         doctest::Contains("outside [0, 2]"), ParseError);
}

TEST_CASE("inconsistent duplicate entries are a conflict error") {
    CHECK_THROWS_WITH_AS(parse_fcidump_string("&FCI NORB=2,NELEC=2,&END\n"
                                              " 0.1 1 2 1 1\n"
                                              " 0.2 2 1 1 1\n"),
                         doctest::Contains("duplicate"), ParseError);
    // consistent duplicates are fine
    const RawIntegrals raw = parse_fcidump_string(
        "&FCI NORB=2,NELEC=2,&END\n"
        " 0.1 1 2 1 1\n"
        " 0.1 2 1 1 1\n");
    CHECK(raw.eri(0, 1, 0, 0) == doctest::Approx(0.1));
}

TEST_CASE("unsupported index patterns are rejected") {
    CHECK_THROWS_AS(parse_fcidump_string("&FCI NORB=2,NELEC=2,&END\n 0.1 1 0 0 0\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_fcidump_string("&FCI NORB=2,NELEC=2,&END\n 0.1 1 2 3 0\n"),
                    ParseError);
}

TEST_CASE("round-trip through the writer is bit-identical") {
    const RawIntegrals raw = parse_fcidump_file(testutil::fixture("h4.fcidump"));
    std::ostringstream buf;
    write_fcidump(buf, raw);
    const RawIntegrals again = parse_fcidump_string(buf.str());
    CHECK(again.n_orbitals == raw.n_orbitals);
    CHECK(again.n_electrons == raw.n_electrons);
    CHECK(again.e_nuc == raw.e_nuc);
    CHECK((again.core_h - raw.core_h).cwiseAbs().maxCoeff() == 0.0);
    for (size_t i = 0; i < raw.eri.data().size(); ++i)
        CHECK(again.eri.data()[i] == raw.eri.data()[i]);
}

TEST_CASE("h3plus FCI ground energy matches the dense oracle") {
    const auto& p = testutil::load("h3plus.fcidump");
    const Eigen::MatrixXd h_full = oracle::spatial_hamiltonian(p.tensors);
    const Eigen::MatrixXd h_sector = oracle::sector_matrix(h_full, *p.basis);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h_sector);

    const ProxyState fci = ground_state(p.hamiltonian, p.basis, ProxyKind::FCI);
    CHECK(fci.energy == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-8));
    // frozen from fixtures/PROVENANCE.md (independent dense FCI)
    CHECK(fci.energy + p.tensors.e_nuc == doctest::Approx(-1.2248766178).epsilon(1e-8));
}
