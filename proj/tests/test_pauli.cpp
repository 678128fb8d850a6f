#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "varqec/pauli.hpp"

using namespace varqec;

TEST_CASE("Pauli string parsing and formatting", "[pauli]") {
    const auto p = PauliString::parse("XZZXI");
    REQUIRE(p.n_qubits() == 5);
    REQUIRE(p.letter(0) == Pauli::X);
    REQUIRE(p.letter(4) == Pauli::I);
    REQUIRE(p.str() == "XZZXI");
    REQUIRE(p.phase_pow() == 0);

    REQUIRE(PauliString::parse("xzzxi").str() == "XZZXI");
    REQUIRE_THROWS_AS(PauliString::parse("XZ+ZXI"), std::invalid_argument);
    REQUIRE_THROWS_AS(PauliString::parse("-XZZXI"), std::invalid_argument);
    REQUIRE_THROWS_AS(PauliString::parse(""), std::invalid_argument);
}

TEST_CASE("single-letter product table", "[pauli]") {
    auto X = PauliString::parse("X"), Y = PauliString::parse("Y"), Z = PauliString::parse("Z");
    REQUIRE((X * Y).str() == "+iZ");
    REQUIRE((Y * X).str() == "-iZ");
    REQUIRE((Y * Z).str() == "+iX");
    REQUIRE((Z * Y).str() == "-iX");
    REQUIRE((Z * X).str() == "+iY");
    REQUIRE((X * Z).str() == "-iY");
    REQUIRE((X * X).str() == "I");
    REQUIRE((Y * Y).str() == "I");
}

TEST_CASE("products match dense matrices", "[pauli]") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + int(rng() % 4);
        const auto a = oracles::random_pauli(n, rng, false);
        const auto b = oracles::random_pauli(n, rng, false);
        const auto c = oracles::random_pauli(n, rng, false);
        const auto ab = a * b;
        REQUIRE((oracles::pauli_matrix(ab) - oracles::pauli_matrix(a) * oracles::pauli_matrix(b))
                    .cwiseAbs()
                    .maxCoeff() < 1e-14);
        // associativity
        REQUIRE(((a * b) * c) == (a * (b * c)));
    }
}

TEST_CASE("commutation agrees with dense commutator", "[pauli]") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 80; ++trial) {
        const int n = 1 + int(rng() % 4);
        const auto a = oracles::random_pauli(n, rng);
        const auto b = oracles::random_pauli(n, rng);
        const Eigen::MatrixXcd ma = oracles::pauli_matrix(a), mb = oracles::pauli_matrix(b);
        const Eigen::MatrixXcd comm = ma * mb - mb * ma;
        REQUIRE(a.commutes_with(b) == (comm.cwiseAbs().maxCoeff() < 1e-12));
    }
}

TEST_CASE("Hermitian strings square to the identity", "[pauli]") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 40; ++trial) {
        const auto p = oracles::random_pauli(1 + int(rng() % 5), rng, true);
        const auto sq = p * p;
        REQUIRE(sq.is_identity_letters());
        REQUIRE(sq.phase_pow() == 0);
    }
}

TEST_CASE("weight and letter ordering", "[pauli]") {
    REQUIRE(PauliString::parse("IXIYZ").weight() == 3);
    REQUIRE(PauliString::parse("IIIII").weight() == 0);
    REQUIRE(PauliString::parse("IXIYY").letters_less(PauliString::parse("IYYIX")));
    REQUIRE_FALSE(PauliString::parse("ZZZZZ").letters_less(PauliString::parse("XXXXX")));
}
