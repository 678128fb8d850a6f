#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "varqec/hamiltonian.hpp"

using namespace varqec;

namespace {

DensityMatrix dm_from(const Eigen::MatrixXcd& m, int n) {
    DensityMatrix d;
    d.n_qubits = n;
    d.rho = m;
    return d;
}

}  // namespace

TEST_CASE("uniform-normalized spectra", "[hamiltonian]") {
    const auto five = build(five_qubit_code(), LogicalTarget::zero());
    REQUIRE(five.terms.size() == 5);
    REQUIRE(five.e0 == Catch::Approx(-1.0));
    REQUIRE(five.e1 == Catch::Approx(-0.6));

    const auto steane = build(steane_code(), LogicalTarget::zero());
    REQUIRE(steane.terms.size() == 7);
    REQUIRE(steane.e0 == Catch::Approx(-1.0));
    REQUIRE(steane.e1 == Catch::Approx(-5.0 / 7));

    const auto magic = build(five_qubit_code(), LogicalTarget::magic());
    REQUIRE(magic.terms.size() == 6);  // 4 stabilizers + X_L and Y_L components
    for (size_t i = 4; i < 6; ++i)
        REQUIRE(std::abs(magic.terms[i].first) ==
                Catch::Approx(0.2 * std::sqrt(0.5)).margin(1e-12));
}

TEST_CASE("custom coefficients", "[hamiltonian]") {
    HamiltonianCoeffs coeffs;
    coeffs.custom = {0.5, 0.25, 0.25, 0.5, 0.125};
    const auto h = build(five_qubit_code(), LogicalTarget::zero(), coeffs);
    REQUIRE(h.e0 == Catch::Approx(-1.625));
    REQUIRE(h.gap_c == Catch::Approx(0.25));  // 2 * min coefficient (c_o here)
    REQUIRE(h.e1 == Catch::Approx(-1.375));

    coeffs.custom[0] = -0.5;
    REQUIRE_THROWS_AS(build(five_qubit_code(), LogicalTarget::zero(), coeffs),
                      std::invalid_argument);
    coeffs.custom = {1.0};
    REQUIRE_THROWS_AS(build(five_qubit_code(), LogicalTarget::zero(), coeffs),
                      std::invalid_argument);
}

TEST_CASE("energy of reference states", "[hamiltonian]") {
    SECTION("target state sits at -1") {
        for (const auto& code : {five_qubit_code(), steane_code()}) {
            for (const auto& t :
                 {LogicalTarget::zero(), LogicalTarget::minus(), LogicalTarget::magic()}) {
                const auto h = build(code, t);
                REQUIRE(energy(logical_state(code, t), h) == Catch::Approx(-1.0).margin(1e-12));
            }
        }
    }
    SECTION("|00000> has zero energy under the |->_L Hamiltonian") {
        const auto h = build(five_qubit_code(), LogicalTarget::minus());
        REQUIRE(std::abs(energy(StateVector::zero_state(5), h)) < 1e-14);
        // brute-force check against the dense matrix
        const Eigen::MatrixXcd hm = to_dense(h);
        REQUIRE(std::abs(hm(0, 0)) < 1e-14);
    }
    SECTION("maximally mixed state has zero energy") {
        const auto h = build(five_qubit_code(), LogicalTarget::magic());
        REQUIRE(std::abs(energy(DensityMatrix::maximally_mixed(5), h)) < 1e-13);
    }
}

TEST_CASE("fidelity lower bound formula", "[hamiltonian]") {
    const auto h = build(five_qubit_code(), LogicalTarget::zero());
    REQUIRE(fidelity_lower_bound(-1.0, h) == Catch::Approx(1.0));
    REQUIRE(fidelity_lower_bound(-0.6, h) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(fidelity_lower_bound(-0.9, h) == Catch::Approx(0.75));
    // clamps above E1, errors below E0
    REQUIRE(fidelity_lower_bound(0.5, h) == 0.0);
    REQUIRE_THROWS_AS(fidelity_lower_bound(-1.1, h), std::domain_error);
}

TEST_CASE("fidelity bound is sound on random states", "[hamiltonian]") {
    const auto code = five_qubit_code();
    const auto h = build(code, LogicalTarget::zero());
    const auto [gs, e0] = ground_state_exact(h);
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = h.n_qubits;
    for (int trial = 0; trial < 300; ++trial) {
        DensityMatrix rho;
        if (trial % 2 == 0) {
            // Mixture of the ground state with a random density matrix,
            // weighted to land in [E0, E1].
            const Eigen::MatrixXcd noise = oracles::random_density_matrix(n, rng);
            const double e_noise = energy(dm_from(noise, n), h);
            const double p_min = (h.e1 - e_noise) / (h.e0 - e_noise);
            const double p = p_min + (1 - p_min) * unit(rng);
            rho = dm_from(p * (gs.amps * gs.amps.adjoint()) + (1 - p) * noise, n);
        } else {
            // Pure superposition of the ground state with a random orthogonal
            // component.
            Eigen::VectorXcd chi = oracles::random_state(n, rng);
            chi -= gs.amps * gs.amps.dot(chi);
            chi.normalize();
            StateVector sv{n, chi};
            const double e_chi = energy(sv, h);
            const double c2_max = std::min(1.0, (h.e1 - h.e0) / (e_chi - h.e0));
            const double c2 = c2_max * unit(rng);
            Eigen::VectorXcd mix = std::sqrt(1 - c2) * gs.amps + std::sqrt(c2) * chi;
            rho = dm_from(mix * mix.adjoint(), n);
        }
        const double e = energy(rho, h);
        REQUIRE(e >= h.e0 - 1e-9);
        REQUIRE(e <= h.e1 + 1e-9);
        const double f = fidelity(rho, gs);
        REQUIRE(f >= fidelity_lower_bound(e, h) - 1e-9);
    }
}

TEST_CASE("exact ground states", "[hamiltonian]") {
    SECTION("five-qubit |0>_L Hamiltonian reproduces the code word") {
        const auto h = build(five_qubit_code(), LogicalTarget::zero());
        const auto [gs, e0] = ground_state_exact(h);
        REQUIRE(e0 == Catch::Approx(-1.0).margin(1e-10));
        const auto [zero_l, one_l] = logical_basis_states(five_qubit_code());
        REQUIRE((gs.amps - zero_l.amps).cwiseAbs().maxCoeff() < 1e-10);
    }
    SECTION("Steane eigenvalue") {
        const auto h = build(steane_code(), LogicalTarget::zero());
        REQUIRE(ground_state_exact(h).second == Catch::Approx(-1.0).margin(1e-10));
    }
    SECTION("single-qubit -Z") {
        PauliHamiltonian h;
        h.n_qubits = 1;
        h.terms = {{-1.0, PauliString::parse("Z")}};
        h.e0 = -1;
        h.e1 = 1;
        h.gap_c = 2;
        const auto [gs, e0] = ground_state_exact(h);
        REQUIRE(e0 == Catch::Approx(-1.0));
        REQUIRE(std::abs(gs.amps[0] - cd(1, 0)) < 1e-12);
    }
    SECTION("degenerate ground space is rejected") {
        PauliHamiltonian h;
        h.n_qubits = 2;
        h.terms = {{-1.0, PauliString::parse("ZI")}};
        h.e0 = -1;
        h.e1 = 1;
        h.gap_c = 2;
        REQUIRE_THROWS_AS(ground_state_exact(h), std::runtime_error);
    }
}

TEST_CASE("no eigenvalue falls inside the spectral gap", "[hamiltonian]") {
    for (const auto& code : {five_qubit_code(), steane_code()}) {
        for (const auto& t :
             {LogicalTarget::zero(), LogicalTarget::minus(), LogicalTarget::magic()}) {
            const auto h = build(code, t);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_dense(h));
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
                const double v = es.eigenvalues()[i];
                const bool in_gap = v > h.e0 + 1e-9 && v < h.e1 - 1e-9;
                REQUIRE_FALSE(in_gap);
            }
        }
    }
}

TEST_CASE("stabilizer terms commute with the logical components", "[hamiltonian]") {
    for (const auto& t : {LogicalTarget::zero(), LogicalTarget::minus(), LogicalTarget::magic()}) {
        const auto code = five_qubit_code();
        const auto h = build(code, t);
        const size_t l = code.generators.size();
        for (size_t i = 0; i < l; ++i)
            for (size_t j = i + 1; j < h.terms.size(); ++j)
                REQUIRE(h.terms[i].second.commutes_with(h.terms[j].second));
        // Logical components pairwise anticommute, so O_L^2 = I and the
        // grouped-term spectrum argument applies.
        for (size_t i = l; i < h.terms.size(); ++i)
            for (size_t j = i + 1; j < h.terms.size(); ++j)
                REQUIRE_FALSE(h.terms[i].second.commutes_with(h.terms[j].second));
    }
}

TEST_CASE("H fixes random targets at E0", "[hamiltonian]") {
    std::mt19937_64 rng(321);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& code : {five_qubit_code(), steane_code()}) {
        for (int trial = 0; trial < 100; ++trial) {
            const double th = std::acos(2 * unit(rng) - 1);
            const double ph = 2 * M_PI * unit(rng);
            LogicalTarget t{std::cos(th / 2), std::polar(std::sin(th / 2), ph)};
            const auto h = build(code, t);
            const StateVector target = logical_state(code, t);
            const StateVector ht = apply_hamiltonian(target, h);
            REQUIRE((ht.amps - h.e0 * target.amps).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
}
