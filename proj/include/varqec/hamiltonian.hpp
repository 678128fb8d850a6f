#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "varqec/codes.hpp"
#include "varqec/qsim.hpp"

namespace varqec {

/// H = -sum_i c_i g_i - c_o O_L, stored as split Pauli terms with real
/// weights. The stabilizer terms commute with each other and with every
/// logical component; the logical components of a superposition target
/// pairwise anticommute, but O_L as a whole squares to the identity, so the
/// spectrum is still E = -sum_i c_i s_i - c_o o over s_i, o = +/-1.
struct PauliHamiltonian {
    int n_qubits = 0;
    std::vector<std::pair<double, PauliString>> terms;
    double e0 = 0;     // ground energy -(sum c_i + c_o)
    double e1 = 0;     // first excited energy e0 + 2 min{c_i, c_o}
    double gap_c = 0;  // c = e1 - e0
};

struct HamiltonianCoeffs {
    /// Empty: uniform-normalized 1/(l+1) per term so that E0 = -1.
    /// Otherwise: l stabilizer coefficients followed by c_o, all > 0.
    std::vector<double> custom;

    static HamiltonianCoeffs uniform() { return {}; }
};

inline PauliHamiltonian build(const StabilizerCode& code, const LogicalTarget& target,
                              const HamiltonianCoeffs& coeffs = {}) {
    require_valid(code);
    const size_t l = code.generators.size();
    std::vector<double> c(l + 1);
    if (coeffs.custom.empty()) {
        std::fill(c.begin(), c.end(), 1.0 / double(l + 1));
    } else {
        if (coeffs.custom.size() != l + 1)
            throw std::invalid_argument("expected one coefficient per generator plus c_o");
        for (double v : coeffs.custom)
            if (!(v > 0)) throw std::invalid_argument("Hamiltonian coefficients must be positive");
        c = coeffs.custom;
    }

    PauliHamiltonian h;
    h.n_qubits = code.n_qubits;
    for (size_t i = 0; i < l; ++i) h.terms.emplace_back(-c[i], code.generators[i]);
    const double c_o = c[l];
    for (const auto& [w, p] : logical_operator(code, target).terms)
        h.terms.emplace_back(-c_o * w, p);

    double sum = 0, cmin = c_o;
    for (size_t i = 0; i < l; ++i) {
        sum += c[i];
        cmin = std::min(cmin, c[i]);
    }
    h.e0 = -(sum + c_o);
    h.gap_c = 2 * cmin;
    h.e1 = h.e0 + h.gap_c;
    return h;
}

template <typename State>
inline double energy(const State& state, const PauliHamiltonian& h) {
    double e = 0;
    for (const auto& [w, p] : h.terms) e += w * expectation(state, p);
    return e;
}

/// H|psi> as a dense vector (used by the optimizer's B assembly).
inline StateVector apply_hamiltonian(const StateVector& state, const PauliHamiltonian& h) {
    StateVector out = state;
    out.amps.setZero();
    for (const auto& [w, p] : h.terms) {
        StateVector t = state;
        apply_pauli(t, p);
        out.amps += w * t.amps;
    }
    return out;
}

/// F >= 1 - (E - E0)/c for E in [E0, E1]; clamped to 0 above E1. Energies
/// below E0 are impossible and signal a simulation bug.
inline double fidelity_lower_bound(double e, const PauliHamiltonian& h) {
    if (e < h.e0 - 1e-9)
        throw std::domain_error("energy below the ground energy: simulation bug");
    return std::max(0.0, 1.0 - (e - h.e0) / h.gap_c);
}

/// Dense 2^n x 2^n matrix of the Hamiltonian.
inline Eigen::MatrixXcd to_dense(const PauliHamiltonian& h) {
    const size_t dim = size_t(1) << h.n_qubits;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (size_t k = 0; k < dim; ++k) {
        StateVector e;
        e.n_qubits = h.n_qubits;
        e.amps = Eigen::VectorXcd::Zero(dim);
        e.amps[k] = 1.0;
        m.col(k) = apply_hamiltonian(e, h).amps;
    }
    return m;
}

/// Full diagonalization oracle: returns the unique ground state (phase-fixed
/// like logical_basis_states) and its eigenvalue. Throws when the computed
/// ground energy disagrees with the cached E0 or the ground space is
/// degenerate.
inline std::pair<StateVector, double> ground_state_exact(const PauliHamiltonian& h) {
    if (h.n_qubits > 10) throw std::invalid_argument("ground_state_exact limited to 10 qubits");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(to_dense(h));
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    const auto& vals = solver.eigenvalues();
    const double ground = vals[0];
    if (std::abs(ground - h.e0) > 1e-9)
        throw std::runtime_error("ground energy mismatch with cached E0");
    if (vals.size() > 1 && vals[1] - ground < 1e-9)
        throw std::runtime_error("degenerate ground space (invalid target?)");
    StateVector gs;
    gs.n_qubits = h.n_qubits;
    gs.amps = solver.eigenvectors().col(0);
    for (Eigen::Index k = 0; k < gs.amps.size(); ++k) {
        if (std::abs(gs.amps[k]) > 1e-8) {
            gs.amps *= std::conj(gs.amps[k]) / std::abs(gs.amps[k]);
            break;
        }
    }
    return {gs, ground};
}

}  // namespace varqec
