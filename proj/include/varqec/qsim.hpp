#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>

#include "varqec/gate.hpp"
#include "varqec/pauli.hpp"

namespace varqec {

/// Thrown when a projective measurement lands on an outcome whose probability
/// is numerically zero; the post-measurement state does not exist.
struct ZeroProbability : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Pure state of n qubits. amps[k] is the amplitude of basis state |k> where
/// qubit 0 is the most significant bit of k.
struct StateVector {
    int n_qubits = 0;
    Eigen::VectorXcd amps;

    static StateVector zero_state(int n) {
        StateVector s;
        s.n_qubits = n;
        s.amps = Eigen::VectorXcd::Zero(size_t(1) << n);
        s.amps[0] = 1.0;
        return s;
    }
    Eigen::Index dim() const { return amps.size(); }
};

struct DensityMatrix {
    int n_qubits = 0;
    Eigen::MatrixXcd rho;

    static DensityMatrix zero_state(int n) {
        DensityMatrix d;
        d.n_qubits = n;
        d.rho = Eigen::MatrixXcd::Zero(size_t(1) << n, size_t(1) << n);
        d.rho(0, 0) = 1.0;
        return d;
    }
    static DensityMatrix from_pure(const StateVector& s) {
        DensityMatrix d;
        d.n_qubits = s.n_qubits;
        d.rho = s.amps * s.amps.adjoint();
        return d;
    }
    static DensityMatrix maximally_mixed(int n) {
        DensityMatrix d;
        d.n_qubits = n;
        const auto dim = size_t(1) << n;
        d.rho = Eigen::MatrixXcd::Identity(dim, dim) / double(dim);
        return d;
    }
    Eigen::Index dim() const { return rho.rows(); }
};

/// Depolarizing-noise settings. The placement policy is fixed: after each
/// gate, one single-qubit depolarizing channel of strength gate_error acts on
/// every qubit the gate touched; idle qubits are untouched. meas_error
/// depolarizes a measured qubit immediately before its projection.
struct NoiseModel {
    double gate_error = 0.0;
    double meas_error = 0.0;

    static NoiseModel uniform(double r) { return NoiseModel{r, r}; }
    bool is_noiseless() const { return gate_error == 0.0 && meas_error == 0.0; }

    void check() const {
        if (gate_error < 0 || gate_error > 1 || meas_error < 0 || meas_error > 1)
            throw std::invalid_argument("noise probabilities must lie in [0,1]");
    }
};

namespace detail {

inline int bitpos(int n_qubits, int qubit) { return n_qubits - 1 - qubit; }

inline void check_qubit(int n_qubits, int qubit) {
    if (qubit < 0 || qubit >= n_qubits) throw std::out_of_range("qubit index out of range");
}

// u applied on 'qubit' of a 2^n-element register whose element k lives at
// data[k * stride].
inline void kernel1(cd* data, ptrdiff_t stride, int n, int qubit, const Mat2& u) {
    const size_t bit = size_t(1) << bitpos(n, qubit);
    const size_t dim = size_t(1) << n;
    for (size_t k = 0; k < dim; ++k) {
        if (k & bit) continue;
        cd& a0 = data[k * stride];
        cd& a1 = data[(k | bit) * stride];
        const cd x = a0, y = a1;
        a0 = u[0] * x + u[1] * y;
        a1 = u[2] * x + u[3] * y;
    }
}

inline void kernel2(cd* data, ptrdiff_t stride, int n, int qa, int qb, const Mat4& u) {
    const size_t ba = size_t(1) << bitpos(n, qa);
    const size_t bb = size_t(1) << bitpos(n, qb);
    const size_t dim = size_t(1) << n;
    for (size_t k = 0; k < dim; ++k) {
        if ((k & ba) || (k & bb)) continue;
        cd* p[4] = {&data[k * stride], &data[(k | bb) * stride], &data[(k | ba) * stride],
                    &data[(k | ba | bb) * stride]};
        const cd in[4] = {*p[0], *p[1], *p[2], *p[3]};
        for (int r = 0; r < 4; ++r)
            *p[r] = u[4 * r] * in[0] + u[4 * r + 1] * in[1] + u[4 * r + 2] * in[2] +
                    u[4 * r + 3] * in[3];
    }
}

inline Mat2 conj2(const Mat2& u) {
    return {std::conj(u[0]), std::conj(u[1]), std::conj(u[2]), std::conj(u[3])};
}
inline Mat4 conj4(const Mat4& u) {
    Mat4 c;
    for (int i = 0; i < 16; ++i) c[i] = std::conj(u[i]);
    return c;
}

struct PauliMasks {
    size_t flip = 0;        // X and Y letters flip these bits
    size_t phase_mask = 0;  // Y and Z letters contribute (-1)^bit
    cd global = 1.0;        // string phase times i^{#Y}

    // The string is padded with identities onto the low (rightmost) bits when
    // it acts on fewer qubits than the register holds.
    PauliMasks(const PauliString& p, int n_qubits) {
        if (p.n_qubits() > n_qubits)
            throw std::invalid_argument("Pauli string larger than register");
        int n_y = 0;
        for (int q = 0; q < p.n_qubits(); ++q) {
            const size_t bit = size_t(1) << bitpos(n_qubits, q);
            switch (p.letter(q)) {
                case Pauli::I: break;
                case Pauli::X: flip |= bit; break;
                case Pauli::Y: flip |= bit; phase_mask |= bit; ++n_y; break;
                case Pauli::Z: phase_mask |= bit; break;
            }
        }
        static constexpr std::array<cd, 4> ipow = {cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1)};
        global = p.phase() * ipow[n_y % 4];
    }

    // Coefficient c_k in P|k> = c_k |k ^ flip>.
    cd coeff(size_t k) const {
        const int par = __builtin_parityll(k & phase_mask);
        return par ? -global : global;
    }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Gate application
// ---------------------------------------------------------------------------

inline void apply_gate(StateVector& state, const Gate& g) {
    if (!g.is_bound()) throw std::invalid_argument("unbound rotation parameter");
    detail::check_qubit(state.n_qubits, g.q0);
    if (is_two_qubit(g.kind)) {
        detail::check_qubit(state.n_qubits, g.q1);
        detail::kernel2(state.amps.data(), 1, state.n_qubits, g.q0, g.q1, gate_matrix2(g.kind));
    } else {
        detail::kernel1(state.amps.data(), 1, state.n_qubits, g.q0,
                        gate_matrix1(g.kind, g.angle.value_or(0.0)));
    }
}

/// mat -> U mat U^dagger for any square matrix over the n-qubit register.
inline void gate_sandwich(Eigen::MatrixXcd& mat, int n_qubits, const Gate& g) {
    if (!g.is_bound()) throw std::invalid_argument("unbound rotation parameter");
    detail::check_qubit(n_qubits, g.q0);
    const auto dim = mat.rows();
    cd* d = mat.data();  // column-major
    if (is_two_qubit(g.kind)) {
        detail::check_qubit(n_qubits, g.q1);
        const Mat4 u = gate_matrix2(g.kind);
        const Mat4 uc = detail::conj4(u);
        for (Eigen::Index c = 0; c < dim; ++c)
            detail::kernel2(d + c * dim, 1, n_qubits, g.q0, g.q1, u);
        for (Eigen::Index r = 0; r < dim; ++r)
            detail::kernel2(d + r, dim, n_qubits, g.q0, g.q1, uc);
    } else {
        const Mat2 u = gate_matrix1(g.kind, g.angle.value_or(0.0));
        const Mat2 uc = detail::conj2(u);
        for (Eigen::Index c = 0; c < dim; ++c)
            detail::kernel1(d + c * dim, 1, n_qubits, g.q0, u);
        for (Eigen::Index r = 0; r < dim; ++r)
            detail::kernel1(d + r, dim, n_qubits, g.q0, uc);
    }
}

/// rho -> U rho U^dagger.
inline void apply_gate(DensityMatrix& state, const Gate& g) {
    gate_sandwich(state.rho, state.n_qubits, g);
}

template <typename State>
inline void apply_circuit(State& state, const std::vector<Gate>& gates) {
    for (const Gate& g : gates) apply_gate(state, g);
}

// ---------------------------------------------------------------------------
// Channels
// ---------------------------------------------------------------------------

/// mat -> (1-r) mat + (r/3)(X mat X + Y mat Y + Z mat Z) on one qubit.
/// Works entrywise: matrix elements diagonal in the qubit's bit mix with
/// their bit-flipped partner, off-diagonal ones are damped.
inline void depolarize_matrix(Eigen::MatrixXcd& mat, int n_qubits, int qubit, double r) {
    if (r < 0 || r > 1) throw std::invalid_argument("depolarizing probability outside [0,1]");
    detail::check_qubit(n_qubits, qubit);
    if (r == 0) return;
    const size_t bit = size_t(1) << detail::bitpos(n_qubits, qubit);
    const auto dim = mat.rows();
    const double keep = 1 - 2 * r / 3, swap = 2 * r / 3, damp = 1 - 4 * r / 3;
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            const bool bi = i & bit, bj = j & bit;
            if (bi != bj) {
                mat(i, j) *= damp;
            } else if (!bi) {  // handle the (i,j),(i^,j^) pair once
                cd& a = mat(i, j);
                cd& b = mat(i | bit, j | bit);
                const cd a0 = a, b0 = b;
                a = keep * a0 + swap * b0;
                b = keep * b0 + swap * a0;
            }
        }
    }
}

inline void apply_depolarizing(DensityMatrix& state, int qubit, double r) {
    depolarize_matrix(state.rho, state.n_qubits, qubit, r);
}

/// Applies the per-gate noise rule of NoiseModel after a gate.
inline void apply_gate_noise(DensityMatrix& state, const Gate& g, const NoiseModel& noise) {
    if (noise.gate_error == 0) return;
    apply_depolarizing(state, g.q0, noise.gate_error);
    if (is_two_qubit(g.kind)) apply_depolarizing(state, g.q1, noise.gate_error);
}

inline void apply_noisy_circuit(DensityMatrix& state, const std::vector<Gate>& gates,
                                const NoiseModel& noise) {
    for (const Gate& g : gates) {
        apply_gate(state, g);
        apply_gate_noise(state, g, noise);
    }
}

// ---------------------------------------------------------------------------
// Pauli action
// ---------------------------------------------------------------------------

/// state -> P|state>, exact (P may act on a prefix of the register).
inline void apply_pauli(StateVector& state, const PauliString& p) {
    const detail::PauliMasks m(p, state.n_qubits);
    cd* a = state.amps.data();
    const size_t dim = size_t(1) << state.n_qubits;
    if (m.flip == 0) {
        for (size_t k = 0; k < dim; ++k) a[k] *= m.coeff(k);
        return;
    }
    for (size_t k = 0; k < dim; ++k) {
        const size_t kk = k ^ m.flip;
        if (k > kk) continue;
        const cd t0 = a[k], t1 = a[kk];
        a[kk] = m.coeff(k) * t0;
        a[k] = m.coeff(kk) * t1;
    }
}

/// M -> P * M  (left multiplication by the Pauli operator).
inline void pauli_left_multiply(Eigen::MatrixXcd& mat, const PauliString& p, int n_qubits) {
    const detail::PauliMasks m(p, n_qubits);
    const auto dim = mat.rows();
    for (Eigen::Index c = 0; c < dim; ++c) {
        cd* col = mat.data() + c * dim;
        if (m.flip == 0) {
            for (Eigen::Index i = 0; i < dim; ++i) col[i] *= m.coeff(i);
        } else {
            for (Eigen::Index i = 0; i < dim; ++i) {
                const Eigen::Index ii = Eigen::Index(size_t(i) ^ m.flip);
                if (i > ii) continue;
                const cd t0 = col[i], t1 = col[ii];
                col[ii] = m.coeff(size_t(i)) * t0;
                col[i] = m.coeff(size_t(ii)) * t1;
            }
        }
    }
}

/// M -> M * P.
inline void pauli_right_multiply(Eigen::MatrixXcd& mat, const PauliString& p, int n_qubits) {
    const detail::PauliMasks m(p, n_qubits);
    const auto dim = mat.rows();
    // (M P)[i, j] = M[i, j ^ flip] * coeff(j)
    for (Eigen::Index j = 0; j < dim; ++j) {
        const Eigen::Index jj = Eigen::Index(size_t(j) ^ m.flip);
        if (jj < j) continue;
        for (Eigen::Index i = 0; i < dim; ++i) {
            const cd t0 = mat(i, j), t1 = mat(i, jj);
            mat(i, j) = t1 * m.coeff(size_t(j));
            if (jj != j) mat(i, jj) = t0 * m.coeff(size_t(jj));
        }
    }
}

// ---------------------------------------------------------------------------
// Expectations, overlaps, fidelity
// ---------------------------------------------------------------------------

inline cd expectation_complex(const StateVector& state, const PauliString& p) {
    const detail::PauliMasks m(p, state.n_qubits);
    const cd* a = state.amps.data();
    const size_t dim = size_t(1) << state.n_qubits;
    cd acc = 0;
    for (size_t k = 0; k < dim; ++k) acc += std::conj(a[k ^ m.flip]) * m.coeff(k) * a[k];
    return acc;
}

inline cd expectation_complex(const DensityMatrix& state, const PauliString& p) {
    const detail::PauliMasks m(p, state.n_qubits);
    const size_t dim = size_t(1) << state.n_qubits;
    cd acc = 0;  // Tr[rho P] = sum_k coeff(k) rho(k, k ^ flip)
    for (size_t k = 0; k < dim; ++k)
        acc += m.coeff(k) * state.rho(Eigen::Index(k), Eigen::Index(k ^ m.flip));
    return acc;
}

/// <psi|P|psi> or Tr[rho P]; real for Hermitian P up to roundoff.
template <typename State>
inline double expectation(const State& state, const PauliString& p) {
    return expectation_complex(state, p).real();
}

inline cd inner_product(const StateVector& a, const StateVector& b) {
    if (a.n_qubits != b.n_qubits) throw std::invalid_argument("state dimension mismatch");
    return a.amps.dot(b.amps);  // conjugates the left argument
}

/// F = <target| rho |target>.
inline double fidelity(const DensityMatrix& rho, const StateVector& target) {
    if (rho.n_qubits != target.n_qubits) throw std::invalid_argument("state dimension mismatch");
    const cd v = target.amps.dot(rho.rho * target.amps);
    return v.real();
}

inline double fidelity(const StateVector& a, const StateVector& b) {
    return std::norm(inner_product(a, b));
}

// ---------------------------------------------------------------------------
// Partial trace / measurement
// ---------------------------------------------------------------------------

/// Traces out a single qubit, returning the state of the remaining qubits
/// (their relative order is preserved).
inline DensityMatrix partial_trace_qubit(const DensityMatrix& state, int qubit) {
    detail::check_qubit(state.n_qubits, qubit);
    const int n = state.n_qubits;
    const int pos = detail::bitpos(n, qubit);
    const size_t low = (size_t(1) << pos) - 1;       // bits below the traced one
    DensityMatrix out;
    out.n_qubits = n - 1;
    const size_t odim = size_t(1) << out.n_qubits;
    out.rho = Eigen::MatrixXcd::Zero(odim, odim);
    auto expand = [&](size_t k) {  // reinsert a 0 bit at 'pos'
        return ((k & ~low) << 1) | (k & low);
    };
    const size_t bit = size_t(1) << pos;
    for (size_t i = 0; i < odim; ++i) {
        const size_t ei = expand(i);
        for (size_t j = 0; j < odim; ++j) {
            const size_t ej = expand(j);
            out.rho(i, j) = state.rho(ei, ej) + state.rho(ei | bit, ej | bit);
        }
    }
    return out;
}

/// Traces out all qubits with index >= n_keep.
inline DensityMatrix partial_trace_tail(const DensityMatrix& state, int n_keep) {
    DensityMatrix out = state;
    while (out.n_qubits > n_keep) out = partial_trace_qubit(out, out.n_qubits - 1);
    return out;
}

/// Appends one fresh qubit in |0> at the end of the register (highest index).
inline DensityMatrix append_zero_qubit(const DensityMatrix& state) {
    DensityMatrix out;
    out.n_qubits = state.n_qubits + 1;
    const auto dim = state.dim();
    out.rho = Eigen::MatrixXcd::Zero(2 * dim, 2 * dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) out.rho(2 * i, 2 * j) = state.rho(i, j);
    return out;
}

enum class MeasBasis { Z, X };

struct MeasOutcome {
    DensityMatrix state;  // remaining qubits; meaningful only if accepted
    double probability = 0.0;
};

/// Measures one qubit: depolarizes it with meas_error, projects onto the
/// requested outcome, renormalizes and traces the qubit out. outcome_plus
/// selects |0>/|+> (true) or |1>/|-> (false) depending on the basis.
/// Throws ZeroProbability when the outcome probability is below 1e-12.
inline MeasOutcome project_ancilla(const DensityMatrix& state, int qubit, MeasBasis basis,
                                   bool outcome_plus, double meas_error) {
    detail::check_qubit(state.n_qubits, qubit);
    DensityMatrix work = state;
    if (meas_error != 0) apply_depolarizing(work, qubit, meas_error);
    // An X-basis measurement is a Z-basis measurement conjugated by H; the
    // extra H inside the traced-out qubit cancels under the partial trace.
    if (basis == MeasBasis::X) apply_gate(work, Gate::single(GateKind::H, qubit));
    const size_t bit = size_t(1) << detail::bitpos(work.n_qubits, qubit);
    const size_t want = outcome_plus ? 0 : bit;
    const auto dim = work.dim();
    double prob = 0;
    for (Eigen::Index k = 0; k < dim; ++k)
        if ((size_t(k) & bit) == want) prob += work.rho(k, k).real();
    prob = std::max(prob, 0.0);
    if (prob < 1e-12)
        throw ZeroProbability("measurement outcome has (near-)zero probability");
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j)
            if ((size_t(i) & bit) != want || (size_t(j) & bit) != want) work.rho(i, j) = 0;
    work.rho /= prob;
    MeasOutcome out{partial_trace_qubit(work, qubit), prob};
    return out;
}

}  // namespace varqec
