#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "varqec/gate.hpp"
#include "varqec/hamiltonian.hpp"
#include "varqec/qsim.hpp"
#include "varqec/rng.hpp"

namespace varqec {

/// Parameterized circuit. Rotation gates either reference a parameter slot
/// (numbered consecutively in circuit order) or carry a bound angle.
struct ParamCircuit {
    int n_qubits = 0;
    int n_data = 0;  // qubits the code lives on; ancillas sit above
    std::vector<Gate> gates;
    int n_params = 0;
    int two_qubit_count = 0;

    void recount() {
        n_params = 0;
        two_qubit_count = 0;
        for (const auto& g : gates) {
            if (g.param_slot) ++n_params;
            if (is_two_qubit(g.kind)) ++two_qubit_count;
        }
    }
};

inline void validate_circuit(const ParamCircuit& c) {
    int next_slot = 0, two = 0;
    for (const auto& g : c.gates) {
        if (g.q0 < 0 || g.q0 >= c.n_qubits || (is_two_qubit(g.kind) && (g.q1 < 0 || g.q1 >= c.n_qubits)))
            throw std::invalid_argument("gate qubit index out of range");
        if (is_two_qubit(g.kind)) {
            if (g.q0 == g.q1) throw std::invalid_argument("two-qubit gate on identical qubits");
            ++two;
        }
        if (g.param_slot) {
            if (!is_rotation(g.kind))
                throw std::invalid_argument("parameter slot on non-rotation gate");
            if (g.angle) throw std::invalid_argument("gate carries both slot and angle");
            if (*g.param_slot != next_slot)
                throw std::invalid_argument("parameter slots must be consecutive in circuit order");
            ++next_slot;
        } else if (is_rotation(g.kind) && !g.angle) {
            throw std::invalid_argument("rotation gate without slot or angle");
        }
    }
    if (next_slot != c.n_params || two != c.two_qubit_count)
        throw std::invalid_argument("circuit counters inconsistent");
}

/// Hardware constraints steering ansatz generation.
struct ConstraintSet {
    int n_data = 0;
    std::vector<GateKind> allowed_two_qubit = {GateKind::CZ};
    std::vector<std::pair<int, int>> coupling;  // empty = all-to-all
    int max_two_qubit = 0;
    int n_ancilla = 0;  // 0 or 1

    int n_total() const { return n_data + n_ancilla; }

    void check() const {
        if (n_data < 1) throw std::invalid_argument("constraints: n_data must be positive");
        if (n_ancilla != 0 && n_ancilla != 1)
            throw std::invalid_argument("constraints: n_ancilla must be 0 or 1");
        if (max_two_qubit < 0) throw std::invalid_argument("constraints: negative gate budget");
        for (GateKind k : allowed_two_qubit)
            if (!is_two_qubit(k))
                throw std::invalid_argument("constraints: allowed_two_qubit holds a 1-qubit kind");
        for (auto [a, b] : coupling)
            if (a < 0 || b < 0 || a >= n_total() || b >= n_total() || a == b)
                throw std::invalid_argument("constraints: coupling pair out of range");
    }
};

inline std::vector<std::pair<int, int>> all_to_all_coupling(int n) {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
    return pairs;
}

inline std::vector<std::pair<int, int>> line_coupling(int n) {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a + 1 < n; ++a) pairs.emplace_back(a, a + 1);
    return pairs;
}

/// True iff every gate of the circuit is admissible under the constraints.
inline bool satisfies(const ParamCircuit& c, const ConstraintSet& cs) {
    auto coupling = cs.coupling.empty() ? all_to_all_coupling(cs.n_total()) : cs.coupling;
    int two = 0;
    for (const auto& g : c.gates) {
        if (!is_two_qubit(g.kind)) continue;
        ++two;
        if (std::find(cs.allowed_two_qubit.begin(), cs.allowed_two_qubit.end(), g.kind) ==
            cs.allowed_two_qubit.end())
            return false;
        const auto lo = std::min(g.q0, g.q1), hi = std::max(g.q0, g.q1);
        if (std::find(coupling.begin(), coupling.end(), std::make_pair(lo, hi)) ==
                coupling.end() &&
            std::find(coupling.begin(), coupling.end(), std::make_pair(hi, lo)) == coupling.end())
            return false;
    }
    return two <= cs.max_two_qubit;
}

namespace detail {

inline void emit_rot_triple(ParamCircuit& c, int q, int& slot) {
    c.gates.push_back(Gate::r(GateKind::Rz, q, slot++));
    c.gates.push_back(Gate::r(GateKind::Ry, q, slot++));
    c.gates.push_back(Gate::r(GateKind::Rz, q, slot++));
}

}  // namespace detail

/// Random ansatz from the standard building block: an Rz-Ry-Rz triple on
/// every data qubit, then k_blocks blocks of one random two-qubit gate on a
/// random allowed pair followed by Rz-Ry-Rz on both touched qubits.
/// Deterministic for a fixed RNG state.
inline ParamCircuit generate(const ConstraintSet& cs, int k_blocks, Rng& rng) {
    cs.check();
    if (k_blocks > cs.max_two_qubit)
        throw std::invalid_argument("k_blocks exceeds the two-qubit budget");
    if (k_blocks > 0 && cs.allowed_two_qubit.empty())
        throw std::invalid_argument("empty two-qubit gate set");
    auto coupling = cs.coupling.empty() ? all_to_all_coupling(cs.n_total()) : cs.coupling;
    if (k_blocks > 0 && coupling.empty()) throw std::invalid_argument("empty coupling graph");

    ParamCircuit c;
    c.n_qubits = cs.n_total();
    c.n_data = cs.n_data;
    int slot = 0;
    for (int q = 0; q < cs.n_data; ++q) detail::emit_rot_triple(c, q, slot);
    for (int b = 0; b < k_blocks; ++b) {
        auto [a, d] = coupling[rng.next_below(coupling.size())];
        const GateKind kind = cs.allowed_two_qubit[rng.next_below(cs.allowed_two_qubit.size())];
        if (kind == GateKind::CNOT && rng.next_below(2) == 1) std::swap(a, d);
        c.gates.push_back(Gate::two(kind, a, d));
        detail::emit_rot_triple(c, std::min(a, d), slot);
        detail::emit_rot_triple(c, std::max(a, d), slot);
    }
    c.recount();
    return c;
}

inline ParamCircuit generate(const ConstraintSet& cs, int k_blocks, uint64_t seed) {
    Rng rng(seed);
    return generate(cs, k_blocks, rng);
}

/// Fills parameter slots with the given values; pure, order-preserving.
inline std::vector<Gate> bind(const ParamCircuit& c, const Eigen::VectorXd& theta) {
    if (theta.size() != c.n_params)
        throw std::invalid_argument("parameter vector length mismatch");
    std::vector<Gate> out;
    out.reserve(c.gates.size());
    for (Gate g : c.gates) {
        if (g.param_slot) {
            g.angle = theta[*g.param_slot];
            g.param_slot.reset();
        }
        out.push_back(g);
    }
    return out;
}

inline StateVector simulate(const ParamCircuit& c, const Eigen::VectorXd& theta) {
    StateVector s = StateVector::zero_state(c.n_qubits);
    for (const Gate& g : bind(c, theta)) apply_gate(s, g);
    return s;
}

/// d|psi>/d theta_i = f_i |phi_i>, with f_i = -i/2 and |phi_i> the circuit
/// state with the rotation's generator Pauli inserted right after gate i.
struct DerivativeFactor {
    int index = 0;
    cd factor{0, -0.5};
    Pauli generator = Pauli::I;
    int qubit = 0;
};

inline std::pair<StateVector, DerivativeFactor> derivative_state(const ParamCircuit& c,
                                                                 const Eigen::VectorXd& theta,
                                                                 int index) {
    if (index < 0 || index >= c.n_params) throw std::out_of_range("parameter index out of range");
    const auto gates = bind(c, theta);
    // Locate the gate that owned slot `index` (same position as in c.gates).
    int pos = -1, seen = 0;
    for (size_t i = 0; i < c.gates.size(); ++i) {
        if (c.gates[i].param_slot) {
            if (seen == index) {
                pos = static_cast<int>(i);
                break;
            }
            ++seen;
        }
    }
    StateVector s = StateVector::zero_state(c.n_qubits);
    for (int i = 0; i <= pos; ++i) apply_gate(s, gates[i]);
    const Gate& pg = c.gates[pos];
    std::vector<Pauli> letters(c.n_qubits, Pauli::I);
    letters[pg.q0] = pg.generator();
    apply_pauli(s, PauliString(letters));
    for (size_t i = pos + 1; i < gates.size(); ++i) apply_gate(s, gates[i]);
    DerivativeFactor f;
    f.index = index;
    f.generator = pg.generator();
    f.qubit = pg.q0;
    return {s, f};
}

// ---------------------------------------------------------------------------
// Pruning
// ---------------------------------------------------------------------------

/// Re-optimizes the parameters of a (possibly shrunken) circuit starting from
/// the given values; returns the tuned parameters and the reached energy.
using Reoptimizer =
    std::function<std::pair<Eigen::VectorXd, double>(const ParamCircuit&, const Eigen::VectorXd&)>;

struct PruneResult {
    ParamCircuit circuit;
    Eigen::VectorXd theta;
    double energy = 0;
};

namespace detail {

inline std::pair<ParamCircuit, Eigen::VectorXd> remove_gate(const ParamCircuit& c,
                                                            const Eigen::VectorXd& theta,
                                                            size_t gate_index) {
    ParamCircuit out = c;
    std::optional<int> dropped_slot = c.gates[gate_index].param_slot;
    out.gates.erase(out.gates.begin() + gate_index);
    Eigen::VectorXd th = theta;
    if (dropped_slot) {
        for (auto& g : out.gates)
            if (g.param_slot && *g.param_slot > *dropped_slot) --*g.param_slot;
        th.resize(theta.size() - 1);
        for (Eigen::Index i = 0, j = 0; i < theta.size(); ++i)
            if (int(i) != *dropped_slot) th[j++] = theta[i];
    }
    out.recount();
    return {out, th};
}

inline double dist_to_zero_angle(double theta) {
    return std::abs(std::remainder(theta, 2 * M_PI));
}

}  // namespace detail

/// Iteratively removes the rotation gate whose parameter sits closest to 0
/// (mod 2pi, below threshold), re-optimizing after each removal; a removal is
/// kept only while the retuned energy stays at or below success_energy. Once
/// rotation pruning stalls, single two-qubit-gate removals are trialled under
/// the same accept/revert rule; an accepted removal restarts rotation pruning.
inline PruneResult prune(const ParamCircuit& ansatz, const Eigen::VectorXd& theta,
                         const PauliHamiltonian& h, double threshold, double success_energy,
                         const Reoptimizer& reoptimize) {
    PruneResult cur{ansatz, theta, energy(simulate(ansatz, theta), h)};
    if (cur.energy > success_energy + 1e-12)
        throw std::invalid_argument("prune requires a circuit already at the success energy");

    while (true) {
        bool progress = false;
        // Rotation phase: always take the slot currently closest to zero.
        while (true) {
            int best_gate = -1;
            double best_dist = threshold;
            for (size_t i = 0; i < cur.circuit.gates.size(); ++i) {
                const auto& g = cur.circuit.gates[i];
                if (!g.param_slot) continue;
                const double d = detail::dist_to_zero_angle(cur.theta[*g.param_slot]);
                if (d < best_dist) {
                    best_dist = d;
                    best_gate = static_cast<int>(i);
                }
            }
            if (best_gate < 0) break;
            auto [trial, th0] = detail::remove_gate(cur.circuit, cur.theta, best_gate);
            auto [th, en] = reoptimize(trial, th0);
            if (en <= success_energy) {
                cur = {std::move(trial), std::move(th), en};
                progress = true;
            } else {
                break;  // revert this removal and stop rotation pruning
            }
        }
        // Two-qubit removal trials, one gate at a time.
        for (size_t i = 0; i < cur.circuit.gates.size(); ++i) {
            if (!is_two_qubit(cur.circuit.gates[i].kind)) continue;
            auto [trial, th0] = detail::remove_gate(cur.circuit, cur.theta, i);
            auto [th, en] = reoptimize(trial, th0);
            if (en <= success_energy) {
                cur = {std::move(trial), std::move(th), en};
                progress = true;
                break;
            }
        }
        if (!progress) break;
    }
    return cur;
}

// ---------------------------------------------------------------------------
// Circuit JSON
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/// Serializes a circuit; rotation gates carry "param_slot" while unbound and
/// "angle" (17 significant digits) when bound. Byte-stable for equal inputs.
inline std::string circuit_to_json(const ParamCircuit& c,
                                   const std::optional<Eigen::VectorXd>& theta = std::nullopt) {
    std::string out = "{\n  \"n_qubits\": " + std::to_string(c.n_qubits) + ",\n  \"gates\": [\n";
    for (size_t i = 0; i < c.gates.size(); ++i) {
        const Gate& g = c.gates[i];
        out += "    {\"kind\": \"" + std::string(gate_name(g.kind)) + "\", \"qubits\": [" +
               std::to_string(g.q0);
        if (is_two_qubit(g.kind)) out += ", " + std::to_string(g.q1);
        out += "]";
        if (g.param_slot) {
            if (theta)
                out += ", \"angle\": " + detail::fmt17((*theta)[*g.param_slot]);
            else
                out += ", \"param_slot\": " + std::to_string(*g.param_slot);
        } else if (g.angle) {
            out += ", \"angle\": " + detail::fmt17(*g.angle);
        }
        out += "}";
        if (i + 1 < c.gates.size()) out += ",";
        out += "\n";
    }
    out += "  ]\n}\n";
    return out;
}

inline ParamCircuit circuit_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("circuit document must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (key != "n_qubits" && key != "gates")
            throw std::invalid_argument("unknown key in circuit document: \"" + key + "\"");
    if (!j.contains("n_qubits") || !j.contains("gates"))
        throw std::invalid_argument("circuit document needs \"n_qubits\" and \"gates\"");

    ParamCircuit c;
    c.n_qubits = j["n_qubits"].get<int>();
    c.n_data = c.n_qubits;
    if (c.n_qubits < 1 || c.n_qubits > 10)
        throw std::invalid_argument("n_qubits must lie in 1..10");
    for (const auto& jg : j["gates"]) {
        for (const auto& [key, _] : jg.items())
            if (key != "kind" && key != "qubits" && key != "angle" && key != "param_slot")
                throw std::invalid_argument("unknown key in gate entry: \"" + key + "\"");
        const auto kind = gate_kind_from_name(jg.at("kind").get<std::string>());
        if (!kind)
            throw std::invalid_argument("unknown gate kind \"" +
                                        jg.at("kind").get<std::string>() + "\"");
        const auto& qubits = jg.at("qubits");
        if (!qubits.is_array() || qubits.empty() || qubits.size() > 2)
            throw std::invalid_argument("gate \"qubits\" must list 1 or 2 indices");
        Gate g;
        g.kind = *kind;
        g.q0 = qubits[0].get<int>();
        g.q1 = qubits.size() == 2 ? qubits[1].get<int>() : -1;
        if (is_two_qubit(*kind) != (qubits.size() == 2))
            throw std::invalid_argument("qubit count does not match gate arity");
        if (jg.contains("angle")) g.angle = jg["angle"].get<double>();
        if (jg.contains("param_slot")) g.param_slot = jg["param_slot"].get<int>();
        c.gates.push_back(g);
    }
    c.recount();
    validate_circuit(c);
    return c;
}

/// Human-readable one-gate-per-line listing.
inline std::string circuit_to_text(const ParamCircuit& c,
                                   const std::optional<Eigen::VectorXd>& theta = std::nullopt) {
    std::string out;
    for (const Gate& g : c.gates) {
        out += gate_name(g.kind);
        if (g.param_slot && theta)
            out += "(" + detail::fmt17((*theta)[*g.param_slot]) + ")";
        else if (g.param_slot)
            out += "(theta" + std::to_string(*g.param_slot) + ")";
        else if (g.angle)
            out += "(" + detail::fmt17(*g.angle) + ")";
        out += " q" + std::to_string(g.q0);
        if (is_two_qubit(g.kind)) out += ",q" + std::to_string(g.q1);
        out += "\n";
    }
    return out;
}

}  // namespace varqec
