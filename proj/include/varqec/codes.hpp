#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "varqec/pauli.hpp"
#include "varqec/qsim.hpp"

namespace varqec {

/// Target single-logical-qubit state alpha|0>_L + beta|1>_L.
struct LogicalTarget {
    cd alpha{1, 0};
    cd beta{0, 0};

    static LogicalTarget zero() { return {1, 0}; }
    static LogicalTarget one() { return {0, 1}; }
    static LogicalTarget minus() { return {1 / std::sqrt(2.0), -1 / std::sqrt(2.0)}; }
    static LogicalTarget plus() { return {1 / std::sqrt(2.0), 1 / std::sqrt(2.0)}; }
    static LogicalTarget magic() {
        const double r = 1 / std::sqrt(2.0);
        return {cd(r, 0), std::polar(r, M_PI / 4)};
    }

    void check_normalized(double tol = 1e-12) const {
        if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > tol)
            throw std::invalid_argument("logical target is not normalized");
    }
};

/// One stabilizer code encoding a single logical qubit: n - |generators| = 1.
struct StabilizerCode {
    int n_qubits = 0;
    std::vector<PauliString> generators;
    PauliString logical_x;
    PauliString logical_z;
    std::string name;
};

inline StabilizerCode five_qubit_code() {
    StabilizerCode c;
    c.n_qubits = 5;
    c.generators = {PauliString::parse("XZZXI"), PauliString::parse("IXZZX"),
                    PauliString::parse("XIXZZ"), PauliString::parse("ZXIXZ")};
    c.logical_x = PauliString::parse("XXXXX");
    c.logical_z = PauliString::parse("ZZZZZ");
    c.name = "five-qubit";
    return c;
}

inline StabilizerCode steane_code() {
    StabilizerCode c;
    c.n_qubits = 7;
    c.generators = {PauliString::parse("IIIXXXX"), PauliString::parse("XXIIXXI"),
                    PauliString::parse("XIXIXIX"), PauliString::parse("IIIZZZZ"),
                    PauliString::parse("ZZIIZZI"), PauliString::parse("ZIZIZIZ")};
    c.logical_x = PauliString::parse("XXXXXXX");
    c.logical_z = PauliString::parse("ZZZZZZZ");
    c.name = "steane";
    return c;
}

namespace detail {

/// GF(2) rank of symplectic row vectors (x_bits | z_bits).
inline int symplectic_rank(std::vector<uint64_t> rows) {
    int rank = 0;
    for (int bit = 63; bit >= 0; --bit) {
        const uint64_t mask = uint64_t(1) << bit;
        auto pivot = std::find_if(rows.begin() + rank, rows.end(),
                                  [&](uint64_t r) { return r & mask; });
        if (pivot == rows.end()) continue;
        std::swap(*pivot, rows[rank]);
        for (size_t i = 0; i < rows.size(); ++i)
            if (int(i) != rank && (rows[i] & mask)) rows[i] ^= rows[rank];
        ++rank;
    }
    return rank;
}

inline uint64_t symplectic_row(const PauliString& p) {
    return (uint64_t(p.x_bits()) << 32) | uint64_t(p.z_bits());
}

/// True iff p's letters lie in the GF(2) span of the generators' letters.
inline bool in_stabilizer_span(const std::vector<PauliString>& gens, const PauliString& p) {
    std::vector<uint64_t> rows;
    rows.reserve(gens.size());
    for (const auto& g : gens) rows.push_back(symplectic_row(g));
    const int base = symplectic_rank(rows);
    rows.push_back(symplectic_row(p));
    return symplectic_rank(rows) == base;
}

}  // namespace detail

/// Checks every structural invariant of a StabilizerCode and reports the
/// first violation, or nullopt when the code is well formed.
inline std::optional<std::string> validate(const StabilizerCode& code) {
    const int n = code.n_qubits;
    const int l = static_cast<int>(code.generators.size());
    if (n < 1 || n > 10) return "n_qubits must lie in 1..10";
    for (const auto& g : code.generators) {
        if (g.n_qubits() != n) return "generator length differs from n_qubits";
        if (g.phase_pow() != 0) return "generators must carry phase +1";
        if (g.is_identity_letters()) return "identity generator";
    }
    for (const auto* L : {&code.logical_x, &code.logical_z}) {
        if (L->n_qubits() != n) return "logical operator length differs from n_qubits";
        if (!L->is_hermitian()) return "logical operator must be Hermitian";
        if (L->is_identity_letters()) return "identity logical operator";
    }
    for (int i = 0; i < l; ++i)
        for (int j = i + 1; j < l; ++j)
            if (!code.generators[i].commutes_with(code.generators[j]))
                return "generators anticommute: " + code.generators[i].str() + " vs " +
                       code.generators[j].str();
    {
        std::vector<uint64_t> rows;
        for (const auto& g : code.generators) rows.push_back(detail::symplectic_row(g));
        if (detail::symplectic_rank(rows) != l) return "generators are not independent";
    }
    if (n - l != 1) return "code must encode exactly one logical qubit (n - l = 1)";
    for (const auto& g : code.generators) {
        if (!code.logical_x.commutes_with(g))
            return "logical_x anticommutes with generator " + g.str();
        if (!code.logical_z.commutes_with(g))
            return "logical_z anticommutes with generator " + g.str();
    }
    if (detail::in_stabilizer_span(code.generators, code.logical_x))
        return "logical operator in stabilizer: logical_x";
    if (detail::in_stabilizer_span(code.generators, code.logical_z))
        return "logical operator in stabilizer: logical_z";
    if (code.logical_x.commutes_with(code.logical_z))
        return "logical_x and logical_z must anticommute";
    return std::nullopt;
}

inline void require_valid(const StabilizerCode& code) {
    if (auto v = validate(code))
        throw std::invalid_argument("invalid stabilizer code '" + code.name + "': " + *v);
}

/// O_L = c_x X_L + c_y Y_L + c_z Z_L with Y_L = i X_L Z_L. Each entry pairs a
/// real weight with a phase-(+/-1) Pauli string; zero components are dropped.
struct WeightedPauliSum {
    std::vector<std::pair<double, PauliString>> terms;
};

/// Builds the logical operator stabilizing alpha|0>_L + beta|1>_L:
/// (ab* + a*b) X_L - i(a*b - ab*) Y_L - (|b|^2 - |a|^2) Z_L.
inline WeightedPauliSum logical_operator(const StabilizerCode& code, const LogicalTarget& t) {
    t.check_normalized();
    const cd a = t.alpha, b = t.beta;
    const double cx = (a * std::conj(b) + std::conj(a) * b).real();
    const double cy = (-cd(0, 1) * (std::conj(a) * b - a * std::conj(b))).real();
    const double cz = (std::norm(a) - std::norm(b));
    const PauliString y_l = (code.logical_x * code.logical_z).times_i();

    WeightedPauliSum sum;
    const double eps = 1e-15;
    auto push = [&](double coeff, const PauliString& p) {
        if (std::abs(coeff) < eps) return;
        // Fold the string's +/-1 sign into the real weight.
        sum.terms.emplace_back(coeff * p.sign(), p.with_positive_phase());
    };
    push(cx, code.logical_x);
    push(cy, y_l);
    push(cz, code.logical_z);
    return sum;
}

/// Exact logical basis states. |0>_L is the normalized image of the projector
/// prod_i (I + g_i)/2 * (I + Z_L)/2, with its global phase fixed so that the
/// first nonzero amplitude is real positive; |1>_L = X_L |0>_L.
inline std::pair<StateVector, StateVector> logical_basis_states(const StabilizerCode& code) {
    require_valid(code);
    const int n = code.n_qubits;
    const size_t dim = size_t(1) << n;

    auto project = [&](StateVector v) {
        std::vector<PauliString> ops = code.generators;
        ops.push_back(code.logical_z);
        for (const auto& g : ops) {
            StateVector gv = v;
            apply_pauli(gv, g);
            v.amps = 0.5 * (v.amps + gv.amps);
        }
        return v;
    };

    // Code projector rank = Tr prod (I+g_i)/2, evaluated from basis columns.
    double code_rank = 0;
    StateVector zero_l;
    double best_norm = -1;
    for (size_t k = 0; k < dim; ++k) {
        StateVector e;
        e.n_qubits = n;
        e.amps = Eigen::VectorXcd::Zero(dim);
        e.amps[k] = 1.0;
        StateVector ce = e;
        for (const auto& g : code.generators) {
            StateVector gv = ce;
            apply_pauli(gv, g);
            ce.amps = 0.5 * (ce.amps + gv.amps);
        }
        code_rank += ce.amps[k].real();
        StateVector pe = project(e);
        const double nn = pe.amps.norm();
        if (nn > best_norm) {
            best_norm = nn;
            zero_l = pe;
        }
    }
    if (std::abs(code_rank - 2.0) > 1e-6)
        throw std::runtime_error("code projector rank != 2");
    if (best_norm < 1e-9) throw std::runtime_error("logical projector has empty image");

    zero_l.amps /= best_norm;
    // Global-phase convention: first nonzero amplitude real positive.
    for (Eigen::Index k = 0; k < zero_l.amps.size(); ++k) {
        if (std::abs(zero_l.amps[k]) > 1e-8) {
            zero_l.amps *= std::conj(zero_l.amps[k]) / std::abs(zero_l.amps[k]);
            break;
        }
    }
    StateVector one_l = zero_l;
    apply_pauli(one_l, code.logical_x);
    return {zero_l, one_l};
}

/// Exact target state alpha|0>_L + beta|1>_L as a dense vector.
inline StateVector logical_state(const StabilizerCode& code, const LogicalTarget& t) {
    t.check_normalized();
    auto [zero_l, one_l] = logical_basis_states(code);
    StateVector out = zero_l;
    out.amps = t.alpha * zero_l.amps + t.beta * one_l.amps;
    return out;
}

/// Multiplies p by all 2^l stabilizer products and returns a minimum-weight
/// representative; ties break toward the lexicographically smallest letter
/// sequence (I < X < Y < Z). p must commute with every generator.
inline PauliString min_weight_logical(const StabilizerCode& code, const PauliString& p) {
    for (const auto& g : code.generators)
        if (!p.commutes_with(g))
            throw std::invalid_argument("operator anticommutes with generator " + g.str());
    const size_t l = code.generators.size();
    PauliString best = p;
    for (size_t mask = 1; mask < (size_t(1) << l); ++mask) {
        PauliString cand = p;
        for (size_t i = 0; i < l; ++i)
            if (mask & (size_t(1) << i)) cand = cand * code.generators[i];
        if (cand.weight() < best.weight() ||
            (cand.weight() == best.weight() && cand.letters_less(best)))
            best = cand;
    }
    return best;
}

// ---------------------------------------------------------------------------
// JSON code files
// ---------------------------------------------------------------------------

/// Loads a code from {"n": int, "generators": [...], "logical_x": "...",
/// "logical_z": "...", "name": "..."}. Letters parse case-insensitively and
/// phase prefixes are rejected. Unknown keys are rejected.
inline StabilizerCode code_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("code document must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (key != "n" && key != "generators" && key != "logical_x" && key != "logical_z" &&
            key != "name")
            throw std::invalid_argument("unknown key in code document: \"" + key + "\"");
    }
    for (const char* key : {"n", "generators", "logical_x", "logical_z", "name"})
        if (!j.contains(key))
            throw std::invalid_argument("code document missing key \"" + std::string(key) + "\"");

    StabilizerCode c;
    if (!j["n"].is_number_integer()) throw std::invalid_argument("\"n\" must be an integer");
    c.n_qubits = j["n"].get<int>();
    if (!j["generators"].is_array())
        throw std::invalid_argument("\"generators\" must be an array of strings");
    for (const auto& g : j["generators"]) {
        if (!g.is_string()) throw std::invalid_argument("generator entries must be strings");
        c.generators.push_back(PauliString::parse(g.get<std::string>()));
    }
    c.logical_x = PauliString::parse(j["logical_x"].get<std::string>());
    c.logical_z = PauliString::parse(j["logical_z"].get<std::string>());
    c.name = j["name"].get<std::string>();
    return c;
}

inline nlohmann::json code_to_json(const StabilizerCode& code) {
    nlohmann::json j;
    j["n"] = code.n_qubits;
    auto gens = nlohmann::json::array();
    for (const auto& g : code.generators) gens.push_back(g.with_positive_phase().str());
    j["generators"] = gens;
    j["logical_x"] = code.logical_x.with_positive_phase().str();
    j["logical_z"] = code.logical_z.with_positive_phase().str();
    j["name"] = code.name;
    return j;
}

}  // namespace varqec
