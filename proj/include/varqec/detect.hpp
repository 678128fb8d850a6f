#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "varqec/ansatz.hpp"
#include "varqec/codes.hpp"
#include "varqec/qsim.hpp"

namespace varqec {

/// Raised when a requested post-selection gadget cannot be built for the
/// given target (no logical Pauli stabilizes it).
struct UnsupportedTarget : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class GadgetKind { LogicalOp, Stabilizer, StabilizerFlagged, FullStabilizerSet };

/// One ancilla-mediated parity measurement: the observable op (phase +1) is
/// measured via controlled Paulis from an ancilla prepared in |+>, which is
/// read out in the X basis; accept_plus gives the accepted outcome. When
/// flagged, a second ancilla in |0> catches correlated ancilla faults and
/// must read 0.
struct MeasRound {
    PauliString op;
    bool flagged = false;
    bool accept_plus = true;
};

struct DetectionGadget {
    GadgetKind kind = GadgetKind::Stabilizer;
    int n_data = 0;
    std::vector<MeasRound> rounds;

    int ancillas_per_round() const {
        return rounds.empty() || !rounds.front().flagged ? 1 : 2;
    }
    std::vector<PauliString> measured_ops() const {
        std::vector<PauliString> ops;
        for (const auto& r : rounds) ops.push_back(r.op);
        return ops;
    }
};

/// Post-selection on the logical Pauli that stabilizes the target. Only
/// targets that are +/-1 eigenstates of X_L, Y_L or Z_L qualify; the measured
/// operator is replaced by its minimum-weight stabilizer-coset representative.
inline DetectionGadget logical_postselect_gadget(const StabilizerCode& code,
                                                 const LogicalTarget& target,
                                                 bool flagged = false) {
    require_valid(code);
    const WeightedPauliSum o_l = logical_operator(code, target);
    if (o_l.terms.size() != 1 || std::abs(std::abs(o_l.terms[0].first) - 1.0) > 1e-9)
        throw UnsupportedTarget(
            "target is not a logical Pauli eigenstate; use stabilizer gadgets instead");
    const double weight = o_l.terms[0].first;  // +/-1, string phase already folded in
    const PauliString rep = min_weight_logical(code, o_l.terms[0].second);

    DetectionGadget g;
    g.kind = GadgetKind::LogicalOp;
    g.n_data = code.n_qubits;
    MeasRound round;
    round.op = rep.with_positive_phase();
    round.flagged = flagged;
    // M|phi> = s|phi> with s = sign(weight) * coset sign; accept that outcome.
    round.accept_plus = weight * rep.sign() > 0;
    g.rounds.push_back(round);
    return g;
}

/// Measurement of a single stabilizer generator, optionally flag-protected.
inline DetectionGadget stabilizer_gadget(const StabilizerCode& code, int which, bool flagged) {
    require_valid(code);
    if (which < 0 || which >= static_cast<int>(code.generators.size()))
        throw std::out_of_range("generator index out of range");
    DetectionGadget g;
    g.kind = flagged ? GadgetKind::StabilizerFlagged : GadgetKind::Stabilizer;
    g.n_data = code.n_qubits;
    g.rounds.push_back(MeasRound{code.generators[which], flagged, true});
    return g;
}

/// Sequential measurement of every generator; accept = all rounds accept.
inline DetectionGadget full_stabilizer_gadget(const StabilizerCode& code, bool flagged) {
    require_valid(code);
    DetectionGadget g;
    g.kind = GadgetKind::FullStabilizerSet;
    g.n_data = code.n_qubits;
    for (const auto& gen : code.generators) g.rounds.push_back(MeasRound{gen, flagged, true});
    return g;
}

namespace detail {

/// Gates of one measurement round over data qubits [0, n_data) with the
/// syndrome ancilla at index anc and the flag (if used) at anc+1. Controlled
/// Paulis run in ascending data-qubit order; flag CNOTs sit after the first
/// and before the last controlled Pauli. Controlled-Y decomposes as
/// Rz(-pi/2) . CNOT . S on the target so the two-qubit count equals the
/// operator weight.
inline std::vector<Gate> round_gates(const MeasRound& round, int anc) {
    std::vector<Gate> gates;
    gates.push_back(Gate::single(GateKind::H, anc));  // ancilla |0> -> |+>
    std::vector<int> support;
    for (int q = 0; q < round.op.n_qubits(); ++q)
        if (round.op.letter(q) != Pauli::I) support.push_back(q);
    const int w = static_cast<int>(support.size());
    for (int k = 0; k < w; ++k) {
        const int q = support[k];
        switch (round.op.letter(q)) {
            case Pauli::X:
                gates.push_back(Gate::two(GateKind::CNOT, anc, q));
                break;
            case Pauli::Z:
                gates.push_back(Gate::two(GateKind::CZ, anc, q));
                break;
            case Pauli::Y:
                gates.push_back(Gate::rot(GateKind::Rz, q, -M_PI / 2));
                gates.push_back(Gate::two(GateKind::CNOT, anc, q));
                gates.push_back(Gate::single(GateKind::S, q));
                break;
            default:
                break;
        }
        if (round.flagged && w >= 2) {
            if (k == 0) gates.push_back(Gate::two(GateKind::CNOT, anc, anc + 1));
            if (k == w - 2) gates.push_back(Gate::two(GateKind::CNOT, anc, anc + 1));
        }
    }
    return gates;
}

}  // namespace detail

/// Number of two-qubit gates a gadget adds (flag CNOTs included).
inline int gadget_two_qubit_count(const DetectionGadget& g) {
    int count = 0;
    for (const auto& r : g.rounds) {
        count += r.op.weight();
        if (r.flagged && r.op.weight() >= 2) count += 2;
    }
    return count;
}

struct EvaluationResult {
    double fidelity = 0;
    double accept_prob = 1;
};

/// Density-matrix evaluation of prep + detection under depolarizing noise.
/// Every gate (preparation and gadget alike) is followed by one depolarizing
/// channel per touched qubit; measured ancillas are depolarized with
/// meas_error before projection. Post-selection renormalizes onto the accept
/// branch and the joint accept probability is returned. Without a gadget
/// this is the bare-preparation baseline with accept_prob 1.
inline EvaluationResult evaluate(const ParamCircuit& prep,
                                 const std::optional<DetectionGadget>& gadget,
                                 const NoiseModel& noise, const StateVector& target) {
    noise.check();
    if (prep.n_params != 0)
        throw std::invalid_argument("evaluate requires a fully bound preparation circuit");
    if (prep.n_qubits < target.n_qubits)
        throw std::invalid_argument("preparation circuit has fewer qubits than the target");
    if (gadget && gadget->n_data != target.n_qubits)
        throw std::invalid_argument("gadget/target qubit-count mismatch");

    DensityMatrix rho = DensityMatrix::zero_state(prep.n_qubits);
    apply_noisy_circuit(rho, prep.gates, noise);

    double accept = 1.0;
    if (gadget) {
        for (const auto& round : gadget->rounds) {
            const int anc = rho.n_qubits;
            rho = append_zero_qubit(rho);
            if (round.flagged) rho = append_zero_qubit(rho);
            apply_noisy_circuit(rho, detail::round_gates(round, anc), noise);
            if (round.flagged) {
                // Flag first (higher index), then the syndrome ancilla.
                auto flag = project_ancilla(rho, anc + 1, MeasBasis::Z, true, noise.meas_error);
                accept *= flag.probability;
                rho = std::move(flag.state);
            }
            auto synd =
                project_ancilla(rho, anc, MeasBasis::X, round.accept_plus, noise.meas_error);
            accept *= synd.probability;
            rho = std::move(synd.state);
        }
    }
    if (accept < 1e-12) throw ZeroProbability("gadget acceptance probability is (near-)zero");

    if (rho.n_qubits > target.n_qubits) rho = partial_trace_tail(rho, target.n_qubits);
    return {fidelity(rho, target), accept};
}

// ---------------------------------------------------------------------------
// Sweep variants
// ---------------------------------------------------------------------------

enum class SweepVariant {
    Baseline,
    StabMean,
    StabMeanFlagged,
    LogicalOp,
    LogicalOpFlagged,
    FullSet,
    FullSetFlagged,
};

inline const char* variant_name(SweepVariant v) {
    switch (v) {
        case SweepVariant::Baseline: return "baseline";
        case SweepVariant::StabMean: return "stab-mean";
        case SweepVariant::StabMeanFlagged: return "stab-mean-flagged";
        case SweepVariant::LogicalOp: return "logical-op";
        case SweepVariant::LogicalOpFlagged: return "logical-op-flagged";
        case SweepVariant::FullSet: return "full-set";
        case SweepVariant::FullSetFlagged: return "full-set-flagged";
    }
    return "?";
}

inline std::optional<SweepVariant> variant_from_name(const std::string& s) {
    for (SweepVariant v :
         {SweepVariant::Baseline, SweepVariant::StabMean, SweepVariant::StabMeanFlagged,
          SweepVariant::LogicalOp, SweepVariant::LogicalOpFlagged, SweepVariant::FullSet,
          SweepVariant::FullSetFlagged}) {
        if (s == variant_name(v)) return v;
    }
    return std::nullopt;
}

inline std::vector<SweepVariant> all_variants() {
    return {SweepVariant::Baseline,  SweepVariant::StabMean, SweepVariant::StabMeanFlagged,
            SweepVariant::LogicalOp, SweepVariant::LogicalOpFlagged, SweepVariant::FullSet,
            SweepVariant::FullSetFlagged};
}

/// Per-generator results plus their mean, for the single-stabilizer variants.
struct StabilizerSweep {
    std::vector<EvaluationResult> per_generator;
    EvaluationResult mean;
};

inline StabilizerSweep evaluate_stabilizer_mean(const ParamCircuit& prep,
                                                const StabilizerCode& code, bool flagged,
                                                const NoiseModel& noise,
                                                const StateVector& target) {
    StabilizerSweep sweep;
    double f = 0, a = 0;
    for (int i = 0; i < static_cast<int>(code.generators.size()); ++i) {
        const auto r = evaluate(prep, stabilizer_gadget(code, i, flagged), noise, target);
        sweep.per_generator.push_back(r);
        f += r.fidelity;
        a += r.accept_prob;
    }
    const double n = double(sweep.per_generator.size());
    sweep.mean = {f / n, a / n};
    return sweep;
}

/// Evaluates one named variant. Throws UnsupportedTarget for the logical-op
/// variants when the target is not a logical Pauli eigenstate.
inline EvaluationResult evaluate_variant(const ParamCircuit& prep, const StabilizerCode& code,
                                         const LogicalTarget& target, const NoiseModel& noise,
                                         const StateVector& target_state, SweepVariant v) {
    switch (v) {
        case SweepVariant::Baseline:
            return evaluate(prep, std::nullopt, noise, target_state);
        case SweepVariant::StabMean:
            return evaluate_stabilizer_mean(prep, code, false, noise, target_state).mean;
        case SweepVariant::StabMeanFlagged:
            return evaluate_stabilizer_mean(prep, code, true, noise, target_state).mean;
        case SweepVariant::LogicalOp:
            return evaluate(prep, logical_postselect_gadget(code, target, false), noise,
                            target_state);
        case SweepVariant::LogicalOpFlagged:
            return evaluate(prep, logical_postselect_gadget(code, target, true), noise,
                            target_state);
        case SweepVariant::FullSet:
            return evaluate(prep, full_stabilizer_gadget(code, false), noise, target_state);
        case SweepVariant::FullSetFlagged:
            return evaluate(prep, full_stabilizer_gadget(code, true), noise, target_state);
    }
    throw std::logic_error("unknown sweep variant");
}

}  // namespace varqec
