#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "varqec/ansatz.hpp"
#include "varqec/codes.hpp"
#include "varqec/hamiltonian.hpp"
#include "varqec/qsim.hpp"
#include "varqec/rng.hpp"

namespace varqec {

/// Pure-state imaginary-time linear system A theta_dot = -B.
struct ItePure {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
};

/// Mixed-state imaginary-time linear system C theta_dot = -D.
struct IteMixed {
    Eigen::MatrixXd C;
    Eigen::VectorXd D;
};

struct EvolutionMode {
    bool is_mixed = false;
    NoiseModel noise;

    static EvolutionMode pure() { return {}; }
    static EvolutionMode mixed(NoiseModel n) { return {true, n}; }
};

struct RunOptions {
    double dtau = 0.05;
    int max_steps = 4000;
    double reg_lambda = 1e-6;
    std::optional<double> success_energy;  // resolved to E0 + 1e-4 when unset
    int plateau_window = 200;
    double plateau_eps = 1e-7;
    int max_restarts = 100;

    // Restart-loop plumbing.
    uint64_t base_seed = 1;
    int workers = 1;
    int goal_two_qubit = -1;  // stop restarting once reached; -1 = run the full budget
    double prune_threshold = 1e-2;

    double resolved_success(const PauliHamiltonian& h) const {
        return success_energy.value_or(h.e0 + 1e-4);
    }
    void check() const {
        if (!(dtau > 0)) throw std::invalid_argument("dtau must be positive");
        if (reg_lambda < 0) throw std::invalid_argument("reg_lambda must be nonnegative");
        if (max_steps < 1 || plateau_window < 1 || max_restarts < 1)
            throw std::invalid_argument("step/window/restart counts must be positive");
        if (workers < 1) throw std::invalid_argument("workers must be positive");
    }
};

/// Raised when an evolution step produces a non-finite energy.
struct NumericalBlowup : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parameter initialization range (radians) for fresh ansatz attempts.
inline constexpr double kInitWidth = 0.05;

// ---------------------------------------------------------------------------
// System assembly
// ---------------------------------------------------------------------------

namespace detail {

struct AssembledPure {
    ItePure sys;
    double energy = 0;
};

struct AssembledMixed {
    IteMixed sys;
    double energy = 0;
};

}  // namespace detail

/// A_ij = Re( f_i* f_j <phi_i|phi_j> + f_i*<phi_i|psi> f_j*<phi_j|psi> ),
/// B_i = Re( f_i* <phi_i|H|psi> ), with all inner products exact.
inline detail::AssembledPure assemble_pure_with_energy(const ParamCircuit& c,
                                                       const Eigen::VectorXd& theta,
                                                       const PauliHamiltonian& h) {
    const auto gates = bind(c, theta);
    const int m = c.n_params;
    const Eigen::Index dim = Eigen::Index(1) << c.n_qubits;

    // Forward pass, keeping the state after every gate.
    std::vector<Eigen::VectorXcd> prefix(gates.size() + 1);
    StateVector s = StateVector::zero_state(c.n_qubits);
    prefix[0] = s.amps;
    for (size_t i = 0; i < gates.size(); ++i) {
        apply_gate(s, gates[i]);
        prefix[i + 1] = s.amps;
    }
    const StateVector psi = s;

    // phi_i: re-simulate from the prefix with the generator Pauli inserted.
    Eigen::MatrixXcd phi(dim, m);
    int slot = 0;
    for (size_t i = 0; i < c.gates.size(); ++i) {
        if (!c.gates[i].param_slot) continue;
        StateVector t;
        t.n_qubits = c.n_qubits;
        t.amps = prefix[i + 1];
        std::vector<Pauli> letters(c.n_qubits, Pauli::I);
        letters[c.gates[i].q0] = c.gates[i].generator();
        apply_pauli(t, PauliString(letters));
        for (size_t k = i + 1; k < gates.size(); ++k) apply_gate(t, gates[k]);
        phi.col(slot++) = t.amps;
    }

    const Eigen::VectorXcd overlaps = phi.adjoint() * psi.amps;  // <phi_i|psi>
    const Eigen::VectorXcd u = cd(0, 0.5) * overlaps;            // f_i* <phi_i|psi>
    detail::AssembledPure out;
    out.sys.A = 0.25 * (phi.adjoint() * phi).real() + (u * u.transpose()).real();
    const Eigen::VectorXcd hpsi = apply_hamiltonian(psi, h).amps;
    out.sys.B = (cd(0, 0.5) * (phi.adjoint() * hpsi)).real();
    out.energy = (psi.amps.dot(hpsi)).real();
    return out;
}

inline ItePure assemble_pure(const ParamCircuit& c, const Eigen::VectorXd& theta,
                             const PauliHamiltonian& h) {
    return assemble_pure_with_energy(c, theta, h).sys;
}

/// C_ji = Tr[d_j rho d_i rho], D_j = Tr[d_j rho {H, rho}], with the
/// derivatives d_i rho propagated analytically: the commutator map
/// sigma -> (-i/2)[P_i, sigma] is inserted after gate i's unitary and pushed
/// linearly through all later gates and noise channels.
inline detail::AssembledMixed assemble_mixed_with_energy(const ParamCircuit& c,
                                                         const Eigen::VectorXd& theta,
                                                         const PauliHamiltonian& h,
                                                         const NoiseModel& noise) {
    noise.check();
    const auto gates = bind(c, theta);
    const int n = c.n_qubits;
    const Eigen::Index dim = Eigen::Index(1) << n;

    DensityMatrix rho = DensityMatrix::zero_state(n);
    std::vector<Eigen::MatrixXcd> derivs;
    derivs.reserve(c.n_params);

    for (size_t i = 0; i < gates.size(); ++i) {
        const Gate& g = gates[i];
        apply_gate(rho, g);
        for (auto& d : derivs) gate_sandwich(d, n, g);
        if (c.gates[i].param_slot) {
            std::vector<Pauli> letters(n, Pauli::I);
            letters[g.q0] = c.gates[i].generator();
            const PauliString p(letters);
            Eigen::MatrixXcd left = rho.rho, right = rho.rho;
            pauli_left_multiply(left, p, n);
            pauli_right_multiply(right, p, n);
            derivs.push_back(cd(0, -0.5) * (left - right));
        }
        if (noise.gate_error > 0) {
            depolarize_matrix(rho.rho, n, g.q0, noise.gate_error);
            if (is_two_qubit(g.kind)) depolarize_matrix(rho.rho, n, g.q1, noise.gate_error);
            for (auto& d : derivs) {
                depolarize_matrix(d, n, g.q0, noise.gate_error);
                if (is_two_qubit(g.kind)) depolarize_matrix(d, n, g.q1, noise.gate_error);
            }
        }
    }

    const int m = static_cast<int>(derivs.size());
    detail::AssembledMixed out;
    out.sys.C.resize(m, m);
    for (int j = 0; j < m; ++j) {
        for (int i = j; i < m; ++i) {
            // Tr[d_j d_i] with both Hermitian.
            const double v = derivs[j].cwiseProduct(derivs[i].conjugate()).sum().real();
            out.sys.C(j, i) = v;
            out.sys.C(i, j) = v;
        }
    }
    // {H, rho} assembled term by term.
    Eigen::MatrixXcd anti = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& [w, p] : h.terms) {
        Eigen::MatrixXcd left = rho.rho, right = rho.rho;
        pauli_left_multiply(left, p, n);
        pauli_right_multiply(right, p, n);
        anti += w * (left + right);
    }
    out.sys.D.resize(m);
    for (int j = 0; j < m; ++j)
        out.sys.D[j] = derivs[j].cwiseProduct(anti.transpose()).sum().real();
    out.energy = energy(rho, h);
    return out;
}

inline IteMixed assemble_mixed(const ParamCircuit& c, const Eigen::VectorXd& theta,
                               const PauliHamiltonian& h, const NoiseModel& noise) {
    return assemble_mixed_with_energy(c, theta, h, noise).sys;
}

// ---------------------------------------------------------------------------
// Linear solve
// ---------------------------------------------------------------------------

/// Solves (M + lambda I) x = -v via a symmetric factorization. When that
/// solution fails a residual check against the regularized system, falls back
/// to a truncated eigendecomposition that drops eigenvalues below 1e-10.
inline Eigen::VectorXd solve_regularized(const Eigen::MatrixXd& M, const Eigen::VectorXd& v,
                                         double lambda) {
    const Eigen::Index m = M.rows();
    if (m == 0) return Eigen::VectorXd();
    const Eigen::MatrixXd reg = M + lambda * Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd x = reg.ldlt().solve(-v);
    const double vnorm = v.norm();
    if (!x.allFinite() || (reg * x + v).norm() > 1e-6 * vnorm) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
        const auto& vals = es.eigenvalues();
        const auto& vecs = es.eigenvectors();
        Eigen::VectorXd coeff = vecs.transpose() * v;
        for (Eigen::Index i = 0; i < m; ++i)
            coeff[i] = vals[i] < 1e-10 ? 0.0 : -coeff[i] / (vals[i] + lambda);
        x = vecs * coeff;
    }
    return x;
}

inline Eigen::VectorXd solve_update(const ItePure& sys, double reg_lambda) {
    return solve_regularized(sys.A, sys.B, reg_lambda);
}

/// The mixed system carries an intrinsic factor 2 relative to the pure one
/// (C = 2A and D = 2B at zero noise), so the regularizer is scaled to match;
/// the two regularized flows then coincide exactly for noiseless circuits.
inline Eigen::VectorXd solve_update(const IteMixed& sys, double reg_lambda) {
    return solve_regularized(sys.C, sys.D, 2 * reg_lambda);
}

// ---------------------------------------------------------------------------
// Evolution loop
// ---------------------------------------------------------------------------

enum class RunStatus { Converged, LocalMinimum, BudgetExhausted };

inline const char* status_name(RunStatus s) {
    switch (s) {
        case RunStatus::Converged: return "converged";
        case RunStatus::LocalMinimum: return "local-minimum";
        case RunStatus::BudgetExhausted: return "budget-exhausted";
    }
    return "?";
}

struct RunResult {
    Eigen::VectorXd theta;  // parameters of the best energy seen
    double e_min = std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, double>> trajectory;
    RunStatus status = RunStatus::BudgetExhausted;
    int steps = 0;
};

/// Euler-steps theta along the regularized imaginary-time flow until the
/// energy reaches success, the best energy plateaus, or max_steps is hit.
inline RunResult run(const ParamCircuit& c, const Eigen::VectorXd& theta0,
                     const PauliHamiltonian& h, const RunOptions& opts,
                     const EvolutionMode& mode) {
    opts.check();
    const double success = opts.resolved_success(h);
    RunResult res;
    Eigen::VectorXd theta = theta0;
    res.theta = theta0;
    int last_improvement = 0;

    for (int step = 0;; ++step) {
        double e;
        Eigen::VectorXd update;
        if (mode.is_mixed) {
            auto asm_ = assemble_mixed_with_energy(c, theta, h, mode.noise);
            e = asm_.energy;
            if (std::isfinite(e)) update = opts.dtau * solve_update(asm_.sys, opts.reg_lambda);
        } else {
            auto asm_ = assemble_pure_with_energy(c, theta, h);
            e = asm_.energy;
            if (std::isfinite(e)) update = opts.dtau * solve_update(asm_.sys, opts.reg_lambda);
        }
        if (!std::isfinite(e)) throw NumericalBlowup("non-finite energy during evolution");
        res.trajectory.emplace_back(step, e);
        if (e < res.e_min - opts.plateau_eps) last_improvement = step;
        if (e < res.e_min) {
            res.e_min = e;
            res.theta = theta;
        }
        res.steps = step;
        if (e <= success) {
            res.status = RunStatus::Converged;
            break;
        }
        if (step - last_improvement >= opts.plateau_window) {
            res.status = RunStatus::LocalMinimum;
            break;
        }
        if (step >= opts.max_steps) {
            res.status = RunStatus::BudgetExhausted;
            break;
        }
        theta += update;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Compilation: restart loop over random ansaetze
// ---------------------------------------------------------------------------

struct CompilationResult {
    ParamCircuit circuit;  // bound gates (angles filled in)
    double e_min = std::numeric_limits<double>::infinity();
    double fidelity_bound = 0;
    std::vector<std::pair<int, double>> trajectory;
    int restarts_used = 0;
    int winning_attempt = -1;
    RunStatus status = RunStatus::BudgetExhausted;
};

inline ParamCircuit bind_circuit(const ParamCircuit& c, const Eigen::VectorXd& theta) {
    ParamCircuit out = c;
    out.gates = bind(c, theta);
    out.recount();
    return out;
}

namespace detail {

struct AttemptOutcome {
    bool completed = false;  // false when the attempt blew up numerically
    bool converged = false;
    ParamCircuit circuit;  // bound
    double e_min = std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, double>> trajectory;
};

/// Ordering for merging restart outcomes: converged beats non-converged,
/// then fewest two-qubit gates, then lowest energy, then lowest attempt id.
inline bool outcome_better(const AttemptOutcome& a, int ia, const AttemptOutcome& b, int ib) {
    if (a.completed != b.completed) return a.completed;
    if (a.converged != b.converged) return a.converged;
    if (a.converged) {
        if (a.circuit.two_qubit_count != b.circuit.two_qubit_count)
            return a.circuit.two_qubit_count < b.circuit.two_qubit_count;
    }
    if (a.e_min != b.e_min) return a.e_min < b.e_min;
    return ia < ib;
}

}  // namespace detail

/// Restart loop: per attempt, generate an ansatz from seed base_seed+attempt,
/// evolve, and on convergence prune with the evolver as the re-optimization
/// callback. Results merge by (converged, fewest two-qubit gates, lowest
/// energy, lowest attempt index), which makes parallel schedules reproduce
/// the serial result exactly.
inline CompilationResult compile(const StabilizerCode& code, const LogicalTarget& target,
                                 const ConstraintSet& constraints, const RunOptions& opts,
                                 const EvolutionMode& mode) {
    require_valid(code);
    constraints.check();
    opts.check();
    if (constraints.n_data != code.n_qubits)
        throw std::invalid_argument("constraints.n_data must equal the code's qubit count");
    const PauliHamiltonian h = build(code, target);
    const double success = opts.resolved_success(h);

    auto run_attempt = [&](int attempt) {
        detail::AttemptOutcome out;
        Rng rng(opts.base_seed + uint64_t(attempt));
        const ParamCircuit ansatz = generate(constraints, constraints.max_two_qubit, rng);
        Eigen::VectorXd theta0(ansatz.n_params);
        for (int i = 0; i < ansatz.n_params; ++i)
            theta0[i] = rng.next_uniform(-kInitWidth, kInitWidth);
        RunResult rr;
        try {
            rr = run(ansatz, theta0, h, opts, mode);
        } catch (const NumericalBlowup&) {
            return out;
        }
        out.completed = true;
        out.trajectory = rr.trajectory;
        if (rr.status == RunStatus::Converged) {
            Reoptimizer reopt = [&](const ParamCircuit& cc, const Eigen::VectorXd& th0)
                -> std::pair<Eigen::VectorXd, double> {
                try {
                    RunResult r = run(cc, th0, h, opts, mode);
                    return {r.theta, r.e_min};
                } catch (const NumericalBlowup&) {
                    return {th0, std::numeric_limits<double>::infinity()};
                }
            };
            PruneResult pr = prune(ansatz, rr.theta, h, opts.prune_threshold, success, reopt);
            out.converged = true;
            out.circuit = bind_circuit(pr.circuit, pr.theta);
            out.e_min = pr.energy;
        } else {
            out.circuit = bind_circuit(ansatz, rr.theta);
            out.e_min = rr.e_min;
        }
        return out;
    };

    const int budget = opts.max_restarts;
    std::vector<detail::AttemptOutcome> outcomes(budget);
    std::atomic<int> next{0};
    std::atomic<int> stop_bound{budget};

    auto worker = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= budget || i >= stop_bound.load()) break;
            outcomes[i] = run_attempt(i);
            if (opts.goal_two_qubit >= 0 && outcomes[i].converged &&
                outcomes[i].circuit.two_qubit_count <= opts.goal_two_qubit) {
                int cur = stop_bound.load();
                while (i + 1 < cur && !stop_bound.compare_exchange_weak(cur, i + 1)) {
                }
            }
        }
    };

    const int n_threads = std::max(1, std::min(opts.workers, budget));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    const int used = std::min(budget, stop_bound.load());
    int best = -1;
    for (int i = 0; i < used; ++i) {
        if (!outcomes[i].completed) continue;
        if (best < 0 || detail::outcome_better(outcomes[i], i, outcomes[best], best)) best = i;
    }

    CompilationResult result;
    result.restarts_used = used;
    if (best >= 0) {
        const auto& o = outcomes[best];
        result.circuit = o.circuit;
        result.e_min = o.e_min;
        result.trajectory = o.trajectory;
        result.winning_attempt = best;
        result.status = o.converged ? RunStatus::Converged : RunStatus::BudgetExhausted;
        result.fidelity_bound =
            o.e_min <= h.e1 + 1e-12 ? fidelity_lower_bound(std::max(o.e_min, h.e0), h) : 0.0;
    }
    return result;
}

}  // namespace varqec
