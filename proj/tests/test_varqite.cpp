#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "varqec/varqite.hpp"

using namespace varqec;

namespace {

ParamCircuit single_ry() {
    ParamCircuit c;
    c.n_qubits = 1;
    c.n_data = 1;
    c.gates = {Gate::r(GateKind::Ry, 0, 0)};
    c.recount();
    return c;
}

PauliHamiltonian minus_z() {
    PauliHamiltonian h;
    h.n_qubits = 1;
    h.terms = {{-1.0, PauliString::parse("Z")}};
    h.e0 = -1;
    h.e1 = 1;
    h.gap_c = 2;
    return h;
}

PauliHamiltonian const_hamiltonian(int n, double value) {
    PauliHamiltonian h;
    h.n_qubits = n;
    h.terms = {{value, PauliString::identity(n)}};
    h.e0 = value;
    h.e1 = value;
    h.gap_c = 1;
    return h;
}

Eigen::VectorXd random_theta(int m, std::mt19937_64& rng, double width = 2.0) {
    std::uniform_real_distribution<double> dist(-width, width);
    Eigen::VectorXd t(m);
    for (int i = 0; i < m; ++i) t[i] = dist(rng);
    return t;
}

}  // namespace

TEST_CASE("pure system on the single-Ry ansatz", "[varqite]") {
    const auto c = single_ry();
    const auto h = minus_z();
    for (double theta : {0.0, 0.4, M_PI / 3, 1.9, -2.4}) {
        Eigen::VectorXd t(1);
        t << theta;
        const auto sys = assemble_pure(c, t, h);
        // The quantum-geometric A for exp(-i theta Y/2)|0> is constant 1/4:
        // <phi|phi> = 1/4 and <d psi|psi> vanishes for this real family.
        REQUIRE(sys.A(0, 0) == Catch::Approx(0.25).margin(1e-12));
        REQUIRE(sys.B(0) == Catch::Approx(0.5 * std::sin(theta)).margin(1e-12));
        // Cross-check against the finite-difference definition of A and B.
        const auto [a_fd, b_fd] = oracles::ite_system_fd(c, t, h);
        REQUIRE(sys.A(0, 0) == Catch::Approx(a_fd(0, 0)).margin(1e-6));
        REQUIRE(sys.B(0) == Catch::Approx(b_fd(0)).margin(1e-6));
    }
}

TEST_CASE("pure assembly matches finite differences on random ansaetze", "[varqite]") {
    std::mt19937_64 rng(1001);
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = oracles::random_ansatz(3, 2, 5000 + trial);
        const auto h = build(trial % 2 ? five_qubit_code() : steane_code(), LogicalTarget::magic());
        // Project the Hamiltonian onto 3 qubits? No: use a random 3-qubit one.
        PauliHamiltonian h3;
        h3.n_qubits = 3;
        h3.terms = {{0.7, oracles::random_pauli(3, rng)},
                    {-1.3, oracles::random_pauli(3, rng)},
                    {0.4, oracles::random_pauli(3, rng)}};
        h3.e0 = -10;
        h3.e1 = 10;
        h3.gap_c = 20;
        const Eigen::VectorXd theta = random_theta(c.n_params, rng);
        const auto sys = assemble_pure(c, theta, h3);
        const auto [a_fd, b_fd] = oracles::ite_system_fd(c, theta, h3);
        REQUIRE((sys.A - a_fd).cwiseAbs().maxCoeff() < 1e-6);
        REQUIRE((sys.B - b_fd).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("gradient identity B = grad E / 2", "[varqite]") {
    std::mt19937_64 rng(1002);
    for (int trial = 0; trial < 50; ++trial) {
        const auto c = oracles::random_ansatz(3, 2, 6000 + trial);
        PauliHamiltonian h;
        h.n_qubits = 3;
        h.terms = {{1.1, oracles::random_pauli(3, rng)}, {-0.6, oracles::random_pauli(3, rng)}};
        const Eigen::VectorXd theta = random_theta(c.n_params, rng);
        const auto sys = assemble_pure(c, theta, h);
        const Eigen::VectorXd grad = oracles::energy_gradient_fd(c, theta, h);
        for (int i = 0; i < c.n_params; ++i) {
            const double expected = 0.5 * grad[i];
            // relative 1e-5 with an absolute floor for FD noise on ~0 entries
            REQUIRE(std::abs(sys.B[i] - expected) < 1e-5 * std::abs(expected) + 1e-8);
        }
    }
}

TEST_CASE("B vanishes for a constant Hamiltonian", "[varqite]") {
    std::mt19937_64 rng(1003);
    const auto c = oracles::random_ansatz(3, 3, 31);
    const Eigen::VectorXd theta = random_theta(c.n_params, rng);
    const auto sys = assemble_pure(c, theta, const_hamiltonian(3, -2.5));
    REQUIRE(sys.B.cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("A and C are symmetric positive semidefinite", "[varqite]") {
    std::mt19937_64 rng(1004);
    for (int trial = 0; trial < 15; ++trial) {
        const auto c = oracles::random_ansatz(3, 2, 7000 + trial);
        PauliHamiltonian h;
        h.n_qubits = 3;
        h.terms = {{1.0, oracles::random_pauli(3, rng)}};
        const Eigen::VectorXd theta = random_theta(c.n_params, rng);

        const auto pure = assemble_pure(c, theta, h);
        REQUIRE((pure.A - pure.A.transpose()).cwiseAbs().maxCoeff() < 1e-10);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(pure.A);
        REQUIRE(ea.eigenvalues().minCoeff() > -1e-9);

        const auto mixed = assemble_mixed(c, theta, h, NoiseModel::uniform(0.02));
        REQUIRE((mixed.C - mixed.C.transpose()).cwiseAbs().maxCoeff() < 1e-10);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ec(mixed.C);
        REQUIRE(ec.eigenvalues().minCoeff() > -1e-9);
    }
}

TEST_CASE("noiseless mixed updates equal pure updates", "[varqite]") {
    std::mt19937_64 rng(1005);
    for (int trial = 0; trial < 10; ++trial) {
        const auto c = oracles::random_ansatz(3, 2, 8000 + trial);
        PauliHamiltonian h;
        h.n_qubits = 3;
        h.terms = {{-0.8, oracles::random_pauli(3, rng)}, {0.5, oracles::random_pauli(3, rng)}};
        const Eigen::VectorXd theta = random_theta(c.n_params, rng);
        const auto pure = assemble_pure(c, theta, h);
        const auto mixed = assemble_mixed(c, theta, h, NoiseModel::uniform(0.0));
        // C = 2A and D = 2B exactly for a pure parameterized state.
        REQUIRE((mixed.C - 2 * pure.A).cwiseAbs().maxCoeff() < 1e-10);
        REQUIRE((mixed.D - 2 * pure.B).cwiseAbs().maxCoeff() < 1e-10);
        const Eigen::VectorXd du_pure = solve_update(pure, 1e-6);
        const Eigen::VectorXd du_mixed = solve_update(mixed, 1e-6);
        REQUIRE((du_pure - du_mixed).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("parameter-independent states give a zero mixed system", "[varqite]") {
    // Full depolarization (r = 3/4 scales the Bloch vector to zero) makes the
    // one-qubit output maximally mixed independent of theta.
    const auto c = single_ry();
    Eigen::VectorXd theta(1);
    theta << 0.9;
    const auto sys = assemble_mixed(c, theta, minus_z(), NoiseModel::uniform(0.75));
    REQUIRE(std::abs(sys.C(0, 0)) < 1e-12);
    REQUIRE(std::abs(sys.D(0)) < 1e-12);
}

TEST_CASE("D vanishes for constant H on noiseless circuits", "[varqite]") {
    std::mt19937_64 rng(1006);
    const auto c = oracles::random_ansatz(2, 1, 99);
    const Eigen::VectorXd theta = random_theta(c.n_params, rng);
    const auto sys = assemble_mixed(c, theta, const_hamiltonian(2, -3.0), NoiseModel::uniform(0.0));
    REQUIRE(sys.D.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("solve_update handles regular, zero and singular systems", "[varqite]") {
    SECTION("scalar division") {
        ItePure sys;
        sys.A = Eigen::MatrixXd::Constant(1, 1, 0.25);
        sys.B = Eigen::VectorXd::Constant(1, 0.5 * std::sin(M_PI / 3));
        const auto x = solve_update(sys, 0.0);
        REQUIRE(x[0] == Catch::Approx(-std::sqrt(3.0)).margin(1e-12));
    }
    SECTION("zero right-hand side") {
        ItePure sys;
        sys.A = Eigen::MatrixXd::Identity(3, 3);
        sys.B = Eigen::VectorXd::Zero(3);
        REQUIRE(solve_update(sys, 1e-6).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("singular A with regularization stays finite") {
        ItePure sys;
        sys.A = Eigen::MatrixXd::Zero(1, 1);
        sys.B = Eigen::VectorXd::Constant(1, 0.3);
        const auto x = solve_update(sys, 1e-6);
        REQUIRE(std::isfinite(x[0]));
        REQUIRE(std::abs(x[0]) <= 0.3 / 1e-6 + 1.0);
    }
    SECTION("singular system without regularization falls back to truncation") {
        ItePure sys;
        sys.A = Eigen::MatrixXd::Zero(2, 2);
        sys.A(0, 0) = 1.0;  // rank 1
        sys.B = Eigen::VectorXd::Constant(2, 1.0);
        const auto x = solve_update(sys, 0.0);
        REQUIRE(x.allFinite());
        REQUIRE(x[0] == Catch::Approx(-1.0).margin(1e-9));
        REQUIRE(x[1] == Catch::Approx(0.0).margin(1e-9));  // dropped direction
    }
}

TEST_CASE("imaginary-time evolution on one qubit", "[varqite]") {
    const auto c = single_ry();
    const auto h = minus_z();
    RunOptions opts;
    opts.dtau = 0.05;
    opts.max_steps = 2000;
    opts.success_energy = -1 + 1e-6;

    SECTION("converges to the ground state from theta = 0.3") {
        Eigen::VectorXd t0(1);
        t0 << 0.3;
        const auto res = run(c, t0, h, opts, EvolutionMode::pure());
        REQUIRE(res.status == RunStatus::Converged);
        REQUIRE(res.e_min <= -1 + 1e-6);
        REQUIRE(std::abs(std::remainder(res.theta[0], 2 * M_PI)) < 2e-3);
    }
    SECTION("an exact stationary excited point is a local minimum") {
        Eigen::VectorXd t0(1);
        t0 << M_PI;  // |1>, gradient exactly zero
        RunOptions fast = opts;
        fast.plateau_window = 50;
        const auto res = run(c, t0, h, fast, EvolutionMode::pure());
        REQUIRE(res.status == RunStatus::LocalMinimum);
        REQUIRE(res.e_min == Catch::Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("variational trajectory matches dense imaginary-time evolution", "[varqite]") {
    // theta(tau) from the variational flow versus the normalized dense
    // evolution exp(-H tau)|psi(0.3)> read off at tau = 1.
    const auto c = single_ry();
    const auto h = minus_z();
    RunOptions opts;
    opts.dtau = 1e-3;
    opts.max_steps = 1000;
    opts.success_energy = -2.0;  // unreachable: run out the full horizon
    opts.plateau_window = 100000;
    opts.reg_lambda = 0.0;
    Eigen::VectorXd t0(1);
    t0 << 0.3;
    const auto res = run(c, t0, h, opts, EvolutionMode::pure());
    REQUIRE(res.steps == 1000);

    // Dense oracle: H = -Z, exp(-H tau) = diag(e^tau, e^-tau).
    const double a0 = std::cos(0.15), a1 = std::sin(0.15);
    const double w0 = a0 * std::exp(1.0), w1 = a1 * std::exp(-1.0);
    const double theta_exact = 2 * std::atan2(w1, w0);
    REQUIRE(std::abs(res.theta[0] - theta_exact) < 1e-4);
}

TEST_CASE("energy is non-increasing along the flow", "[varqite]") {
    std::mt19937_64 rng(1007);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 3 + trial % 3;
        const auto code_h = [&]() -> PauliHamiltonian {
            PauliHamiltonian h;
            h.n_qubits = n;
            h.terms = {{-0.5, oracles::random_pauli(n, rng)},
                       {-0.5, oracles::random_pauli(n, rng)},
                       {0.3, oracles::random_pauli(n, rng)}};
            return h;
        }();
        const auto c = oracles::random_ansatz(n, 2, 9000 + trial);
        Eigen::VectorXd t0 = random_theta(c.n_params, rng, 0.5);
        RunOptions opts;
        opts.dtau = 0.01;
        opts.max_steps = 120;
        opts.success_energy = -1e9;
        opts.plateau_window = 100000;
        const auto res = run(c, t0, code_h, opts, EvolutionMode::pure());
        for (size_t i = 1; i < res.trajectory.size(); ++i)
            REQUIRE(res.trajectory[i].second <= res.trajectory[i - 1].second + 1e-6);
    }
}

TEST_CASE("pure and mixed trajectories agree at zero noise", "[varqite]") {
    std::mt19937_64 rng(1008);
    const auto c = oracles::random_ansatz(3, 2, 4242);
    PauliHamiltonian h;
    h.n_qubits = 3;
    h.terms = {{-0.6, PauliString::parse("ZZI")},
               {-0.4, PauliString::parse("IXX")},
               {-0.2, PauliString::parse("YIY")}};
    const Eigen::VectorXd t0 = random_theta(c.n_params, rng, 0.4);
    RunOptions opts;
    opts.dtau = 0.05;
    opts.max_steps = 100;
    opts.success_energy = -1e9;
    opts.plateau_window = 100000;
    const auto pure = run(c, t0, h, opts, EvolutionMode::pure());
    const auto mixed = run(c, t0, h, opts, EvolutionMode::mixed(NoiseModel::uniform(0.0)));
    REQUIRE(pure.trajectory.size() == mixed.trajectory.size());
    for (size_t i = 0; i < pure.trajectory.size(); ++i)
        REQUIRE(std::abs(pure.trajectory[i].second - mixed.trajectory[i].second) < 1e-8);
}

TEST_CASE("zero-block ansatz cannot encode and reports a local minimum", "[varqite]") {
    const auto code = five_qubit_code();
    ConstraintSet cs;
    cs.n_data = 5;
    cs.max_two_qubit = 0;
    const auto h = build(code, LogicalTarget::minus());
    Rng rng(5);
    const auto c = generate(cs, 0, rng);
    Eigen::VectorXd t0(c.n_params);
    for (int i = 0; i < c.n_params; ++i) t0[i] = rng.next_uniform(-0.05, 0.05);
    RunOptions opts;
    opts.plateau_window = 150;
    const auto res = run(c, t0, h, opts, EvolutionMode::pure());
    REQUIRE(res.status == RunStatus::LocalMinimum);
    REQUIRE(res.e_min > -1 + 1e-4);
}

TEST_CASE("compile on a bare qubit converges and is deterministic", "[varqite][compile]") {
    StabilizerCode bare;
    bare.n_qubits = 1;
    bare.logical_x = PauliString::parse("X");
    bare.logical_z = PauliString::parse("Z");
    bare.name = "bare-qubit";
    ConstraintSet cs;
    cs.n_data = 1;
    cs.max_two_qubit = 0;
    RunOptions opts;
    opts.max_restarts = 4;
    opts.base_seed = 77;

    const auto res = compile(bare, LogicalTarget::minus(), cs, opts, EvolutionMode::pure());
    REQUIRE(res.status == RunStatus::Converged);
    REQUIRE(res.e_min <= -1 + 1e-4);
    REQUIRE(res.fidelity_bound >= 1 - 0.5 * 1e-4 - 1e-12);
    REQUIRE(res.circuit.two_qubit_count == 0);
    REQUIRE(res.circuit.n_params == 0);  // bound

    // Parallel schedule reproduces the serial result bit for bit.
    RunOptions par = opts;
    par.workers = 2;
    const auto res2 = compile(bare, LogicalTarget::minus(), cs, par, EvolutionMode::pure());
    REQUIRE(circuit_to_json(res.circuit) == circuit_to_json(res2.circuit));
    REQUIRE(res.restarts_used == res2.restarts_used);
    REQUIRE(res.winning_attempt == res2.winning_attempt);
}

TEST_CASE("compile without entangling resources exhausts its budget", "[varqite][compile]") {
    ConstraintSet cs;
    cs.n_data = 5;
    cs.max_two_qubit = 0;
    RunOptions opts;
    opts.max_restarts = 2;
    opts.plateau_window = 120;
    const auto res =
        compile(five_qubit_code(), LogicalTarget::minus(), cs, opts, EvolutionMode::pure());
    REQUIRE(res.status == RunStatus::BudgetExhausted);
    REQUIRE(res.restarts_used == 2);
    REQUIRE(res.e_min > -1 + 1e-4);  // best local minimum attached
}
