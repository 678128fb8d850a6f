#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "varqec/pauli.hpp"

namespace varqec {

enum class GateKind { Rx, Ry, Rz, H, X, Y, Z, S, CNOT, CZ, SqrtSwap, MS };

inline bool is_rotation(GateKind k) {
    return k == GateKind::Rx || k == GateKind::Ry || k == GateKind::Rz;
}

inline bool is_two_qubit(GateKind k) {
    return k == GateKind::CNOT || k == GateKind::CZ || k == GateKind::SqrtSwap ||
           k == GateKind::MS;
}

inline const char* gate_name(GateKind k) {
    switch (k) {
        case GateKind::Rx: return "Rx";
        case GateKind::Ry: return "Ry";
        case GateKind::Rz: return "Rz";
        case GateKind::H: return "H";
        case GateKind::X: return "X";
        case GateKind::Y: return "Y";
        case GateKind::Z: return "Z";
        case GateKind::S: return "S";
        case GateKind::CNOT: return "CNOT";
        case GateKind::CZ: return "CZ";
        case GateKind::SqrtSwap: return "SqrtSwap";
        case GateKind::MS: return "MS";
    }
    return "?";
}

inline std::optional<GateKind> gate_kind_from_name(const std::string& s) {
    for (GateKind k : {GateKind::Rx, GateKind::Ry, GateKind::Rz, GateKind::H, GateKind::X,
                       GateKind::Y, GateKind::Z, GateKind::S, GateKind::CNOT, GateKind::CZ,
                       GateKind::SqrtSwap, GateKind::MS}) {
        if (s == gate_name(k)) return k;
    }
    return std::nullopt;
}

/// One circuit element. Rotation gates either carry a bound angle or reference
/// a parameter slot (exactly one of the two while part of an ansatz); all
/// other kinds are fully specified by kind and qubits.
struct Gate {
    GateKind kind;
    int q0 = 0;
    int q1 = -1;  // second qubit for two-qubit kinds, -1 otherwise
    std::optional<double> angle;
    std::optional<int> param_slot;

    static Gate r(GateKind k, int q, int slot) {
        if (!is_rotation(k)) throw std::invalid_argument("parameter slot on non-rotation gate");
        Gate g{k, q, -1, std::nullopt, slot};
        return g;
    }
    static Gate rot(GateKind k, int q, double theta) {
        if (!is_rotation(k)) throw std::invalid_argument("angle on non-rotation gate");
        Gate g{k, q, -1, theta, std::nullopt};
        return g;
    }
    static Gate single(GateKind k, int q) {
        if (is_rotation(k) || is_two_qubit(k))
            throw std::invalid_argument("single() requires a fixed one-qubit kind");
        Gate g{k, q, -1, std::nullopt, std::nullopt};
        return g;
    }
    static Gate two(GateKind k, int a, int b) {
        if (!is_two_qubit(k)) throw std::invalid_argument("two() requires a two-qubit kind");
        if (a == b) throw std::invalid_argument("two-qubit gate on identical qubits");
        Gate g{k, a, b, std::nullopt, std::nullopt};
        return g;
    }

    bool is_bound() const { return !is_rotation(kind) || angle.has_value(); }

    /// Generator axis of a rotation gate (X for Rx etc).
    Pauli generator() const {
        switch (kind) {
            case GateKind::Rx: return Pauli::X;
            case GateKind::Ry: return Pauli::Y;
            case GateKind::Rz: return Pauli::Z;
            default: throw std::logic_error("generator() on non-rotation gate");
        }
    }
};

using Mat2 = std::array<cd, 4>;    // row-major 2x2
using Mat4 = std::array<cd, 16>;   // row-major 4x4, first qubit = high bit

/// Rotations follow exp(-i theta P / 2).
inline Mat2 gate_matrix1(GateKind kind, double theta = 0.0) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    const cd i(0, 1);
    const double r = 1.0 / std::sqrt(2.0);
    switch (kind) {
        case GateKind::Rx: return {cd(c, 0), -i * s, -i * s, cd(c, 0)};
        case GateKind::Ry: return {cd(c, 0), cd(-s, 0), cd(s, 0), cd(c, 0)};
        case GateKind::Rz: return {std::exp(-i * (theta / 2)), 0, 0, std::exp(i * (theta / 2))};
        case GateKind::H: return {cd(r, 0), cd(r, 0), cd(r, 0), cd(-r, 0)};
        case GateKind::X: return {0, 1, 1, 0};
        case GateKind::Y: return {0, -i, i, 0};
        case GateKind::Z: return {1, 0, 0, -1};
        case GateKind::S: return {1, 0, 0, i};
        default: throw std::logic_error("gate_matrix1 on two-qubit kind");
    }
}

inline Mat4 gate_matrix2(GateKind kind) {
    const cd i(0, 1);
    switch (kind) {
        case GateKind::CNOT:
            return {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0};
        case GateKind::CZ:
            return {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, -1};
        case GateKind::SqrtSwap: {
            const cd p = cd(0.5, 0.5), m = cd(0.5, -0.5);
            return {1, 0, 0, 0, 0, p, m, 0, 0, m, p, 0, 0, 0, 0, 1};
        }
        case GateKind::MS: {
            // exp(-i (pi/4) X (x) X)
            const double r = 1.0 / std::sqrt(2.0);
            const cd a(r, 0), b = -i * r;
            return {a, 0, 0, b, 0, a, b, 0, 0, b, a, 0, b, 0, 0, a};
        }
        default: throw std::logic_error("gate_matrix2 on one-qubit kind");
    }
}

}  // namespace varqec
