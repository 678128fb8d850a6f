#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace varqec {

using cd = std::complex<double>;

enum class Pauli : uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

inline char pauli_char(Pauli p) {
    return "IXYZ"[static_cast<int>(p)];
}

/// A signed tensor product of single-qubit Paulis. Qubit 0 is the leftmost
/// letter of the string and the most significant bit of basis-state indices.
/// The phase is tracked exactly as i^phase_pow with phase_pow in {0,1,2,3}.
class PauliString {
  public:
    PauliString() = default;

    explicit PauliString(std::vector<Pauli> letters, int phase_pow = 0)
        : letters_(std::move(letters)), phase_pow_(((phase_pow % 4) + 4) % 4) {}

    static PauliString identity(int n_qubits) {
        return PauliString(std::vector<Pauli>(n_qubits, Pauli::I));
    }

    /// Parses strings like "XZZXI" (case-insensitive). Phase prefixes are
    /// rejected: only bare letter sequences are accepted.
    static PauliString parse(const std::string& text) {
        std::vector<Pauli> letters;
        letters.reserve(text.size());
        for (char c : text) {
            switch (c) {
                case 'I': case 'i': letters.push_back(Pauli::I); break;
                case 'X': case 'x': letters.push_back(Pauli::X); break;
                case 'Y': case 'y': letters.push_back(Pauli::Y); break;
                case 'Z': case 'z': letters.push_back(Pauli::Z); break;
                default:
                    throw std::invalid_argument(
                        "invalid Pauli letter '" + std::string(1, c) + "' in \"" + text + "\"");
            }
        }
        if (letters.empty()) {
            throw std::invalid_argument("empty Pauli string");
        }
        return PauliString(std::move(letters));
    }

    int n_qubits() const { return static_cast<int>(letters_.size()); }
    const std::vector<Pauli>& letters() const { return letters_; }
    Pauli letter(int q) const { return letters_.at(q); }
    int phase_pow() const { return phase_pow_; }

    cd phase() const {
        static constexpr std::array<cd, 4> table = {cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1)};
        return table[phase_pow_];
    }

    bool is_identity_letters() const {
        for (Pauli p : letters_)
            if (p != Pauli::I) return false;
        return true;
    }

    /// Hermitian iff the phase is +1 or -1.
    bool is_hermitian() const { return phase_pow_ % 2 == 0; }

    /// +1 or -1 for Hermitian strings.
    int sign() const {
        if (!is_hermitian()) throw std::logic_error("sign() on non-Hermitian Pauli string");
        return phase_pow_ == 0 ? 1 : -1;
    }

    PauliString with_positive_phase() const { return PauliString(letters_, 0); }

    int weight() const {
        int w = 0;
        for (Pauli p : letters_)
            if (p != Pauli::I) ++w;
        return w;
    }

    /// Bit q of the returned masks is set iff the letter on qubit q has an
    /// X (resp. Z) component. Y sets both.
    uint32_t x_bits() const {
        uint32_t m = 0;
        for (int q = 0; q < n_qubits(); ++q)
            if (letters_[q] == Pauli::X || letters_[q] == Pauli::Y) m |= 1u << q;
        return m;
    }
    uint32_t z_bits() const {
        uint32_t m = 0;
        for (int q = 0; q < n_qubits(); ++q)
            if (letters_[q] == Pauli::Z || letters_[q] == Pauli::Y) m |= 1u << q;
        return m;
    }

    bool commutes_with(const PauliString& other) const {
        require_same_size(other);
        int anti = 0;
        for (int q = 0; q < n_qubits(); ++q) {
            Pauli a = letters_[q], b = other.letters_[q];
            if (a != Pauli::I && b != Pauli::I && a != b) ++anti;
        }
        return anti % 2 == 0;
    }

    /// Operator product this * other, with exact phase tracking.
    PauliString operator*(const PauliString& other) const {
        require_same_size(other);
        std::vector<Pauli> out(letters_.size());
        int pow = phase_pow_ + other.phase_pow_;
        for (int q = 0; q < n_qubits(); ++q) {
            auto [letter, ph] = mul_single(letters_[q], other.letters_[q]);
            out[q] = letter;
            pow += ph;
        }
        return PauliString(std::move(out), pow);
    }

    PauliString times_i() const { return PauliString(letters_, phase_pow_ + 1); }

    bool operator==(const PauliString& other) const {
        return letters_ == other.letters_ && phase_pow_ == other.phase_pow_;
    }
    bool operator!=(const PauliString& other) const { return !(*this == other); }

    /// Orders by letter sequence only (I < X < Y < Z), ignoring phase.
    bool letters_less(const PauliString& other) const { return letters_ < other.letters_; }

    std::string str() const {
        static constexpr const char* prefix[4] = {"", "+i", "-", "-i"};
        std::string s = prefix[phase_pow_];
        for (Pauli p : letters_) s += pauli_char(p);
        return s;
    }

  private:
    void require_same_size(const PauliString& other) const {
        if (letters_.size() != other.letters_.size())
            throw std::invalid_argument("Pauli string size mismatch");
    }

    // Returns (letter, k) with a*b = i^k * letter.
    static std::pair<Pauli, int> mul_single(Pauli a, Pauli b) {
        if (a == Pauli::I) return {b, 0};
        if (b == Pauli::I) return {a, 0};
        if (a == b) return {Pauli::I, 0};
        // XY=iZ, YZ=iX, ZX=iY and the reversed products pick up -i.
        int ia = static_cast<int>(a), ib = static_cast<int>(b);
        Pauli c = static_cast<Pauli>(6 - ia - ib);  // the remaining letter
        bool forward = (ib - ia + 3) % 3 == 1;      // X->Y->Z->X cycle
        return {c, forward ? 1 : 3};
    }

    std::vector<Pauli> letters_;
    int phase_pow_ = 0;
};

}  // namespace varqec
