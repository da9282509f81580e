#pragma once

// Dense statevector simulation for small registers.
//
// Basis-index convention: qubit 0 is the most significant bit, so the label
// |q0 q1 ... q_{n-1}> reads left to right and basis index
// sum_k q_k * 2^(n-1-k).

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qzt/error.hpp"

namespace qzt {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr int kMaxQubits = 20;
inline constexpr double kStateNormTol = 1e-10;

class QubitState {
public:
    int n_qubits() const noexcept { return n_qubits_; }
    std::size_t dim() const noexcept { return amps_.size(); }
    std::span<const Complex> amplitudes() const noexcept { return amps_; }
    const Complex& operator[](std::size_t i) const { return amps_[i]; }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& a : amps_) s += std::norm(a);
        return s;
    }

    // Validates length and normalization.
    static QubitState from_amplitudes(int n_qubits, std::vector<Complex> amps,
                                      double tol = kStateNormTol) {
        check_width(n_qubits);
        if (amps.size() != (std::size_t{1} << n_qubits))
            throw DimensionError("amplitude vector length " + std::to_string(amps.size()) +
                                 " does not match 2^" + std::to_string(n_qubits));
        QubitState s(n_qubits, std::move(amps));
        if (std::abs(s.norm_squared() - 1.0) > tol)
            throw NumericError("state is not normalized (|psi|^2 = " +
                               std::to_string(s.norm_squared()) + ")");
        return s;
    }

    static void check_width(int n_qubits, int cap = kMaxQubits) {
        if (n_qubits < 1) throw DimensionError("register needs at least one qubit");
        if (n_qubits > cap)
            throw ResourceError("register of " + std::to_string(n_qubits) +
                                " qubits exceeds cap of " + std::to_string(cap));
    }

    friend bool operator==(const QubitState&, const QubitState&) = default;

private:
    QubitState(int n, std::vector<Complex> amps) : n_qubits_(n), amps_(std::move(amps)) {}
    friend QubitState init_state(int, int);
    friend QubitState unchecked_state(int, std::vector<Complex>);

    int n_qubits_ = 0;
    std::vector<Complex> amps_;
};

// |0...0>
inline QubitState init_state(int n_qubits, int cap = kMaxQubits) {
    QubitState::check_width(n_qubits, cap);
    std::vector<Complex> a(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
    a[0] = 1.0;
    return QubitState(n_qubits, std::move(a));
}

// Internal constructor for amplitudes already known to be normalized.
inline QubitState unchecked_state(int n_qubits, std::vector<Complex> amps) {
    return QubitState(n_qubits, std::move(amps));
}

enum class GateKind { RZ, RY, H, CNOT, SWAP, Custom };

struct GateSpec {
    GateKind kind = GateKind::H;
    double angle = 0.0;
    std::vector<int> targets;
    ComplexMatrix matrix;  // Custom only; targets[0] is the most significant local bit

    static GateSpec rz(int q, double a) { return {GateKind::RZ, a, {q}, {}}; }
    static GateSpec ry(int q, double a) { return {GateKind::RY, a, {q}, {}}; }
    static GateSpec h(int q) { return {GateKind::H, 0.0, {q}, {}}; }
    static GateSpec cnot(int control, int target) { return {GateKind::CNOT, 0.0, {control, target}, {}}; }
    static GateSpec swap(int a, int b) { return {GateKind::SWAP, 0.0, {a, b}, {}}; }
    static GateSpec custom(std::vector<int> targets, ComplexMatrix m) {
        return {GateKind::Custom, 0.0, std::move(targets), std::move(m)};
    }
};

inline ComplexMatrix rz_matrix(double a) {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = std::polar(1.0, -a / 2.0);
    m(1, 1) = std::polar(1.0, a / 2.0);
    return m;
}

inline ComplexMatrix ry_matrix(double a) {
    ComplexMatrix m(2, 2);
    const double c = std::cos(a / 2.0), s = std::sin(a / 2.0);
    m << c, -s, s, c;
    return m;
}

inline ComplexMatrix hadamard_matrix() {
    ComplexMatrix m(2, 2);
    const double r = 1.0 / std::numbers::sqrt2;
    m << r, r, r, -r;
    return m;
}

inline ComplexMatrix pauli_z_matrix() {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

inline ComplexMatrix pauli_x_matrix() {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    return m;
}

inline bool is_unitary(const ComplexMatrix& m, double tol = 1e-10) {
    if (m.rows() != m.cols()) return false;
    return (m.adjoint() * m - ComplexMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_hermitian(const ComplexMatrix& m, double tol = 1e-10) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

namespace detail {

inline std::size_t bit_of(int n_qubits, int q) { return std::size_t{1} << (n_qubits - 1 - q); }

inline void check_targets(int n_qubits, const std::vector<int>& targets) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] < 0 || targets[i] >= n_qubits)
            throw DimensionError("qubit index " + std::to_string(targets[i]) +
                                 " out of range for " + std::to_string(n_qubits) + "-qubit register");
        for (std::size_t j = 0; j < i; ++j)
            if (targets[i] == targets[j]) throw DimensionError("repeated qubit index in gate targets");
    }
}

// Applies an arbitrary 2^k x 2^k matrix to the listed qubits, in place.
inline void apply_matrix(std::vector<Complex>& amps, int n_qubits, const std::vector<int>& targets,
                         const ComplexMatrix& m) {
    const std::size_t k = targets.size();
    const std::size_t local = std::size_t{1} << k;
    std::vector<std::size_t> offs(local, 0);
    std::size_t mask = 0;
    for (std::size_t l = 0; l < local; ++l)
        for (std::size_t t = 0; t < k; ++t)
            if (l & (std::size_t{1} << (k - 1 - t))) offs[l] |= bit_of(n_qubits, targets[t]);
    for (int t : targets) mask |= bit_of(n_qubits, t);

    std::vector<Complex> in(local), out(local);
    for (std::size_t base = 0; base < amps.size(); ++base) {
        if (base & mask) continue;
        for (std::size_t l = 0; l < local; ++l) in[l] = amps[base | offs[l]];
        for (std::size_t r = 0; r < local; ++r) {
            Complex acc{0.0, 0.0};
            for (std::size_t c = 0; c < local; ++c) acc += m(r, c) * in[c];
            out[r] = acc;
        }
        for (std::size_t l = 0; l < local; ++l) amps[base | offs[l]] = out[l];
    }
}

inline void apply_1q(std::vector<Complex>& amps, int n_qubits, int q, Complex m00, Complex m01,
                     Complex m10, Complex m11) {
    const std::size_t b = bit_of(n_qubits, q);
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if (i & b) continue;
        const Complex a0 = amps[i], a1 = amps[i | b];
        amps[i] = m00 * a0 + m01 * a1;
        amps[i | b] = m10 * a0 + m11 * a1;
    }
}

inline void apply_gate_inplace(std::vector<Complex>& amps, int n_qubits, const GateSpec& g) {
    const std::size_t arity = (g.kind == GateKind::CNOT || g.kind == GateKind::SWAP) ? 2 : 1;
    if (g.kind != GateKind::Custom && g.targets.size() != arity)
        throw DimensionError("gate expects " + std::to_string(arity) + " target(s), got " +
                             std::to_string(g.targets.size()));
    check_targets(n_qubits, g.targets);

    switch (g.kind) {
        case GateKind::RZ:
            apply_1q(amps, n_qubits, g.targets[0], std::polar(1.0, -g.angle / 2.0), 0.0, 0.0,
                     std::polar(1.0, g.angle / 2.0));
            return;
        case GateKind::RY: {
            const double c = std::cos(g.angle / 2.0), s = std::sin(g.angle / 2.0);
            apply_1q(amps, n_qubits, g.targets[0], c, -s, s, c);
            return;
        }
        case GateKind::H: {
            const double r = 1.0 / std::numbers::sqrt2;
            apply_1q(amps, n_qubits, g.targets[0], r, r, r, -r);
            return;
        }
        case GateKind::CNOT: {
            const std::size_t cb = bit_of(n_qubits, g.targets[0]);
            const std::size_t tb = bit_of(n_qubits, g.targets[1]);
            for (std::size_t i = 0; i < amps.size(); ++i)
                if ((i & cb) && !(i & tb)) std::swap(amps[i], amps[i | tb]);
            return;
        }
        case GateKind::SWAP: {
            const std::size_t ab = bit_of(n_qubits, g.targets[0]);
            const std::size_t bb = bit_of(n_qubits, g.targets[1]);
            for (std::size_t i = 0; i < amps.size(); ++i)
                if ((i & ab) && !(i & bb)) std::swap(amps[i], (amps[(i & ~ab) | bb]));
            return;
        }
        case GateKind::Custom: {
            const auto local = std::size_t{1} << g.targets.size();
            if (g.targets.empty() || static_cast<std::size_t>(g.matrix.rows()) != local)
                throw DimensionError("custom gate matrix size does not match its target count");
            if (!is_unitary(g.matrix)) throw NumericError("custom gate matrix is not unitary");
            apply_matrix(amps, n_qubits, g.targets, g.matrix);
            return;
        }
    }
}

}  // namespace detail

// Pure: returns a new state, the input is untouched.
inline QubitState apply_gate(const QubitState& state, const GateSpec& gate) {
    std::vector<Complex> amps(state.amplitudes().begin(), state.amplitudes().end());
    detail::apply_gate_inplace(amps, state.n_qubits(), gate);
    return unchecked_state(state.n_qubits(), std::move(amps));
}

inline QubitState apply_circuit(QubitState state, std::span<const GateSpec> gates) {
    std::vector<Complex> amps(state.amplitudes().begin(), state.amplitudes().end());
    for (const auto& g : gates) detail::apply_gate_inplace(amps, state.n_qubits(), g);
    return unchecked_state(state.n_qubits(), std::move(amps));
}

inline Complex inner_product(const QubitState& a, const QubitState& b) {
    if (a.dim() != b.dim()) throw DimensionError("inner product of states with different widths");
    Complex s{0.0, 0.0};
    for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

// |<a|b>|; insensitive to global phase.
inline double fidelity(const QubitState& a, const QubitState& b) { return std::abs(inner_product(a, b)); }

inline QubitState tensor(const QubitState& a, const QubitState& b) {
    const int n = a.n_qubits() + b.n_qubits();
    QubitState::check_width(n);
    std::vector<Complex> out(a.dim() * b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < b.dim(); ++j) out[i * b.dim() + j] = a[i] * b[j];
    return unchecked_state(n, std::move(out));
}

inline QubitState superpose(const QubitState& a, const QubitState& b, Complex alpha, Complex beta) {
    if (a.n_qubits() != b.n_qubits()) throw DimensionError("superposed states differ in width");
    if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > kStateNormTol)
        throw NumericError("superposition coefficients violate |alpha|^2 + |beta|^2 = 1");
    std::vector<Complex> out(a.dim());
    double n2 = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        out[i] = alpha * a[i] + beta * b[i];
        n2 += std::norm(out[i]);
    }
    if (std::abs(n2 - 1.0) > kStateNormTol)
        throw NumericError("superposition is not normalized (inputs not orthogonal); |psi|^2 = " +
                           std::to_string(n2));
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& x : out) x *= inv;
    return unchecked_state(a.n_qubits(), std::move(out));
}

// Symmetrized product (|a>|b> + |b>|a>) / norm.
inline QubitState entangle_pair(const QubitState& f1, const QubitState& f2) {
    if (f1.n_qubits() != f2.n_qubits()) throw DimensionError("entangled subsystems differ in width");
    const QubitState ab = tensor(f1, f2);
    const QubitState ba = tensor(f2, f1);
    std::vector<Complex> out(ab.dim());
    double n2 = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = ab[i] + ba[i];
        n2 += std::norm(out[i]);
    }
    if (n2 < 1e-24) throw NumericError("symmetrized state has zero norm (antisymmetric inputs)");
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& x : out) x *= inv;
    return unchecked_state(ab.n_qubits(), std::move(out));
}

class Observable {
public:
    // Hermitian matrix acting on the listed qubits (identity elsewhere).
    static Observable on_qubits(std::vector<int> qubits, ComplexMatrix m) {
        if (qubits.empty()) throw DimensionError("observable needs at least one qubit");
        if (static_cast<std::size_t>(m.rows()) != (std::size_t{1} << qubits.size()) || m.rows() != m.cols())
            throw DimensionError("observable matrix size does not match its qubit count");
        if (!is_hermitian(m)) throw NumericError("observable is not Hermitian");
        Observable o;
        o.qubits_ = std::move(qubits);
        o.matrix_ = std::move(m);
        return o;
    }

    static Observable full(int n_qubits, ComplexMatrix m) {
        std::vector<int> q(static_cast<std::size_t>(n_qubits));
        for (int i = 0; i < n_qubits; ++i) q[static_cast<std::size_t>(i)] = i;
        return on_qubits(std::move(q), std::move(m));
    }

    static Observable pauli_z(int qubit) { return on_qubits({qubit}, pauli_z_matrix()); }

    const std::vector<int>& qubits() const noexcept { return qubits_; }
    const ComplexMatrix& matrix() const noexcept { return matrix_; }

    bool is_single_z() const {
        return qubits_.size() == 1 && (matrix_ - pauli_z_matrix()).cwiseAbs().maxCoeff() == 0.0;
    }

private:
    std::vector<int> qubits_;
    ComplexMatrix matrix_;
};

inline double expectation(const QubitState& state, const Observable& obs) {
    detail::check_targets(state.n_qubits(), obs.qubits());
    const auto amps = state.amplitudes();
    if (obs.is_single_z()) {
        const std::size_t b = detail::bit_of(state.n_qubits(), obs.qubits()[0]);
        double s = 0.0;
        for (std::size_t i = 0; i < amps.size(); ++i) s += (i & b) ? -std::norm(amps[i]) : std::norm(amps[i]);
        return s;
    }
    std::vector<Complex> applied(amps.begin(), amps.end());
    detail::apply_matrix(applied, state.n_qubits(), obs.qubits(), obs.matrix());
    Complex s{0.0, 0.0};
    for (std::size_t i = 0; i < amps.size(); ++i) s += std::conj(amps[i]) * applied[i];
    if (std::abs(s.imag()) > 1e-10) throw NumericError("expectation has non-negligible imaginary part");
    return s.real();
}

inline std::vector<double> probabilities(const QubitState& state) {
    std::vector<double> p(state.dim());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(state[i]);
    return p;
}

}  // namespace qzt
