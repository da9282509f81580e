#pragma once

// Classical feature vectors to qubit states.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qzt/error.hpp"
#include "qzt/qsim.hpp"

namespace qzt {

struct QubitBudget {
    int q_enc = 0;
    int q_vqc = 0;
    int q_total = 0;
    int layers = 0;
    int gate_qubits_per_layer = 0;
};

// ceil(log2(n)) for n >= 1.
inline int ceil_log2(std::uint64_t n) {
    int q = 0;
    while ((std::uint64_t{1} << q) < n) ++q;
    return q;
}

namespace detail {

inline void check_features(std::span<const double> x) {
    if (x.empty()) throw DimensionError("feature vector is empty");
    for (double v : x)
        if (!std::isfinite(v)) throw DataError("feature vector has a non-finite value");
}

}  // namespace detail

// Qubit i is prepared by RY(pi * x_i).
inline QubitState angle_encode(std::span<const double> x) {
    detail::check_features(x);
    for (double v : x)
        if (v < 0.0 || v > 1.0) throw DataError("angle encoding expects values in [0,1], got " + std::to_string(v));
    const int n = static_cast<int>(x.size());
    QubitState::check_width(n);

    // The encoded state is a product state, so build it directly.
    std::vector<Complex> amps(std::size_t{1} << n);
    std::vector<double> c(x.size()), s(x.size());
    for (std::size_t q = 0; q < x.size(); ++q) {
        c[q] = std::cos(std::numbers::pi * x[q] / 2.0);
        s[q] = std::sin(std::numbers::pi * x[q] / 2.0);
    }
    for (std::size_t i = 0; i < amps.size(); ++i) {
        double a = 1.0;
        for (int q = 0; q < n; ++q) a *= (i & detail::bit_of(n, q)) ? s[static_cast<std::size_t>(q)]
                                                                  : c[static_cast<std::size_t>(q)];
        amps[i] = a;
    }
    return unchecked_state(n, std::move(amps));
}

// x padded with zeros at the tail to 2^ceil(log2 N) and divided by its norm.
// A single feature still uses one qubit.
inline QubitState amplitude_encode(std::span<const double> x) {
    detail::check_features(x);
    const int n = std::max(1, ceil_log2(x.size()));
    QubitState::check_width(n);
    double n2 = 0.0;
    for (double v : x) n2 += v * v;
    if (n2 == 0.0) throw DataError("amplitude encoding of an all-zero vector");
    const double inv = 1.0 / std::sqrt(n2);
    std::vector<Complex> amps(std::size_t{1} << n, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < x.size(); ++i) amps[i] = x[i] * inv;
    return unchecked_state(n, std::move(amps));
}

inline QubitState basis_encode(std::span<const double> bits) {
    if (bits.empty()) throw DimensionError("basis encoding of an empty bit string");
    const int n = static_cast<int>(bits.size());
    QubitState::check_width(n);
    std::size_t idx = 0;
    for (int q = 0; q < n; ++q) {
        const double b = bits[static_cast<std::size_t>(q)];
        if (b != 0.0 && b != 1.0) throw DataError("basis encoding expects 0/1 entries");
        if (b == 1.0) idx |= detail::bit_of(n, q);
    }
    std::vector<Complex> amps(std::size_t{1} << n, Complex{0.0, 0.0});
    amps[idx] = 1.0;
    return unchecked_state(n, std::move(amps));
}

inline QubitBudget qubit_budget(int n_features, int layers, int gate_qubits) {
    if (n_features < 1) throw ConfigError("qubit budget needs at least one feature");
    if (layers < 0 || gate_qubits < 0) throw ConfigError("layers and gate qubits must be nonnegative");
    QubitBudget b;
    b.layers = layers;
    b.gate_qubits_per_layer = gate_qubits;
    b.q_enc = ceil_log2(static_cast<std::uint64_t>(n_features));
    b.q_vqc = b.q_enc + layers * gate_qubits;
    b.q_total = b.q_enc + b.q_vqc;
    return b;
}

}  // namespace qzt
