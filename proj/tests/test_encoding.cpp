#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "qzt/encoding.hpp"
#include "qzt/random.hpp"

using namespace qzt;

namespace {

double state_distance(const QubitState& a, const QubitState& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) s += std::norm(a[i] - b[i]);
    return std::sqrt(s);
}

// Gate-by-gate oracle for angle encoding.
QubitState angle_oracle(const std::vector<double>& x) {
    auto s = init_state(static_cast<int>(x.size()));
    for (std::size_t q = 0; q < x.size(); ++q) s = apply_gate(s, GateSpec::ry(static_cast<int>(q), std::numbers::pi * x[q]));
    return s;
}

}  // namespace

TEST(AngleEncode, Examples) {
    auto s = angle_encode(std::vector<double>{0, 0});
    EXPECT_DOUBLE_EQ(s[0].real(), 1.0);
    for (std::size_t i = 1; i < 4; ++i) EXPECT_DOUBLE_EQ(std::abs(s[i]), 0.0);

    auto one = angle_encode(std::vector<double>{1});
    EXPECT_NEAR(std::abs(one[0]), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(one[1]), 1.0, 1e-15);

    auto half = angle_encode(std::vector<double>{0.5});
    EXPECT_NEAR(half[0].real(), 1.0 / std::numbers::sqrt2, 1e-15);
    EXPECT_NEAR(half[1].real(), 1.0 / std::numbers::sqrt2, 1e-15);
}

TEST(AngleEncode, MatchesGateSequence) {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(1 + rng.below(6));
        for (auto& v : x) v = rng.uniform();
        EXPECT_LT(state_distance(angle_encode(x), angle_oracle(x)), 1e-13);
    }
}

TEST(AngleEncode, Errors) {
    EXPECT_THROW(angle_encode(std::vector<double>{1.5}), DataError);
    EXPECT_THROW(angle_encode(std::vector<double>{-0.1}), DataError);
    EXPECT_THROW(angle_encode(std::vector<double>{}), DimensionError);
    EXPECT_THROW(angle_encode(std::vector<double>(21, 0.0)), ResourceError);
    EXPECT_THROW(angle_encode(std::vector<double>{NAN}), DataError);
}

TEST(AngleEncode, InjectiveForNearbyInputs) {
    Rng rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(3);
        for (auto& v : x) v = rng.uniform(0.0, 1.0 - 1e-6);
        auto y = x;
        y[rng.below(3)] += 1e-6;
        EXPECT_GT(state_distance(angle_encode(x), angle_encode(y)), 1e-9);
    }
}

TEST(AmplitudeEncode, Examples) {
    auto a = amplitude_encode(std::vector<double>{1, 0});
    EXPECT_EQ(a.n_qubits(), 1);
    EXPECT_DOUBLE_EQ(a[0].real(), 1.0);
    auto b = amplitude_encode(std::vector<double>{3, 4});
    EXPECT_NEAR(b[0].real(), 0.6, 1e-15);
    EXPECT_NEAR(b[1].real(), 0.8, 1e-15);
    EXPECT_THROW(amplitude_encode(std::vector<double>{0, 0}), DataError);
}

TEST(AmplitudeEncode, TailPaddingAndNorm) {
    Rng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(1 + rng.below(13));
        for (auto& v : x) v = rng.uniform(-2, 2);
        auto s = amplitude_encode(x);
        EXPECT_EQ(s.n_qubits(), std::max(1, ceil_log2(x.size())));
        EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
        for (std::size_t i = x.size(); i < s.dim(); ++i) EXPECT_EQ(s[i], Complex(0.0));
    }
}

TEST(BasisEncode, Examples) {
    auto s = basis_encode(std::vector<double>{1, 0});
    EXPECT_DOUBLE_EQ(s[0b10].real(), 1.0);
    EXPECT_THROW(basis_encode(std::vector<double>{}), DimensionError);
    auto t = basis_encode(std::vector<double>{1, 1, 1});
    EXPECT_DOUBLE_EQ(t[0b111].real(), 1.0);
    EXPECT_THROW(basis_encode(std::vector<double>{0.5}), DataError);
}

TEST(BasisEncode, ProbabilitiesAreOneHot) {
    for (std::size_t idx = 0; idx < 16; ++idx) {
        std::vector<double> bits(4);
        for (int q = 0; q < 4; ++q) bits[static_cast<std::size_t>(q)] = (idx >> (3 - q)) & 1u;
        auto p = probabilities(basis_encode(bits));
        for (std::size_t i = 0; i < 16; ++i) EXPECT_EQ(p[i], i == idx ? 1.0 : 0.0);
    }
}

TEST(QubitBudget, Examples) {
    auto a = qubit_budget(8, 2, 1);
    EXPECT_EQ(a.q_enc, 3);
    EXPECT_EQ(a.q_vqc, 5);
    EXPECT_EQ(a.q_total, 8);
    auto b = qubit_budget(1, 0, 0);
    EXPECT_EQ(b.q_enc, 0);
    EXPECT_EQ(b.q_vqc, 0);
    EXPECT_EQ(b.q_total, 0);
    auto c = qubit_budget(13, 3, 2);
    EXPECT_EQ(c.q_enc, 4);
    EXPECT_EQ(c.q_vqc, 10);
    EXPECT_EQ(c.q_total, 14);
    EXPECT_THROW(qubit_budget(0, 1, 1), ConfigError);
}

TEST(QubitBudget, FiftyFeaturesFollowTheFormula) {
    auto b = qubit_budget(50, 0, 0);
    EXPECT_EQ(b.q_enc, 6);
}

TEST(QubitBudget, Monotone) {
    for (int f = 1; f < 40; ++f)
        for (int l = 0; l < 5; ++l)
            for (int g = 0; g < 5; ++g) {
                const int t = qubit_budget(f, l, g).q_total;
                EXPECT_GE(qubit_budget(f + 1, l, g).q_total, t);
                EXPECT_GE(qubit_budget(f, l + 1, g).q_total, t);
                EXPECT_GE(qubit_budget(f, l, g + 1).q_total, t);
            }
}
