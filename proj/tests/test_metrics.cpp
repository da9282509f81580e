#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "qzt/metrics.hpp"
#include "qzt/random.hpp"

using namespace qzt;

namespace {

double concordance(const std::vector<double>& s, const std::vector<int>& y) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[i] != 1 || y[j] != 0) continue;
            den += 1;
            num += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
        }
    return num / den;
}

// TPR - FPR at a raw threshold, counted directly.
double youden_at(const std::vector<double>& s, const std::vector<int>& y, double g) {
    double tp = 0, fp = 0, p = 0, n = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        (y[i] ? p : n) += 1;
        if (s[i] > g) (y[i] ? tp : fp) += 1;
    }
    return tp / p - fp / n;
}

struct Instance {
    std::vector<double> s;
    std::vector<int> y;
};

Instance random_instance(Rng& rng, std::size_t n) {
    Instance in;
    in.s.resize(n);
    in.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        in.s[i] = rng.uniform();
        in.y[i] = static_cast<int>(rng.below(2));
    }
    in.y[0] = 0;
    in.y[1] = 1;
    return in;
}

}  // namespace

TEST(Roc, Examples) {
    std::vector<double> s{0.1, 0.4, 0.35, 0.8};
    std::vector<int> y{0, 0, 1, 1};
    EXPECT_NEAR(auc(roc(s, y)), 0.75, 1e-15);
    EXPECT_NEAR(concordance(s, y), 0.75, 1e-15);

    std::vector<double> sep{0.1, 0.2, 0.7, 0.9};
    auto c = roc(sep, std::vector<int>{0, 0, 1, 1});
    EXPECT_TRUE(std::any_of(c.points.begin(), c.points.end(), [](const RocPoint& p) { return p.fpr == 0 && p.tpr == 1; }));
    EXPECT_EQ(auc(c), 1.0);
}

TEST(Roc, IdenticalScoresGiveSentinels) {
    std::vector<double> s(6, 0.3);
    auto c = roc(s, std::vector<int>{0, 1, 0, 1, 1, 0});
    ASSERT_EQ(c.points.size(), 2u);
    EXPECT_EQ(c.points[0], (RocPoint{0, 1, 1}));
    EXPECT_EQ(c.points[1], (RocPoint{1, 0, 0}));
    EXPECT_EQ(auc(c), 0.5);
    EXPECT_EQ(optimal_gamma(c), 0.0);
}

TEST(Roc, Errors) {
    EXPECT_THROW(roc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), DataError);
    EXPECT_THROW(roc(std::vector<double>{0.1, 0.2}, std::vector<int>{1}), DimensionError);
    EXPECT_THROW(roc(std::vector<double>{0.1, 1.2}, std::vector<int>{0, 1}), DataError);
    EXPECT_THROW(roc(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 2}), DataError);
}

TEST(Roc, MonotoneWithEndpoints) {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        auto in = random_instance(rng, 2 + rng.below(100));
        for (auto& v : in.s) v = std::round(v * 10) / 10;  // force ties
        auto c = roc(in.s, in.y);
        EXPECT_EQ(c.points.front(), (RocPoint{0, 1, 1}));
        EXPECT_EQ(c.points.back(), (RocPoint{1, 0, 0}));
        for (std::size_t i = 1; i < c.points.size(); ++i) {
            EXPECT_LE(c.points[i - 1].gamma, c.points[i].gamma);
            EXPECT_GE(c.points[i - 1].tpr, c.points[i].tpr);
            EXPECT_GE(c.points[i - 1].fpr, c.points[i].fpr);
        }
        EXPECT_NEAR(auc(c), concordance(in.s, in.y), 1e-12);  // ties count one half
    }
}

TEST(Auc, EqualsConcordanceTieFree) {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        auto in = random_instance(rng, 2 + rng.below(199));
        EXPECT_NEAR(auc(roc(in.s, in.y)), concordance(in.s, in.y), 1e-12);
    }
}

TEST(Auc, RandomLabelsNearHalf) {
    Rng rng(8);
    auto in = random_instance(rng, 20000);
    EXPECT_NEAR(auc(roc(in.s, in.y)), 0.5, 0.05);
}

TEST(Auc, ReversedScorer) {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        auto in = random_instance(rng, 50);
        std::vector<double> rev;
        for (double v : in.s) rev.push_back(1.0 - v);
        EXPECT_NEAR(auc(roc(rev, in.y)), 1.0 - auc(roc(in.s, in.y)), 1e-12);
    }
}

TEST(OptimalGamma, Examples) {
    // Threshold 0.1 (J = 0.5) and 0.4 (J = 0.5) tie; the smaller is chosen.
    auto c = roc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1});
    EXPECT_EQ(optimal_gamma(c), 0.1);
    EXPECT_NEAR(youden_at({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}, 0.4), 0.5, 1e-15);

    auto sep = roc(std::vector<double>{0.1, 0.2, 0.7, 0.9}, std::vector<int>{0, 0, 1, 1});
    EXPECT_EQ(optimal_gamma(sep), 0.2);
}

TEST(OptimalGamma, BeatsExhaustiveSweep) {
    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        auto in = random_instance(rng, 2 + rng.below(199));
        const double g = optimal_gamma(roc(in.s, in.y));
        const double best = youden_at(in.s, in.y, g);
        double sweep_best = -2;
        double sweep_arg = 2;
        std::vector<double> cand = in.s;
        cand.push_back(0.0);
        for (int k = 0; k <= 1000; ++k) cand.push_back(k / 1000.0);
        std::sort(cand.begin(), cand.end());
        for (double t : cand) {
            const double j = youden_at(in.s, in.y, t);
            EXPECT_LE(j, best + 1e-12);
            if (j > sweep_best + 1e-12) {
                sweep_best = j;
                sweep_arg = t;
            }
        }
        EXPECT_NEAR(best, sweep_best, 1e-12);
        EXPECT_LE(g, sweep_arg + 1e-15);
    }
}

TEST(Sensitivity, FlatRegionIsZero) {
    auto c = roc(std::vector<double>{0.1, 0.2, 0.7, 0.9}, std::vector<int>{0, 0, 1, 1});
    EXPECT_EQ(sensitivity(c, 0.45, 0.1), 0.0);
}

TEST(Sensitivity, SinglePositiveInWindow) {
    std::vector<double> s{0.1, 0.2, 0.5, 0.8, 0.9};
    std::vector<int> y{0, 0, 1, 1, 1};
    auto c = roc(s, y);
    const double h = 0.02;
    EXPECT_NEAR(sensitivity(c, 0.5, h), -1.0 / (h * 3.0), 1e-9);
}

TEST(Sensitivity, MatchesCountingOracle) {
    Rng rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        auto in = random_instance(rng, 2 + rng.below(80));
        auto c = roc(in.s, in.y);
        const double h = 0.05;
        const double g = rng.uniform(h, 1 - h);
        const double expect = (youden_at(in.s, in.y, g + h / 2) - youden_at(in.s, in.y, g - h / 2)) / h;
        EXPECT_NEAR(sensitivity(c, g, h), expect, 1e-9);
    }
}

TEST(Sensitivity, SignChangeAroundOptimum) {
    Rng rng(41);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> s;
        std::vector<int> y;
        for (int i = 0; i < 200; ++i) {
            const int lab = static_cast<int>(rng.below(2));
            s.push_back(std::clamp(0.35 + 0.3 * lab + 0.1 * rng.normal(), 0.0, 1.0));
            y.push_back(lab);
        }
        auto c = roc(s, y);
        const double g = optimal_gamma(c);
        const double h = 0.1;
        if (g - 2 * h < 0 || g + 2 * h > 1) continue;
        ++checked;
        // J rises into the optimum and falls after it.
        EXPECT_GE(sensitivity(c, g - h / 2 - 1e-9, h), -1e-9);
        EXPECT_LE(sensitivity(c, g + h / 2 + 1e-9, h), 1e-9);
    }
    EXPECT_GT(checked, 40);
}

TEST(Sensitivity, OutOfRange) {
    auto c = roc(std::vector<double>{0.1, 0.9}, std::vector<int>{0, 1});
    EXPECT_THROW(sensitivity(c, 0.005, 0.01), ConfigError);
    EXPECT_THROW(sensitivity(c, 0.999, 0.01), ConfigError);
}

TEST(Confusion, Examples) {
    std::vector<int> t{1, 2, 3, 3, 2, 1};
    auto id = confusion(t, t);
    EXPECT_EQ(id.accuracy(), 1.0);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(id.counts[i][j], i == j ? 2u : 0u);

    auto ones = confusion(std::vector<int>(6, 1), t);
    EXPECT_NEAR(ones.accuracy(), 1.0 / 3.0, 1e-15);
    EXPECT_THROW(confusion(std::vector<int>{1}, t), DimensionError);
    EXPECT_THROW(confusion(std::vector<int>{0}, std::vector<int>{1}), DataError);
}

TEST(Confusion, HandCounted) {
    Rng rng(2);
    std::vector<int> p(300), t(300);
    for (auto& v : p) v = 1 + static_cast<int>(rng.below(3));
    for (auto& v : t) v = 1 + static_cast<int>(rng.below(3));
    auto c = confusion(p, t);
    std::size_t sum = 0, hits = 0;
    for (int a = 1; a <= 3; ++a)
        for (int b = 1; b <= 3; ++b) {
            std::size_t n = 0;
            for (std::size_t i = 0; i < p.size(); ++i) n += (t[i] == a && p[i] == b);
            EXPECT_EQ(c.counts[a - 1][b - 1], n);
            sum += n;
            if (a == b) hits += n;
        }
    EXPECT_EQ(sum, 300u);
    EXPECT_DOUBLE_EQ(c.accuracy(), static_cast<double>(hits) / 300.0);
}

TEST(MetricsText, SchemaLines) {
    auto c = roc(std::vector<double>{0.1, 0.9}, std::vector<int>{0, 1});
    auto text = render_roc_points(c);
    EXPECT_EQ(text.rfind("# schema: qzt-roc v1\ngamma,tpr,fpr\n0,1,1\n", 0), 0u);
    auto conf = render_confusion(confusion(std::vector<int>{1, 2}, std::vector<int>{1, 3}));
    EXPECT_EQ(conf.rfind("# schema: qzt-confusion v1\n", 0), 0u);
    EXPECT_NE(conf.find("accuracy,0.5"), std::string::npos);
    EXPECT_EQ(binarize(std::vector<int>{1, 2, 3}), (std::vector<int>{0, 1, 1}));
    EXPECT_EQ(binarize(std::vector<int>{1, 2, 3}, 3), (std::vector<int>{0, 0, 1}));
}

TEST(Calibrate, MatchesBruteForce) {
    Rng rng(13);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 3 + rng.below(30);
        std::vector<double> s(n);
        std::vector<int> c(n);
        for (std::size_t i = 0; i < n; ++i) {
            c[i] = 1 + static_cast<int>(rng.below(3));
            s[i] = std::round(std::clamp(0.3 * c[i] - 0.2 + 0.2 * rng.normal(), 0.0, 1.0) * 50) / 50;
        }
        auto got = calibrate_class_thresholds(s, c);
        auto acc = [&](double g1, double g2) {
            int hit = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const int p = s[i] <= g1 ? 1 : s[i] <= g2 ? 2 : 3;
                hit += p == c[i];
            }
            return hit / static_cast<double>(n);
        };
        double best = 0;
        for (int a = 0; a <= 200; ++a)
            for (int b = a + 1; b <= 200; ++b) best = std::max(best, acc(a / 200.0 + 0.0025, b / 200.0 + 0.0025));
        best = std::max(best, acc(0.0, 1.0));
        EXPECT_NEAR(got.accuracy, best, 1e-12);
        EXPECT_NEAR(acc(got.gamma1, got.gamma2), got.accuracy, 1e-12);
        EXPECT_LT(got.gamma1, got.gamma2);
    }
}
