#pragma once

// ROC curves, AUC, threshold selection, sensitivity and confusion counts.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qzt/error.hpp"
#include "qzt/textio.hpp"

namespace qzt {

struct RocPoint {
    double gamma = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;

    friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

// Points ordered by gamma, starting at the (0 -> 1, 1) sentinel and ending
// at the (1 -> 0, 0) sentinel. A score is flagged positive when score > gamma.
struct RocCurve {
    std::vector<RocPoint> points;
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

inline RocCurve roc(std::span<const double> scores, std::span<const int> binary_labels) {
    if (scores.size() != binary_labels.size()) throw DimensionError("scores and labels differ in length");
    if (scores.empty()) throw DataError("ROC needs at least one score");
    RocCurve c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) throw DataError("scores must lie in [0, 1]");
        if (binary_labels[i] != 0 && binary_labels[i] != 1) throw DataError("binary labels must be 0 or 1");
        (binary_labels[i] ? c.positives : c.negatives)++;
    }
    const bool identical = std::all_of(scores.begin(), scores.end(), [&](double s) { return s == scores[0]; });
    if (identical) {
        c.points = {{0.0, 1.0, 1.0}, {1.0, 0.0, 0.0}};
        return c;
    }
    if (c.positives == 0 || c.negatives == 0) throw DataError("ROC needs both classes present");

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    const double P = static_cast<double>(c.positives), N = static_cast<double>(c.negatives);
    c.points.push_back({0.0, 1.0, 1.0});
    // Sweep ascending; after consuming every score <= s the rest are flagged.
    std::size_t tp = c.positives, fp = c.negatives;
    for (std::size_t k = 0; k < order.size();) {
        const double s = scores[order[k]];
        while (k < order.size() && scores[order[k]] == s) {
            (binary_labels[order[k]] ? tp : fp)--;
            ++k;
        }
        c.points.push_back({s, static_cast<double>(tp) / P, static_cast<double>(fp) / N});
    }
    if (c.points.back().gamma < 1.0) c.points.push_back({1.0, 0.0, 0.0});
    return c;
}

inline double auc(const RocCurve& c) {
    double a = 0.0;
    for (std::size_t i = 0; i + 1 < c.points.size(); ++i) {
        const auto& p = c.points[i];
        const auto& q = c.points[i + 1];
        a += (p.fpr - q.fpr) * (p.tpr + q.tpr) / 2.0;
    }
    return a;
}

inline double youden(const RocPoint& p) { return p.tpr - p.fpr; }

// argmax of TPR - FPR; the first (smallest gamma) wins ties. Compared as
// TP*N - FP*P in integers so rounding cannot split a tie.
inline const RocPoint& optimal_point(const RocCurve& c) {
    if (c.points.empty()) throw DataError("empty ROC curve");
    const auto P = static_cast<long long>(c.positives), N = static_cast<long long>(c.negatives);
    auto key = [&](const RocPoint& p) {
        return std::llround(p.tpr * static_cast<double>(P)) * N - std::llround(p.fpr * static_cast<double>(N)) * P;
    };
    std::size_t best = 0;
    for (std::size_t i = 1; i < c.points.size(); ++i)
        if (key(c.points[i]) > key(c.points[best])) best = i;
    return c.points[best];
}

inline double optimal_gamma(const RocCurve& c) { return optimal_point(c).gamma; }

// Step interpolation: the operating point of threshold g is the one of the
// largest curve gamma not above g.
inline RocPoint roc_at(const RocCurve& c, double g) {
    if (c.points.empty()) throw DataError("empty ROC curve");
    RocPoint out = c.points.front();
    for (const auto& p : c.points) {
        if (p.gamma > g) break;
        out = p;
    }
    out.gamma = g;
    return out;
}

// Difference quotient of TPR - FPR over a window of width h centred on gamma.
inline double sensitivity(const RocCurve& c, double gamma, double h = 0.01) {
    if (!(h > 0.0)) throw ConfigError("sensitivity step must be positive");
    if (!(gamma - h >= 0.0 && gamma + h <= 1.0)) throw ConfigError("gamma +/- h must lie in [0, 1]");
    return (youden(roc_at(c, gamma + h / 2)) - youden(roc_at(c, gamma - h / 2))) / h;
}

// Class ids are 1, 2, 3.
struct Confusion {
    std::array<std::array<std::size_t, 3>, 3> counts{};  // [true][predicted]
    std::size_t total = 0;

    double accuracy() const {
        if (total == 0) return 0.0;
        return static_cast<double>(counts[0][0] + counts[1][1] + counts[2][2]) / static_cast<double>(total);
    }
};

inline Confusion confusion(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) throw DimensionError("predictions and truth differ in length");
    Confusion c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (predicted[i] < 1 || predicted[i] > 3 || truth[i] < 1 || truth[i] > 3)
            throw DataError("class ids must be 1, 2 or 3");
        ++c.counts[static_cast<std::size_t>(truth[i] - 1)][static_cast<std::size_t>(predicted[i] - 1)];
    }
    c.total = truth.size();
    return c;
}

struct ClassThresholds {
    double gamma1 = 0.25;
    double gamma2 = 0.75;
    double accuracy = 0.0;
};

// Picks gamma1 < gamma2 maximizing three-class accuracy of
// classify(score, gamma1, gamma2) on labeled scores. Cuts sit midway
// between neighbouring distinct scores (or at 0 / 1 past the ends); the
// first best pair in (gamma1, gamma2) order wins.
inline ClassThresholds calibrate_class_thresholds(std::span<const double> scores, std::span<const int> classes) {
    if (scores.size() != classes.size()) throw DimensionError("scores and classes differ in length");
    if (scores.empty()) throw DataError("calibration needs at least one score");
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    const std::size_t n = order.size();
    // below[c][k]: members of class c among the k lowest scores.
    std::vector<std::array<std::size_t, 3>> below(n + 1, {0, 0, 0});
    for (std::size_t k = 0; k < n; ++k) {
        const int c = classes[order[k]];
        if (c < 1 || c > 3) throw DataError("class ids must be 1, 2 or 3");
        below[k + 1] = below[k];
        ++below[k + 1][static_cast<std::size_t>(c - 1)];
    }
    std::vector<std::size_t> cuts;
    std::vector<double> at;
    for (std::size_t k = 0; k <= n; ++k) {
        if (k > 0 && k < n && scores[order[k - 1]] == scores[order[k]]) continue;
        // A cut past an end must still split the scores as counted.
        if ((k == 0 && scores[order[0]] <= 0.0) || (k == n && scores[order[n - 1]] >= 1.0)) continue;
        cuts.push_back(k);
        at.push_back(k == 0 ? 0.0 : k == n ? 1.0 : (scores[order[k - 1]] + scores[order[k]]) / 2.0);
    }
    ClassThresholds best;
    std::size_t best_hits = 0;
    bool found = false;
    for (std::size_t a = 0; a < cuts.size(); ++a)
        for (std::size_t b = a + 1; b < cuts.size(); ++b) {
            if (!(at[a] < at[b])) continue;
            const std::size_t i = cuts[a], j = cuts[b];
            const std::size_t hits = below[i][0] + (below[j][1] - below[i][1]) + (below[n][2] - below[j][2]);
            if (!found || hits > best_hits) {
                found = true;
                best_hits = hits;
                best.gamma1 = at[a];
                best.gamma2 = at[b];
            }
        }
    if (!found) throw DataError("no threshold pair separates the scores");
    best.accuracy = static_cast<double>(best_hits) / static_cast<double>(n);
    return best;
}

// Class 1 against classes 2 and 3 (min_class 2), or class 3 against the rest
// (min_class 3).
inline std::vector<int> binarize(std::span<const int> classes, int min_class = 2) {
    std::vector<int> out;
    out.reserve(classes.size());
    for (int c : classes) out.push_back(c >= min_class ? 1 : 0);
    return out;
}

inline constexpr const char* kRocSchema = "# schema: qzt-roc v1";
inline constexpr const char* kConfusionSchema = "# schema: qzt-confusion v1";

inline std::string render_roc_points(const RocCurve& c) {
    std::string out = std::string(kRocSchema) + "\ngamma,tpr,fpr\n";
    for (const auto& p : c.points)
        out += format_double(p.gamma) + "," + format_double(p.tpr) + "," + format_double(p.fpr) + "\n";
    return out;
}

inline std::string render_confusion(const Confusion& c) {
    std::string out = std::string(kConfusionSchema) + "\ntrue\\pred,1,2,3\n";
    for (std::size_t t = 0; t < 3; ++t) {
        out += std::to_string(t + 1);
        for (std::size_t p = 0; p < 3; ++p) out += "," + std::to_string(c.counts[t][p]);
        out += "\n";
    }
    out += "accuracy," + format_double(c.accuracy()) + "\n";
    return out;
}

}  // namespace qzt
