#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qzt/policy.hpp"

using namespace qzt;

namespace {

UserDeviceContext ctx(double u, double d) { return {{u, u, u}, {d, d}}; }

// One qubit, no rotation: score = sin^2(pi * mean(x) / 2).
VariationalModel mean_model() {
    auto m = build_ansatz(1, 1, 0, Encoder::Angle, 13);
    std::fill(m.theta.begin(), m.theta.end(), 0.0);
    return m;
}

std::vector<std::vector<double>> pool(double v) { return {std::vector<double>(13, v)}; }

int rank(Verdict v) { return static_cast<int>(v); }

}  // namespace

TEST(RiskScore, Examples) {
    EXPECT_DOUBLE_EQ(risk_score(ctx(1, 1), 1.0), 1.0);
    EXPECT_DOUBLE_EQ(risk_score(ctx(0, 0), 0.0), 0.0);
    EXPECT_NEAR(risk_score(ctx(0.5, 0.5), 0.5), 0.5, 1e-15);
    EXPECT_THROW(risk_score(ctx(0, 0), 0.5, {0.5, 0.2, 0.2}), ConfigError);
    EXPECT_THROW(risk_score(ctx(0, 0), 1.5), DataError);
    EXPECT_THROW(risk_score(ctx(1.2, 0), 0.5), DataError);
}

TEST(RiskScore, MonotoneInEveryInput) {
    Rng rng(1);
    for (int trial = 0; trial < 500; ++trial) {
        UserDeviceContext c{{rng.uniform(), rng.uniform()}, {rng.uniform(), rng.uniform(), rng.uniform()}};
        const double s = rng.uniform();
        const double base = risk_score(c, s);
        EXPECT_GE(risk_score(c, std::min(1.0, s + rng.uniform(0, 0.2))), base);
        for (auto* v : {&c.user, &c.device})
            for (auto& x : *v) {
                const double keep = x;
                x = std::min(1.0, x + rng.uniform(0, 0.2));
                EXPECT_GE(risk_score(c, s), base);
                x = keep;
            }
    }
}

TEST(AccessDecide, Examples) {
    Thresholds t;
    EXPECT_EQ(access_decide(0.5, t).verdict, Verdict::Granted);
    EXPECT_EQ(access_decide(0.7, t).verdict, Verdict::Restricted);
    EXPECT_EQ(access_decide(0.8, t).verdict, Verdict::Denied);
    EXPECT_EQ(access_decide(0.65, t).verdict, Verdict::Restricted);
    t.tau_restrict = 0.9;
    EXPECT_THROW(access_decide(0.5, t), ConfigError);
}

TEST(AccessDecide, Monotone) {
    Thresholds t;
    for (int i = 0; i < 1000; ++i) {
        const double a = i / 1000.0, b = (i + 1) / 1000.0;
        EXPECT_LE(rank(access_decide(a, t).verdict), rank(access_decide(b, t).verdict));
    }
}

TEST(SegmentRisk, Examples) {
    EXPECT_NEAR(segment_risk(std::vector<double>{0.2, 0.4}), 0.3, 1e-15);
    EXPECT_EQ(segment_risk(std::vector<double>{0.37}), 0.37);
    EXPECT_THROW(segment_risk(std::vector<double>{}), DataError);
}

TEST(AdaptGamma, Examples) {
    Thresholds t;
    t.gamma2 = 0.9;
    auto a = adapt_gamma_for_risk(t, 0.9);
    EXPECT_NEAR(a.gamma2, 0.72, 1e-15);
    EXPECT_NEAR(a.gamma1, 0.2, 1e-15);
    EXPECT_EQ(adapt_gamma_for_risk(t, 0.1), t);
    EXPECT_EQ(adapt_gamma_for_risk(t, 0.8), t);  // strictly above tau_deny
    EXPECT_THROW(adapt_gamma_for_risk(t, 0.9, 1.0), ConfigError);
}

TEST(AdaptGamma, OrderingSurvivesJointClamp) {
    for (int i = 1; i <= 40; ++i)
        for (int j = i + 1; j <= 41; ++j)
            for (int k = 1; k < 20; ++k) {
                Thresholds t;
                t.gamma_min = 0.1;
                t.gamma1 = 0.1 + (i - 1) * 0.02;
                t.gamma2 = 0.1 + (j - 1) * 0.02;
                if (t.gamma2 > t.gamma_max) continue;
                auto a = adapt_gamma_for_risk(t, 0.95, k / 20.0);
                EXPECT_LT(a.gamma1, a.gamma2);
                EXPECT_GE(a.gamma1, t.gamma_min);
                EXPECT_LE(a.gamma2, t.gamma_max);
                EXPECT_LE(a.gamma2, t.gamma2);
            }
}

TEST(ThresholdFeedback, Examples) {
    Thresholds t;
    t.gamma2 = 0.5;
    t.gamma1 = 0.25;
    auto a = threshold_feedback(t, 0.15);
    EXPECT_NEAR(a.gamma2, 0.55, 1e-15);
    EXPECT_NEAR(a.gamma1 / a.gamma2, 0.5, 1e-15);
    EXPECT_EQ(threshold_feedback(t, 0.05), t);
    EXPECT_THROW(threshold_feedback(t, 1.5), DataError);
}

TEST(ThresholdFeedback, TauRuleIsOptIn) {
    Thresholds t;
    EXPECT_EQ(threshold_feedback(t, 0.3).tau_deny, t.tau_deny);
    t.tau_kappa = 0.1;
    auto a = threshold_feedback(t, 0.15);
    EXPECT_NEAR(a.tau_deny, 0.81, 1e-15);
    EXPECT_NEAR(a.tau_deny - a.tau_restrict, t.tau_deny - t.tau_restrict, 1e-15);
}

TEST(ThresholdFeedback, InvariantsOverRandomSequences) {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        Thresholds t;
        t.tau_kappa = rng.uniform() < 0.5 ? 0.0 : 0.3;
        t.kappa = rng.uniform(0, 2);
        for (int step = 0; step < 50; ++step) {
            t = rng.uniform() < 0.5 ? threshold_feedback(t, rng.uniform()) : adapt_gamma_for_risk(t, rng.uniform(), rng.uniform(0.05, 0.95));
            ASSERT_NO_THROW(t.validate());
            EXPECT_LT(t.gamma1, t.gamma2);
            EXPECT_LT(t.tau_restrict, t.tau_deny);
        }
    }
}

TEST(ThresholdFeedback, ClosedLoopReachesTarget) {
    // Stationary benign scores ~ N(0.3, 0.15) clipped; the 95th percentile is
    // 0.3 + 1.645 * 0.15.
    Rng rng(11);
    Thresholds t;
    double fpr = 1.0;
    int first_in_band = -1;
    for (int round = 1; round <= 50; ++round) {
        int fp = 0;
        const int n = 2000;
        for (int i = 0; i < n; ++i)
            if (std::clamp(0.3 + 0.15 * rng.normal(), 0.0, 1.0) > t.gamma2) ++fp;
        fpr = static_cast<double>(fp) / n;
        if (first_in_band < 0 && std::abs(fpr - t.fpr_target) <= 0.02) first_in_band = round;
        t = threshold_feedback(t, fpr);
    }
    EXPECT_GT(first_in_band, 0);
    EXPECT_NEAR(fpr, 0.05, 0.02);
    EXPECT_NEAR(t.gamma2, 0.3 + 1.6449 * 0.15, 0.03);
}

TEST(PolicyStep, GracePeriod) {
    Thresholds t;
    t.delta_t = 2;
    SegmentState s;
    s = policy_step(s, 3, t, 1);
    EXPECT_EQ(s.policy, Policy::Open);
    s = policy_step(s, 3, t, 2);
    EXPECT_EQ(s.policy, Policy::Open);
    s = policy_step(s, 3, t, 3);
    EXPECT_EQ(s.policy, Policy::Isolated);
    EXPECT_EQ(s.last_tick, 3);
}

TEST(PolicyStep, ClassTwoRestricts) {
    Thresholds t;
    SegmentState s;
    EXPECT_EQ(policy_step(s, 2, t, 0).policy, Policy::Restricted);
    s.policy = Policy::Isolated;
    EXPECT_EQ(policy_step(s, 2, t, 0).policy, Policy::Isolated);
    EXPECT_THROW(policy_step(s, 4, t, 0), DataError);
}

TEST(PolicyStep, HysteresisDeescalates) {
    Thresholds t;
    SegmentState s;
    s.policy = Policy::Isolated;
    for (int k = 1; k <= 4; ++k) {
        s = policy_step(s, 1, t, k);
        EXPECT_EQ(s.policy, Policy::Isolated);
    }
    s = policy_step(s, 1, t, 5);
    EXPECT_EQ(s.policy, Policy::Restricted);
    EXPECT_EQ(s.clean_ticks, 0);
    for (int k = 6; k <= 10; ++k) s = policy_step(s, 1, t, k);
    EXPECT_EQ(s.policy, Policy::Open);
}

TEST(PolicyStep, NeverIsolatesBeforeGrace) {
    Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        Thresholds t;
        t.delta_t = static_cast<int>(rng.below(5));
        SegmentState s;
        int run = 0;
        for (int k = 0; k < 60; ++k) {
            const int cls = 1 + static_cast<int>(rng.below(3));
            const Policy before = s.policy;
            s = policy_step(s, cls, t, k);
            run = cls == 3 ? run + 1 : 0;
            EXPECT_GE(s.flag_ticks, 0);
            EXPECT_GE(s.clean_ticks, 0);
            if (before != Policy::Isolated && s.policy == Policy::Isolated) {
                EXPECT_GE(run, t.delta_t + 1);
            }
        }
    }
}

TEST(Simulation, BenignStream) {
    StreamSpec spec;
    auto events = synth_stream(spec, pool(0.2), {}, 3);
    auto res = run_simulation(events, mean_model(), SimulationConfig{});
    EXPECT_EQ(res.before, res.after);
    for (const auto& [id, s] : res.segments) EXPECT_NE(s.policy, Policy::Isolated);
    const double granted = static_cast<double>(res.verdicts[0]) / static_cast<double>(events.size());
    EXPECT_GE(granted, 0.95);
    EXPECT_EQ(res.log.size(), events.size() + 1);
}

TEST(Simulation, SingleAttackedSegmentIsContained) {
    StreamSpec spec;
    spec.attacked = {{1, 2}};
    spec.attack_start = 10;
    auto events = synth_stream(spec, pool(0.2), pool(0.95), 4);
    auto res = run_simulation(events, mean_model(), SimulationConfig{});
    const SegmentId target{1, 2};
    for (const auto& [id, p] : res.after) EXPECT_EQ(p, id == target ? Policy::Isolated : Policy::Open) << id.label();

    // Third attacked tick is the first isolated one.
    std::vector<std::string> seg_policies;
    for (const auto& line : res.log) {
        auto j = nlohmann::json::parse(line);
        if (j.contains("segment") && j["segment"] == "(1,2)") seg_policies.push_back(j["policy"]);
    }
    EXPECT_EQ(seg_policies[10], "open");
    EXPECT_EQ(seg_policies[11], "open");
    EXPECT_EQ(seg_policies[12], "isolated");
}

TEST(Simulation, ReplayIsByteIdentical) {
    StreamSpec spec;
    spec.attacked = {{0, 0}, {3, 3}};
    SimulationConfig cfg;
    cfg.feedback_window = 32;
    auto a = run_simulation(synth_stream(spec, pool(0.2), pool(0.95), 9), mean_model(), cfg);
    auto b = run_simulation(synth_stream(spec, pool(0.2), pool(0.95), 9), mean_model(), cfg);
    EXPECT_EQ(render_log(a), render_log(b));
    EXPECT_FALSE(a.fpr_rounds.empty());
    EXPECT_EQ(render_snapshot(a.after), render_snapshot(b.after));
}

TEST(Simulation, FeedbackOffByDefault) {
    StreamSpec spec;
    auto res = run_simulation(synth_stream(spec, pool(0.2), {}, 1), mean_model(), SimulationConfig{});
    EXPECT_TRUE(res.fpr_rounds.empty());
    EXPECT_EQ(res.global, Thresholds{});
}

TEST(Simulation, MalformedEvents) {
    StreamSpec spec;
    spec.ticks = 2;
    auto events = synth_stream(spec, pool(0.2), {}, 1);
    auto bad = events;
    bad[0].segment = {9, 9};
    EXPECT_THROW(run_simulation(bad, mean_model(), SimulationConfig{}), DataError);
    bad = events;
    bad[0].features.pop_back();
    EXPECT_THROW(run_simulation(bad, mean_model(), SimulationConfig{}), DataError);
    bad = events;
    bad[0].tick = 5;
    EXPECT_THROW(run_simulation(bad, mean_model(), SimulationConfig{}), DataError);
    EXPECT_THROW(parse_events("{\"tick\": 1}\n", "s"), DataError);
    EXPECT_THROW(parse_events("not json\n", "s"), DataError);
}

TEST(Simulation, EventTextRoundTrip) {
    StreamSpec spec;
    spec.ticks = 3;
    spec.attacked = {{2, 1}};
    spec.attack_start = 1;
    auto events = synth_stream(spec, pool(0.2), pool(0.95), 2);
    const auto text = render_events(events);
    EXPECT_EQ(text.rfind("{\"schema\":\"qzt-events v1\"}\n", 0), 0u);
    auto back = parse_events(text, "mem");
    ASSERT_EQ(back.size(), events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        EXPECT_EQ(back[i].tick, events[i].tick);
        EXPECT_EQ(back[i].segment, events[i].segment);
        EXPECT_EQ(back[i].features, events[i].features);
        EXPECT_EQ(back[i].context.user, events[i].context.user);
        EXPECT_EQ(back[i].label, events[i].label);
    }
    EXPECT_EQ(render_snapshot({{{0, 1}, Policy::Restricted}}), "# schema: qzt-segments v1\nr,c,policy\n0,1,restricted\n");
}
