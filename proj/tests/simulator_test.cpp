#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gwsim/errors.hpp"
#include "gwsim/simulator.hpp"
#include "test_support.hpp"

namespace gwsim {
namespace {

PreferenceProfile all(PreferenceKind kind, int m) { return {std::vector<PreferenceKind>(m, kind)}; }

// Trace text with the wall-clock fields removed.
std::string trace_without_timing(const RunResult& r) {
    std::ostringstream raw;
    write_trace(r, raw);
    std::istringstream in(raw.str());
    std::string line, out;
    while (std::getline(in, line)) {
        auto doc = nlohmann::json::parse(line);
        if (doc.contains("summary")) {
            doc["summary"].erase("MTI");
        } else {
            doc.erase("ms");
        }
        out += doc.dump() + "\n";
    }
    return out;
}

TEST(AgentConfig, TunedDefaults) {
    const AgentConfig c;
    EXPECT_EQ(c.max_iterations, 500);
    EXPECT_EQ(c.initial_happiness, 5.0);
    EXPECT_EQ(c.fatigue, 0.05);
    EXPECT_EQ(c.death_threshold, 2.0);
    EXPECT_EQ(c.critical_threshold, 3.5);
    EXPECT_EQ(c.risk_threshold, 4.5);
    EXPECT_EQ(c.attentional_limit, 2);
    EXPECT_EQ(c.stm_capacity, 5);
    EXPECT_EQ(c.stm_threshold, 1.5);
    EXPECT_EQ(c.ltm_capacity, 6);
    EXPECT_EQ(c.ltm_threshold, 4.0);
    EXPECT_EQ(c.learning_rate_low, 0.05);
    EXPECT_EQ(c.learning_rate_medium, 0.15);
    EXPECT_EQ(c.learning_rate_high, 0.2);
    EXPECT_EQ(c.learning_rate_sigma, 0.001);
    EXPECT_NO_THROW(c.validate());
    EXPECT_NO_THROW(AgentConfig::initial().validate());
}

TEST(AgentConfig, InitialParameterList) {
    const AgentConfig c = AgentConfig::initial();
    EXPECT_EQ(c.fatigue, 0.1);
    EXPECT_EQ(c.critical_threshold, 3.0);
    EXPECT_EQ(c.risk_threshold, 4.0);
    EXPECT_EQ(c.stm_capacity, 3);
    EXPECT_EQ(c.stm_threshold, 2.0);
    EXPECT_EQ(c.ltm_capacity, 2);
    EXPECT_EQ(c.learning_rate_medium, 0.1);
}

TEST(AgentConfig, OrderingViolationsNamed) {
    AgentConfig c;
    c.critical_threshold = 4.5;
    try {
        c.validate();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("critical_threshold"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("risk_threshold"), std::string::npos);
    }
    c = {};
    c.stm_threshold = 5.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.attentional_limit = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.death_threshold = 3.6;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(AgentConfig, JsonRoundTripAndUnknownKey) {
    AgentConfig c;
    c.fatigue = 0.1;
    c.attention_init = AttentionInit::Random;
    c.literal_fourth = true;
    c.seed = 12345678901234ULL;
    const AgentConfig back = config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
    EXPECT_EQ(to_json(c).size(), config_keys().size());

    try {
        config_from_json(nlohmann::json{{"fatigeu", 0.1}});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("fatigue"), std::string::npos);
    }
    EXPECT_THROW(config_from_json(nlohmann::json{{"stm_capacity", "five"}}), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json{{"stm_capacity", 2.5}}), ConfigError);
    EXPECT_EQ(config_from_json(nlohmann::json{{"fatigue.stochastic", true}}).fatigue_stochastic, true);
}

TEST(AgentConfig, HelpListsEveryKey) {
    const std::string help = describe_config_keys();
    for (const auto& k : config_keys()) {
        EXPECT_NE(help.find(k), std::string::npos) << k;
    }
}

TEST(WeightedGoodness, Examples) {
    const Environment env(3, 10.0, {MagnitudeField(3, std::vector<double>(9, 10.0)),
                                    MagnitudeField(3, std::vector<double>(9, 0.0))});
    const PreferenceProfile p = all(PreferenceKind::AbsSine, 2);
    Rng rng(0);
    const auto uniform = AttentionState::init(2, AttentionInit::Uniform, rng);
    EXPECT_NEAR(weighted_goodness(uniform, env, p, {0, 0}), 5.0, 1e-12);
    const AttentionState focused({0.0, 0.0, 0.0, 0.0, 0.1, 0.2, 0.3, 0.4});
    EXPECT_NEAR(weighted_goodness(focused, env, p, {0, 0}), 10.0, 1e-12);
}

TEST(WeightedGoodness, UniformEqualsGoodnessOracle) {
    const Environment env = generate_environment({20, 5, 10.0, 5.0, 42});
    const PreferenceProfile p = assign_preferences(5, 43);
    Rng rng(0);
    const auto uniform = AttentionState::init(5, AttentionInit::Uniform, rng);
    for (int r = 0; r < 20; ++r) {
        for (int c = 0; c < 20; ++c) {
            // Oracle: plain mean of 10 - preference.
            double g = 0.0;
            for (int k = 0; k < 5; ++k) g += 10.0 - eval_preference(p[k], env.value(k, {r, c}));
            ASSERT_NEAR(weighted_goodness(uniform, env, p, {r, c}), g / 5.0, 1e-9);
        }
    }
}

TEST(Step, DeadAgentIsUsageError) {
    const Environment env = testing::constant_environment(4, {0.0});
    const auto p = all(PreferenceKind::AbsSine, 1);
    AgentConfig c;
    c.seed = 1;
    AgentState a = init_agent(c, env);
    while (a.alive) step(a, c, env, p);
    EXPECT_THROW(step(a, c, env, p), UsageError);
}

TEST(Run, AllMaximumSaturates) {
    const Environment env = testing::constant_environment(5, {10.0, 10.0, 10.0});
    const auto p = all(PreferenceKind::AbsSine, 3);
    for (double gain : {1.0, 0.2}) {
        AgentConfig c;
        c.happiness_gain = gain;
        c.seed = 3;
        const RunResult r = run(c, env, p);
        EXPECT_FALSE(r.died);
        EXPECT_EQ(r.metrics.ni, 500);
        EXPECT_EQ(r.metrics.fh, 10.0);
        for (const auto& rec : r.records) EXPECT_NEAR(rec.reward, 5.0, 1e-12);
    }
}

TEST(Run, AllMinimumDiesWithinBound) {
    const Environment env = testing::constant_environment(5, {0.0, 0.0});
    const auto p = all(PreferenceKind::AbsSine, 2);
    for (double gain : {1.0, 0.2}) {
        AgentConfig c;
        c.happiness_gain = gain;
        c.seed = 4;
        const RunResult r = run(c, env, p);
        const double bound = std::ceil((c.initial_happiness - c.death_threshold) / (5.0 * gain + c.fatigue));
        EXPECT_TRUE(r.died);
        EXPECT_EQ(r.metrics.ni, bound) << "gain " << gain;
        EXPECT_LT(r.metrics.fh, c.death_threshold);
        EXPECT_FALSE(r.records.back().alive);
    }
    AgentConfig literal;
    literal.happiness_gain = 1.0;
    EXPECT_EQ(run(literal, env, p).metrics.ni, 1);
}

TEST(Run, DeathAtTwenty) {
    // Sine at 0 gives reward 0, so only fatigue moves happiness.
    const Environment env = testing::constant_environment(6, {0.0, 0.0});
    AgentConfig c;
    c.fatigue = 0.151;
    c.seed = 2;
    const RunResult r = run(c, env, all(PreferenceKind::Sine, 2));
    EXPECT_TRUE(r.died);
    EXPECT_EQ(r.metrics.ni, 20);
    EXPECT_EQ(r.records.size(), 20u);
    EXPECT_EQ(r.records.back().t, 20);
}

TEST(Summarize, PopulationStatistics) {
    std::vector<IterationRecord> rs(3);
    rs[0].happiness = 5;
    rs[1].happiness = 6;
    rs[2].happiness = 7;
    rs[2].weighted_goodness = 3.0;
    const Metrics m = summarize(rs);
    EXPECT_NEAR(m.mh, 6.0, 1e-12);
    EXPECT_NEAR(m.hsd, 0.8165, 1e-4);
    EXPECT_EQ(m.fh, 7.0);
    EXPECT_EQ(m.ni, 3);
    EXPECT_EQ(m.wgfp, 3.0);
    EXPECT_NEAR(m.mwg, 1.0, 1e-12);
}

TEST(Run, DeterministicTraces) {
    const Environment env = generate_environment({20, 5, 10.0, 5.0, 11});
    const PreferenceProfile p = assign_preferences(5, 12);
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        AgentConfig c;
        c.seed = seed;
        EXPECT_EQ(trace_without_timing(run(c, env, p)), trace_without_timing(run(c, env, p)));
    }
    AgentConfig a, b;
    a.seed = 1;
    b.seed = 2;
    EXPECT_NE(trace_without_timing(run(a, env, p)), trace_without_timing(run(b, env, p)));
}

TEST(Run, InvalidConfigRejectedBeforeStepping) {
    const Environment env = generate_environment({5, 1, 10.0, 5.0, 1});
    AgentConfig c;
    c.attentional_limit = 5; // only 4 tuples
    EXPECT_THROW(run(c, env, all(PreferenceKind::Sine, 1)), ConfigError);
    c = {};
    EXPECT_THROW(run(c, env, all(PreferenceKind::Sine, 2)), ConfigError);
}

// Invariants of every component after every step of many runs.
TEST(Run, InvariantsHoldOverRandomRuns) {
    for (int i = 0; i < 100; ++i) {
        const int m = 1 + i % 7;
        const Environment env = generate_environment({8 + i % 5, m, 10.0, 5.0, static_cast<std::uint64_t>(i)});
        const PreferenceProfile p = assign_preferences(m, 1000 + i);
        AgentConfig c;
        c.seed = 500 + i;
        c.attentional_limit = 1 + i % std::min(4, 4 * m);
        c.attention_init = i % 2 ? AttentionInit::Random : AttentionInit::Uniform;
        c.fatigue_stochastic = i % 3 == 0;
        if (i % 4 == 0) c.happiness_gain = 1.0;
        AgentState a = init_agent(c, env);
        long steps = 0;
        while (a.alive && a.iteration < c.max_iterations) {
            const auto rec = step(a, c, env, p);
            ++steps;
            ASSERT_GE(rec.happiness, 0.0);
            ASSERT_LE(rec.happiness, 10.0);
            ASSERT_EQ(rec.alive, rec.happiness >= c.death_threshold);
            ASSERT_GE(rec.weighted_goodness, 0.0);
            ASSERT_LE(rec.weighted_goodness, 10.0);
            double sum = 0.0;
            for (double w : a.attention.weights()) {
                ASSERT_GE(w, 0.0);
                ASSERT_LE(w, 1.0);
                sum += w;
            }
            ASSERT_NEAR(sum, 1.0, 1e-9);
            ASSERT_NEAR(a.workspace.attention + a.workspace.short_term + a.workspace.long_term, 1.0, 1e-9);
            ASSERT_LE(a.stm.size(), static_cast<std::size_t>(c.stm_capacity));
            ASSERT_LE(a.ltm.size(), static_cast<std::size_t>(c.ltm_capacity));
            int stored_now = 0;
            for (const auto& b : a.stm.beliefs()) stored_now += b.timestamp == rec.t;
            for (const auto& b : a.ltm.beliefs()) stored_now += b.timestamp == rec.t;
            ASSERT_LE(stored_now, 1);
            ASSERT_TRUE(a.position == rec.position);
        }
        ASSERT_LE(steps, c.max_iterations);
        if (!a.alive) {
            ASSERT_LT(a.feelings.happiness, c.death_threshold);
        }
    }
}

TEST(Trace, RoundTrip) {
    const Environment env = generate_environment({10, 3, 10.0, 5.0, 2});
    AgentConfig c;
    c.seed = 9;
    c.max_iterations = 50;
    const RunResult r = run(c, env, assign_preferences(3, 2));
    std::stringstream buf;
    write_trace(r, buf);
    const RunResult back = read_trace(buf);
    ASSERT_EQ(back.records.size(), r.records.size());
    for (std::size_t i = 0; i < r.records.size(); ++i) {
        EXPECT_EQ(back.records[i].t, r.records[i].t);
        EXPECT_TRUE(back.records[i].position == r.records[i].position);
        EXPECT_TRUE(back.records[i].chosen == r.records[i].chosen);
        EXPECT_EQ(back.records[i].happiness, r.records[i].happiness);
        EXPECT_EQ(back.records[i].weighted_goodness, r.records[i].weighted_goodness);
        EXPECT_EQ(back.records[i].reward, r.records[i].reward);
    }
    EXPECT_EQ(back.metrics.mh, r.metrics.mh);
    EXPECT_EQ(back.died, r.died);
    std::istringstream bad("{\"t\": 1}\n");
    EXPECT_THROW(read_trace(bad), ParseError);
}

TEST(Snapshot, ResumeMatchesUninterruptedRun) {
    const Environment env = generate_environment({20, 5, 10.0, 5.0, 21});
    const PreferenceProfile p = assign_preferences(5, 22);
    for (std::uint64_t seed : {5ULL, 6ULL, 7ULL}) {
        AgentConfig c;
        c.seed = seed;
        c.fatigue_stochastic = seed == 7;
        const RunResult full = run(c, env, p);

        AgentState a = init_agent(c, env);
        Snapshot snap;
        snap.config = c;
        snap.initial_happiness = a.feelings.happiness;
        snap.initial_weighted_goodness = weighted_goodness(a.attention, env, p, a.position);
        while (a.alive && a.iteration < 137) snap.records.push_back(step(a, c, env, p));
        snap.agent = a;
        std::stringstream buf;
        write_snapshot(snap, buf);
        Snapshot back = read_snapshot(buf);
        const RunResult resumed = resume(back.config, env, p, std::move(back.agent), std::move(back.records),
                                         back.initial_happiness, back.initial_weighted_goodness);
        EXPECT_EQ(trace_without_timing(resumed), trace_without_timing(full)) << "seed " << seed;
    }
}

} // namespace
} // namespace gwsim
