#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwsim/attention.hpp"
#include "gwsim/environment.hpp"
#include "gwsim/memory.hpp"
#include "gwsim/rng.hpp"
#include "gwsim/workspace.hpp"

namespace gwsim {

/// Every tunable of an agent. Field names double as configuration-file keys
/// and sweep parameter names (see config_keys()). Defaults are the tuned set.
struct AgentConfig {
    int max_iterations = 500;
    double initial_happiness = 5.0;
    double fatigue = 0.05;
    // Happiness moves by the reward rescaled to [-1, 1].
    double happiness_gain = 0.2;
    bool fatigue_stochastic = false;
    double fatigue_sigma = 0.001;
    double death_threshold = 2.0;
    double critical_threshold = 3.5;
    double risk_threshold = 4.5;
    bool risk_inclusive = false;
    int attentional_limit = 2;
    int stm_capacity = 5;
    double stm_threshold = 1.5;
    int ltm_capacity = 6;
    double ltm_threshold = 4.0;
    double learning_rate_low = 0.05;
    double learning_rate_medium = 0.15;
    double learning_rate_high = 0.2;
    double learning_rate_sigma = 0.001;
    AttentionInit attention_init = AttentionInit::Uniform;
    bool literal_fourth = false;
    std::uint64_t seed = 0;

    /// Throws ConfigError naming the first violated constraint.
    void validate() const;

    AdaptationParams adaptation() const;
    Feelings initial_feelings() const;

    static AgentConfig tuned() { return {}; }
    /// The starting point of the tuning protocol.
    static AgentConfig initial();
};

nlohmann::json to_json(const AgentConfig& config);
/// Starts from `base` and overrides the keys present in `doc`. Unknown keys
/// and ill-typed values raise ConfigError.
AgentConfig config_from_json(const nlohmann::json& doc, const AgentConfig& base = {});
AgentConfig load_config(const std::filesystem::path& path);

/// Configuration keys in declaration order.
const std::vector<std::string>& config_keys();
/// One line per key: name, default value, meaning.
std::string describe_config_keys();

struct AgentState {
    GridPos position;
    Feelings feelings;
    AttentionState attention;
    MemoryStore stm;
    MemoryStore ltm;
    WorkspaceWeights workspace;
    long iteration = 0;
    bool alive = true;
    Rng rng;
};

struct IterationRecord {
    long t = 0;
    GridPos position;
    ActionTuple chosen;
    double reward = 0.0;
    double happiness = 0.0;
    double weighted_goodness = 0.0;
    double ms = 0.0;
    bool alive = true;
};

struct Metrics {
    double fh = 0.0;   // final happiness
    double mh = 0.0;   // mean happiness
    double hsd = 0.0;  // happiness population standard deviation
    double ni = 0.0;   // completed iterations
    double wgfp = 0.0; // weighted goodness of the final position
    double mwg = 0.0;  // mean weighted goodness
    double mti = 0.0;  // mean wall-clock ms per iteration
};

struct RunResult {
    std::vector<IterationRecord> records;
    Metrics metrics;
    bool died = false;
    /// State before the first iteration, for averaged series.
    double initial_happiness = 0.0;
    double initial_weighted_goodness = 0.0;
};

/// Attention-weighted goodness: sum_k importance(k) * (10 - preference_k(pos)).
double weighted_goodness(const AttentionState& attention, const Environment& env, const PreferenceProfile& profile,
                         GridPos pos);

/// Fresh agent: random start cell, initial attention, empty memories, uniform
/// workspace weights, all drawn from a stream seeded with config.seed.
AgentState init_agent(const AgentConfig& config, const Environment& env);

/// One pass of the perception-decision-evaluation-learning loop. Throws
/// UsageError for a dead agent.
IterationRecord step(AgentState& agent, const AgentConfig& config, const Environment& env,
                     const PreferenceProfile& profile);

/// Checks the config, and that it fits this environment.
void validate_for(const AgentConfig& config, const Environment& env, const PreferenceProfile& profile);

RunResult run(const AgentConfig& config, const Environment& env, const PreferenceProfile& profile);

/// Continues from a snapshot until death or max_iterations.
RunResult resume(const AgentConfig& config, const Environment& env, const PreferenceProfile& profile,
                 AgentState agent, std::vector<IterationRecord> records, double initial_happiness,
                 double initial_weighted_goodness);

Metrics summarize(const std::vector<IterationRecord>& records);

// ---------------------------------------------------------------------------
// Trace and snapshot formats (line-delimited JSON).

nlohmann::json to_json(const IterationRecord& record);
IterationRecord record_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const Metrics& metrics);
Metrics metrics_from_json(const nlohmann::json& doc);

/// One JSON object per iteration followed by a {"summary": ...} line.
void write_trace(const RunResult& result, std::ostream& out);
void write_trace(const RunResult& result, const std::filesystem::path& path);
RunResult read_trace(std::istream& in);

struct Snapshot {
    AgentConfig config;
    AgentState agent;
    std::vector<IterationRecord> records;
    double initial_happiness = 0.0;
    double initial_weighted_goodness = 0.0;
};

nlohmann::json to_json(const AgentState& agent);
AgentState agent_from_json(const nlohmann::json& doc);
void write_snapshot(const Snapshot& snapshot, std::ostream& out);
Snapshot read_snapshot(std::istream& in);

} // namespace gwsim
