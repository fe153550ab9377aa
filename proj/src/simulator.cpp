#include "gwsim/simulator.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "gwsim/errors.hpp"

namespace gwsim {

using nlohmann::json;

namespace {

struct ConfigKey {
    std::string name;
    std::string help;
    std::function<json(const AgentConfig&)> get;
    std::function<void(AgentConfig&, const json&)> set;
};

template <typename T>
ConfigKey make_key(std::string name, std::string help, T AgentConfig::*member) {
    return ConfigKey{
        std::move(name), std::move(help), [member](const AgentConfig& c) { return json(c.*member); },
        [member](AgentConfig& c, const json& v) {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) {
                    throw ConfigError("expected true or false");
                }
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer() && !(v.is_number_float() && std::floor(v.get<double>()) == v.get<double>())) {
                    throw ConfigError("expected an integer");
                }
                if constexpr (std::is_unsigned_v<T>) {
                    if (v.get<double>() < 0) {
                        throw ConfigError("expected a non-negative integer");
                    }
                }
            } else {
                if (!v.is_number()) {
                    throw ConfigError("expected a number");
                }
            }
            c.*member = v.get<T>();
        }};
}

const std::vector<ConfigKey>& key_table() {
    static const std::vector<ConfigKey> table = [] {
        std::vector<ConfigKey> t;
        t.push_back(make_key("max_iterations", "iteration cap of a run", &AgentConfig::max_iterations));
        t.push_back(make_key("initial_happiness", "happiness at t = 0", &AgentConfig::initial_happiness));
        t.push_back(make_key("fatigue", "happiness lost every iteration", &AgentConfig::fatigue));
        t.push_back(make_key("happiness_gain", "reward factor on happiness; 0.2 maps [-5,5] to [-1,1]",
                             &AgentConfig::happiness_gain));
        t.push_back(make_key("fatigue.stochastic", "draw fatigue from N(fatigue, fatigue.sigma)",
                             &AgentConfig::fatigue_stochastic));
        t.push_back(make_key("fatigue.sigma", "std deviation of stochastic fatigue", &AgentConfig::fatigue_sigma));
        t.push_back(make_key("death_threshold", "agent deactivates below this happiness",
                             &AgentConfig::death_threshold));
        t.push_back(make_key("critical_threshold", "near-death threshold: ranked attention, one-hot decisions",
                             &AgentConfig::critical_threshold));
        t.push_back(make_key("risk_threshold", "below this the best score is doubled and the worst halved",
                             &AgentConfig::risk_threshold));
        t.push_back(make_key("risk_inclusive", "happiness equal to risk_threshold counts as risk",
                             &AgentConfig::risk_inclusive));
        t.push_back(make_key("attentional_limit", "tuples passed from attention to the workspace",
                             &AgentConfig::attentional_limit));
        t.push_back(make_key("stm_capacity", "short-term memory capacity", &AgentConfig::stm_capacity));
        t.push_back(make_key("stm_threshold", "|reward| needed to enter short-term memory",
                             &AgentConfig::stm_threshold));
        t.push_back(make_key("ltm_capacity", "long-term memory capacity", &AgentConfig::ltm_capacity));
        t.push_back(make_key("ltm_threshold", "|reward| needed to enter long-term memory",
                             &AgentConfig::ltm_threshold));
        t.push_back(make_key("learning_rate_low", "attention learning rate for small rewards",
                             &AgentConfig::learning_rate_low));
        t.push_back(make_key("learning_rate_medium", "attention learning rate above stm_threshold",
                             &AgentConfig::learning_rate_medium));
        t.push_back(make_key("learning_rate_high", "attention learning rate above ltm_threshold",
                             &AgentConfig::learning_rate_high));
        t.push_back(make_key("learning_rate_sigma", "std deviation of every learning-rate draw",
                             &AgentConfig::learning_rate_sigma));
        t.push_back(ConfigKey{
            "attention_init", "initial attention weights: uniform or random",
            [](const AgentConfig& c) { return json(c.attention_init == AttentionInit::Uniform ? "uniform" : "random"); },
            [](AgentConfig& c, const json& v) {
                if (v == "uniform") {
                    c.attention_init = AttentionInit::Uniform;
                } else if (v == "random") {
                    c.attention_init = AttentionInit::Random;
                } else {
                    throw ConfigError("expected \"uniform\" or \"random\"");
                }
            }});
        t.push_back(make_key("preference.literal_fourth", "use -cos((x-1)/10*pi/2) as the fourth preference",
                             &AgentConfig::literal_fourth));
        t.push_back(make_key("seed", "random stream seed of the run", &AgentConfig::seed));
        return t;
    }();
    return table;
}

template <typename... Args>
std::string concat(const Args&... args) {
    std::ostringstream out;
    (out << ... << args);
    return out.str();
}

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw ConfigError(message);
    }
}

} // namespace

void AgentConfig::validate() const {
    require(max_iterations >= 1, "max_iterations must be at least 1");
    require(death_threshold >= kHappinessMin, "death_threshold must be >= 0");
    require(death_threshold < critical_threshold,
            concat("death_threshold (", death_threshold, ") must be < critical_threshold (", critical_threshold, ")"));
    require(critical_threshold < risk_threshold,
            concat("critical_threshold (", critical_threshold, ") must be < risk_threshold (", risk_threshold, ")"));
    require(risk_threshold < kHappinessMax,
            concat("risk_threshold (", risk_threshold, ") must be < ", kHappinessMax));
    require(initial_happiness >= death_threshold && initial_happiness <= kHappinessMax,
            "initial_happiness must lie in [death_threshold, 10]");
    require(fatigue >= 0.0, "fatigue must be >= 0");
    require(happiness_gain > 0.0, "happiness_gain must be > 0");
    require(!fatigue_stochastic || fatigue_sigma > 0.0, "fatigue.sigma must be > 0");
    require(attentional_limit >= 1, "attentional_limit must be at least 1");
    require(stm_capacity >= 0, "stm_capacity must be >= 0");
    require(ltm_capacity >= 0, "ltm_capacity must be >= 0");
    require(stm_threshold >= 0.0, "stm_threshold must be >= 0");
    require(stm_threshold < ltm_threshold,
            concat("stm_threshold (", stm_threshold, ") must be < ltm_threshold (", ltm_threshold, ")"));
    require(learning_rate_low > 0.0, "learning_rate_low must be > 0");
    require(learning_rate_low <= learning_rate_medium, "learning_rate_low must be <= learning_rate_medium");
    require(learning_rate_medium <= learning_rate_high, "learning_rate_medium must be <= learning_rate_high");
    require(learning_rate_high <= 1.0, "learning_rate_high must be <= 1");
    require(learning_rate_sigma > 0.0, "learning_rate_sigma must be > 0");
}

AdaptationParams AgentConfig::adaptation() const {
    return {{learning_rate_low, learning_rate_medium, learning_rate_high, learning_rate_sigma},
            stm_threshold,
            ltm_threshold,
            death_threshold,
            critical_threshold};
}

Feelings AgentConfig::initial_feelings() const {
    return {initial_happiness, death_threshold, critical_threshold, risk_threshold, fatigue, risk_inclusive};
}

AgentConfig AgentConfig::initial() {
    AgentConfig c;
    c.max_iterations = 100;
    c.initial_happiness = 5.0;
    c.fatigue = 0.1;
    c.death_threshold = 2.0;
    c.critical_threshold = 3.0;
    c.risk_threshold = 4.0;
    c.attentional_limit = 2;
    c.stm_capacity = 3;
    c.stm_threshold = 2.0;
    c.ltm_capacity = 2;
    c.ltm_threshold = 4.0;
    c.learning_rate_low = 0.05;
    c.learning_rate_medium = 0.1;
    c.learning_rate_high = 0.2;
    return c;
}

json to_json(const AgentConfig& config) {
    json doc = json::object();
    for (const auto& key : key_table()) {
        doc[key.name] = key.get(config);
    }
    return doc;
}

AgentConfig config_from_json(const json& doc, const AgentConfig& base) {
    if (!doc.is_object()) {
        throw ConfigError("configuration must be a JSON object");
    }
    AgentConfig config = base;
    for (const auto& [name, value] : doc.items()) {
        const auto& table = key_table();
        const auto it = std::find_if(table.begin(), table.end(), [&](const ConfigKey& k) { return k.name == name; });
        if (it == table.end()) {
            std::string valid;
            for (const auto& k : table) {
                valid += (valid.empty() ? "" : ", ") + k.name;
            }
            throw ConfigError("unknown configuration key '" + name + "' (valid: " + valid + ")");
        }
        try {
            it->set(config, value);
        } catch (const ConfigError& e) {
            throw ConfigError("configuration key '" + name + "': " + e.what());
        } catch (const json::exception& e) {
            throw ConfigError("configuration key '" + name + "': " + e.what());
        }
    }
    return config;
}

AgentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open configuration " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": parse error at byte " + std::to_string(e.byte));
    }
    return config_from_json(doc);
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& k : key_table()) {
            out.push_back(k.name);
        }
        return out;
    }();
    return keys;
}

std::string describe_config_keys() {
    const AgentConfig defaults;
    std::ostringstream out;
    for (const auto& k : key_table()) {
        out << "  " << k.name << " = " << k.get(defaults).dump() << "  (" << k.help << ")\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------

double weighted_goodness(const AttentionState& attention, const Environment& env, const PreferenceProfile& profile,
                         GridPos pos) {
    double sum = 0.0;
    for (int k = 0; k < env.magnitude_count(); ++k) {
        sum += attention.magnitude_importance(k) * magnitude_goodness(env, profile, k, pos);
    }
    return sum;
}

void validate_for(const AgentConfig& config, const Environment& env, const PreferenceProfile& profile) {
    config.validate();
    const int tuples = static_cast<int>(kDirections.size()) * env.magnitude_count();
    require(config.attentional_limit <= tuples,
            concat("attentional_limit (", config.attentional_limit, ") exceeds the ", tuples, " available tuples"));
    require(profile.size() == static_cast<std::size_t>(env.magnitude_count()),
            "preference profile length does not match the magnitude count");
    require(env.alpha() <= kPreferenceDomain, "environment alpha exceeds the preference domain [-10, 10]");
}

AgentState init_agent(const AgentConfig& config, const Environment& env) {
    AgentState agent;
    agent.rng = Rng(config.seed);
    agent.position = {static_cast<int>(agent.rng.index(env.size())), static_cast<int>(agent.rng.index(env.size()))};
    agent.feelings = config.initial_feelings();
    agent.attention = AttentionState::init(env.magnitude_count(), config.attention_init, agent.rng);
    agent.stm = MemoryStore(MemoryKind::ShortTerm, static_cast<std::size_t>(config.stm_capacity), config.stm_threshold);
    agent.ltm = MemoryStore(MemoryKind::LongTerm, static_cast<std::size_t>(config.ltm_capacity), config.ltm_threshold);
    agent.workspace = WorkspaceWeights{};
    return agent;
}

IterationRecord step(AgentState& agent, const AgentConfig& config, const Environment& env,
                     const PreferenceProfile& profile) {
    if (!agent.alive) {
        throw UsageError("cannot step a dead agent");
    }
    const auto start = std::chrono::steady_clock::now();
    ++agent.iteration;

    // Perception, subconscious filter, conscious decision.
    const Observation obs = observe(env, agent.position);
    const CandidateSet candidates = select_actions(agent.attention, agent.feelings.happiness,
                                                   config.attentional_limit, config.critical_threshold, agent.rng);
    const ScoredCandidates scored = score_tuples(candidates, agent.stm, agent.ltm, agent.workspace, agent.feelings);
    const ScoredCandidate& decision = scored[sample_decision(scored, agent.rng)];
    const ActionTuple chosen = decision.tuple;

    // Motor and evaluative systems.
    agent.position = env.neighbor(agent.position, chosen.direction);
    const double value = obs.value(chosen.direction, chosen.magnitude);
    const double reward = evaluate(value, profile[chosen.magnitude], profile.literal_fourth || config.literal_fourth);

    double fatigue = config.fatigue;
    if (config.fatigue_stochastic) {
        fatigue = std::max(0.0, agent.rng.normal(config.fatigue, config.fatigue_sigma));
    }
    agent.alive = update_happiness(agent.feelings, config.happiness_gain * reward, fatigue);

    // Learning. Memory signs are the ones the decision was made with.
    maybe_store(agent.stm, agent.ltm, reward, chosen, agent.iteration);
    adapt_weights(agent.attention, tuple_index(chosen), reward, agent.feelings.happiness, config.adaptation(),
                  agent.rng);
    adapt_module_weights(agent.workspace, reward, decision.stm_sign, decision.ltm_sign, agent.rng);

    IterationRecord record;
    record.t = agent.iteration;
    record.position = agent.position;
    record.chosen = chosen;
    record.reward = reward;
    record.happiness = agent.feelings.happiness;
    record.weighted_goodness = weighted_goodness(agent.attention, env, profile, agent.position);
    record.alive = agent.alive;
    record.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return record;
}

Metrics summarize(const std::vector<IterationRecord>& records) {
    Metrics m;
    if (records.empty()) {
        return m;
    }
    const double n = static_cast<double>(records.size());
    double sum_h = 0.0;
    double sum_wg = 0.0;
    double sum_ms = 0.0;
    for (const auto& r : records) {
        sum_h += r.happiness;
        sum_wg += r.weighted_goodness;
        sum_ms += r.ms;
    }
    m.mh = sum_h / n;
    double ss = 0.0;
    for (const auto& r : records) {
        ss += (r.happiness - m.mh) * (r.happiness - m.mh);
    }
    m.hsd = std::sqrt(ss / n);
    m.fh = records.back().happiness;
    m.ni = n;
    m.wgfp = records.back().weighted_goodness;
    m.mwg = sum_wg / n;
    m.mti = sum_ms / n;
    return m;
}

RunResult resume(const AgentConfig& config, const Environment& env, const PreferenceProfile& profile,
                 AgentState agent, std::vector<IterationRecord> records, double initial_happiness,
                 double initial_weighted_goodness) {
    validate_for(config, env, profile);
    RunResult result;
    result.records = std::move(records);
    result.records.reserve(static_cast<std::size_t>(config.max_iterations));
    while (agent.alive && agent.iteration < config.max_iterations) {
        result.records.push_back(step(agent, config, env, profile));
    }
    result.died = !agent.alive;
    result.metrics = summarize(result.records);
    result.initial_happiness = initial_happiness;
    result.initial_weighted_goodness = initial_weighted_goodness;
    return result;
}

RunResult run(const AgentConfig& config, const Environment& env, const PreferenceProfile& profile) {
    validate_for(config, env, profile);
    AgentState agent = init_agent(config, env);
    const double h0 = agent.feelings.happiness;
    const double wg0 = weighted_goodness(agent.attention, env, profile, agent.position);
    return resume(config, env, profile, std::move(agent), {}, h0, wg0);
}

// ---------------------------------------------------------------------------

json to_json(const IterationRecord& r) {
    return json{{"t", r.t},
                {"pos", {r.position.row, r.position.col}},
                {"direction", to_string(r.chosen.direction)},
                {"magnitude", r.chosen.magnitude},
                {"reward", r.reward},
                {"h", r.happiness},
                {"wg", r.weighted_goodness},
                {"alive", r.alive},
                {"ms", r.ms}};
}

IterationRecord record_from_json(const json& doc) {
    try {
        IterationRecord r;
        r.t = doc.at("t").get<long>();
        r.position = {doc.at("pos").at(0).get<int>(), doc.at("pos").at(1).get<int>()};
        r.chosen = {direction_from_string(doc.at("direction").get<std::string>()), doc.at("magnitude").get<int>()};
        r.reward = doc.at("reward").get<double>();
        r.happiness = doc.at("h").get<double>();
        r.weighted_goodness = doc.at("wg").get<double>();
        r.alive = doc.value("alive", true);
        r.ms = doc.at("ms").get<double>();
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("iteration record: ") + e.what());
    }
}

json to_json(const Metrics& m) {
    return json{{"FH", m.fh}, {"MH", m.mh}, {"HSD", m.hsd}, {"NI", m.ni},
                {"WGFP", m.wgfp}, {"MWG", m.mwg}, {"MTI", m.mti}};
}

Metrics metrics_from_json(const json& doc) {
    try {
        Metrics m;
        m.fh = doc.at("FH").get<double>();
        m.mh = doc.at("MH").get<double>();
        m.hsd = doc.at("HSD").get<double>();
        m.ni = doc.at("NI").get<double>();
        m.wgfp = doc.at("WGFP").get<double>();
        m.mwg = doc.at("MWG").get<double>();
        m.mti = doc.at("MTI").get<double>();
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("metrics: ") + e.what());
    }
}

void write_trace(const RunResult& result, std::ostream& out) {
    for (const auto& r : result.records) {
        out << to_json(r).dump() << '\n';
    }
    json summary = to_json(result.metrics);
    summary["died"] = result.died;
    summary["initial_h"] = result.initial_happiness;
    summary["initial_wg"] = result.initial_weighted_goodness;
    out << json{{"summary", summary}}.dump() << '\n';
    if (!out) {
        throw IoError("failed to write trace");
    }
}

void write_trace(const RunResult& result, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    write_trace(result, out);
}

RunResult read_trace(std::istream& in) {
    RunResult result;
    std::string line;
    long line_no = 0;
    bool have_summary = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError("trace line " + std::to_string(line_no) + ": " + e.what());
        }
        if (doc.contains("summary")) {
            const auto& s = doc["summary"];
            result.metrics = metrics_from_json(s);
            result.died = s.value("died", false);
            result.initial_happiness = s.value("initial_h", 0.0);
            result.initial_weighted_goodness = s.value("initial_wg", 0.0);
            have_summary = true;
        } else {
            result.records.push_back(record_from_json(doc));
        }
    }
    if (!have_summary) {
        throw ParseError("trace has no summary line");
    }
    return result;
}

namespace {

json store_to_json(const MemoryStore& store) {
    json beliefs = json::array();
    for (const auto& b : store.beliefs()) {
        beliefs.push_back(
            {{"reward", b.reward}, {"direction", to_string(b.direction)}, {"magnitude", b.magnitude}, {"t", b.timestamp}});
    }
    return json{{"capacity", store.capacity()}, {"threshold", store.threshold()}, {"beliefs", beliefs}};
}

MemoryStore store_from_json(const json& doc, MemoryKind kind) {
    MemoryStore store(kind, doc.at("capacity").get<std::size_t>(), doc.at("threshold").get<double>());
    for (const auto& b : doc.at("beliefs")) {
        store.insert({b.at("reward").get<double>(), direction_from_string(b.at("direction").get<std::string>()),
                      b.at("magnitude").get<int>(), b.at("t").get<long>()});
    }
    return store;
}

} // namespace

json to_json(const AgentState& a) {
    const auto& f = a.feelings;
    return json{{"position", {a.position.row, a.position.col}},
                {"feelings",
                 {{"happiness", f.happiness},
                  {"death_threshold", f.death_threshold},
                  {"critical_threshold", f.critical_threshold},
                  {"risk_threshold", f.risk_threshold},
                  {"fatigue", f.fatigue},
                  {"risk_inclusive", f.risk_inclusive}}},
                {"attention", a.attention.weights()},
                {"stm", store_to_json(a.stm)},
                {"ltm", store_to_json(a.ltm)},
                {"workspace", {a.workspace.attention, a.workspace.short_term, a.workspace.long_term}},
                {"iteration", a.iteration},
                {"alive", a.alive},
                {"rng", a.rng.serialize()}};
}

AgentState agent_from_json(const json& doc) {
    try {
        AgentState a;
        a.position = {doc.at("position").at(0).get<int>(), doc.at("position").at(1).get<int>()};
        const auto& f = doc.at("feelings");
        a.feelings = {f.at("happiness").get<double>(),      f.at("death_threshold").get<double>(),
                      f.at("critical_threshold").get<double>(), f.at("risk_threshold").get<double>(),
                      f.at("fatigue").get<double>(),        f.at("risk_inclusive").get<bool>()};
        a.attention = AttentionState::restore(doc.at("attention").get<std::vector<double>>());
        a.stm = store_from_json(doc.at("stm"), MemoryKind::ShortTerm);
        a.ltm = store_from_json(doc.at("ltm"), MemoryKind::LongTerm);
        const auto& w = doc.at("workspace");
        a.workspace = {w.at(0).get<double>(), w.at(1).get<double>(), w.at(2).get<double>()};
        a.iteration = doc.at("iteration").get<long>();
        a.alive = doc.at("alive").get<bool>();
        a.rng = Rng::deserialize(doc.at("rng").get<std::string>());
        return a;
    } catch (const json::exception& e) {
        throw ParseError(std::string("agent snapshot: ") + e.what());
    }
}

void write_snapshot(const Snapshot& s, std::ostream& out) {
    json records = json::array();
    for (const auto& r : s.records) {
        records.push_back(to_json(r));
    }
    const json doc{{"config", to_json(s.config)},
                   {"agent", to_json(s.agent)},
                   {"records", records},
                   {"initial_h", s.initial_happiness},
                   {"initial_wg", s.initial_weighted_goodness}};
    out << doc.dump() << '\n';
}

Snapshot read_snapshot(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("snapshot: parse error at byte " + std::to_string(e.byte));
    }
    Snapshot s;
    s.config = config_from_json(doc.at("config"));
    s.agent = agent_from_json(doc.at("agent"));
    for (const auto& r : doc.at("records")) {
        s.records.push_back(record_from_json(r));
    }
    s.initial_happiness = doc.at("initial_h").get<double>();
    s.initial_weighted_goodness = doc.at("initial_wg").get<double>();
    return s;
}

} // namespace gwsim
