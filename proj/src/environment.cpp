#include "gwsim/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "gwsim/errors.hpp"
#include "gwsim/rng.hpp"

namespace gwsim {

using nlohmann::json;

namespace {

constexpr int kMaxSmoothingPasses = 100000;
constexpr std::string_view kFileFormat = "gwsim-environment";
constexpr int kFileVersion = 1;

std::size_t cell_index(int size, int row, int col) {
    return static_cast<std::size_t>(row) * size + col;
}

int wrap(int i, int size) {
    return i < 0 ? i + size : (i >= size ? i - size : i);
}

// 5-point average on the torus.
std::vector<double> blur_pass(const std::vector<double>& in, int size) {
    std::vector<double> out(in.size());
    for (int r = 0; r < size; ++r) {
        const int up = wrap(r - 1, size);
        const int down = wrap(r + 1, size);
        for (int c = 0; c < size; ++c) {
            const int left = wrap(c - 1, size);
            const int right = wrap(c + 1, size);
            const double sum = in[cell_index(size, r, c)] + in[cell_index(size, up, c)] +
                               in[cell_index(size, down, c)] + in[cell_index(size, r, left)] +
                               in[cell_index(size, r, right)];
            out[cell_index(size, r, c)] = sum / 5.0;
        }
    }
    return out;
}

std::vector<double> rescale(const std::vector<double>& in, double alpha) {
    std::size_t extreme = 0;
    double max_abs = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (std::abs(in[i]) > max_abs) {
            max_abs = std::abs(in[i]);
            extreme = i;
        }
    }
    if (max_abs == 0.0) {
        throw ConfigError("cannot normalize an all-zero magnitude field");
    }
    std::vector<double> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = std::clamp(in[i] / max_abs * alpha, -alpha, alpha);
    }
    out[extreme] = std::copysign(alpha, in[extreme]);
    return out;
}

MagnitudeField generate_field(int size, double alpha, double smooth_bound, Rng& rng) {
    std::vector<double> raw(static_cast<std::size_t>(size) * size);
    for (double& v : raw) {
        v = rng.normal(0.0, 1.0);
    }
    for (int pass = 0; pass <= kMaxSmoothingPasses; ++pass) {
        MagnitudeField candidate(size, rescale(raw, alpha));
        if (candidate.max_adjacent_difference() <= smooth_bound) {
            return candidate;
        }
        raw = blur_pass(raw, size);
    }
    throw ConfigError("smoothing did not reach the adjacency bound");
}

} // namespace

std::string_view to_string(Direction d) {
    switch (d) {
    case Direction::Up: return "up";
    case Direction::Down: return "down";
    case Direction::Left: return "left";
    case Direction::Right: return "right";
    }
    return "?";
}

Direction direction_from_string(std::string_view name) {
    for (Direction d : kDirections) {
        if (to_string(d) == name) {
            return d;
        }
    }
    throw ParseError("unknown direction '" + std::string(name) + "'");
}

MagnitudeField::MagnitudeField(int size, std::vector<double> values) : size_(size), values_(std::move(values)) {
    if (size < 1 || values_.size() != static_cast<std::size_t>(size) * size) {
        throw ValidationError("magnitude field must hold size*size values");
    }
}

double MagnitudeField::max_abs() const {
    double m = 0.0;
    for (double v : values_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

double MagnitudeField::max_adjacent_difference() const {
    double m = 0.0;
    for (int r = 0; r < size_; ++r) {
        for (int c = 0; c < size_; ++c) {
            const double v = at(r, c);
            // Each unordered pair once: right and down neighbours.
            m = std::max(m, std::abs(v - at(r, wrap(c + 1, size_))));
            m = std::max(m, std::abs(v - at(wrap(r + 1, size_), c)));
        }
    }
    return m;
}

Environment::Environment(int size, double alpha, std::vector<MagnitudeField> fields, std::string id,
                         std::optional<std::uint64_t> seed)
    : size_(size), alpha_(alpha), fields_(std::move(fields)), id_(std::move(id)), seed_(seed) {
    if (size_ < 2) {
        throw ValidationError("grid size must be at least 2");
    }
    if (!(alpha_ > 0.0)) {
        throw ValidationError("alpha must be positive");
    }
    if (fields_.empty()) {
        throw ValidationError("environment needs at least one magnitude");
    }
    for (std::size_t k = 0; k < fields_.size(); ++k) {
        if (fields_[k].size() != size_) {
            throw ValidationError("magnitude " + std::to_string(k) + " has size " +
                                  std::to_string(fields_[k].size()) + ", expected " + std::to_string(size_));
        }
        if (fields_[k].max_abs() > alpha_) {
            throw ValidationError("magnitude " + std::to_string(k) + " exceeds alpha");
        }
    }
    if (id_.empty()) {
        id_ = environment_id(size_, magnitude_count());
    }
}

GridPos Environment::neighbor(GridPos p, Direction d) const {
    switch (d) {
    case Direction::Up: return {wrap(p.row - 1, size_), p.col};
    case Direction::Down: return {wrap(p.row + 1, size_), p.col};
    case Direction::Left: return {p.row, wrap(p.col - 1, size_)};
    case Direction::Right: return {p.row, wrap(p.col + 1, size_)};
    }
    return p;
}

std::string environment_id(int size, int magnitude_count) {
    return "ES" + std::to_string(size) + "M" + std::to_string(magnitude_count);
}

Environment generate_environment(const GenerationParams& params) {
    if (params.size < 2) {
        throw ConfigError("grid size must be at least 2, got " + std::to_string(params.size));
    }
    if (params.magnitude_count < 1) {
        throw ConfigError("magnitude count must be at least 1, got " + std::to_string(params.magnitude_count));
    }
    if (!(params.alpha > 0.0)) {
        throw ConfigError("alpha must be positive");
    }
    if (!(params.smooth_bound > 0.0 && params.smooth_bound <= 2.0 * params.alpha)) {
        throw ConfigError("smooth_bound must lie in (0, 2*alpha]");
    }
    Rng rng(params.seed);
    std::vector<MagnitudeField> fields;
    fields.reserve(params.magnitude_count);
    for (int k = 0; k < params.magnitude_count; ++k) {
        fields.push_back(generate_field(params.size, params.alpha, params.smooth_bound, rng));
    }
    return Environment(params.size, params.alpha, std::move(fields),
                       environment_id(params.size, params.magnitude_count), params.seed);
}

// ---------------------------------------------------------------------------

std::string_view to_string(PreferenceKind kind) {
    switch (kind) {
    case PreferenceKind::AbsSine: return "abs_sine";
    case PreferenceKind::AbsCosine: return "abs_cosine";
    case PreferenceKind::Sine: return "sine";
    case PreferenceKind::InverseSine: return "inverse_sine";
    }
    return "?";
}

PreferenceKind preference_from_string(std::string_view name) {
    for (PreferenceKind k : kPreferenceKinds) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw ParseError("unknown preference kind '" + std::string(name) + "'");
}

PreferenceProfile assign_preferences(int magnitude_count, std::uint64_t seed) {
    if (magnitude_count < 1) {
        throw ConfigError("magnitude count must be at least 1");
    }
    Rng rng(seed);
    PreferenceProfile profile;
    profile.assignment.reserve(magnitude_count);
    for (int k = 0; k < magnitude_count; ++k) {
        profile.assignment.push_back(kPreferenceKinds[rng.index(kPreferenceKinds.size())]);
    }
    return profile;
}

double eval_preference(PreferenceKind kind, double x, bool literal_fourth) {
    if (!(x >= -kPreferenceDomain && x <= kPreferenceDomain)) {
        throw InputError("preference input " + std::to_string(x) + " outside [-10, 10]");
    }
    const double phase = x / 10.0 * std::numbers::pi / 2.0;
    switch (kind) {
    case PreferenceKind::AbsSine: return std::abs(10.0 * std::sin(phase));
    case PreferenceKind::AbsCosine: return std::abs(10.0 * std::cos(phase));
    case PreferenceKind::Sine: return 5.0 + 5.0 * std::sin(phase);
    case PreferenceKind::InverseSine:
        if (literal_fourth) {
            return -std::cos((x - 1.0) / 10.0 * std::numbers::pi / 2.0);
        }
        return 5.0 - 5.0 * std::sin(phase);
    }
    return 0.0;
}

// ---------------------------------------------------------------------------

Observation observe(const Environment& env, GridPos pos) {
    const int m = env.magnitude_count();
    std::vector<double> values;
    values.reserve(kDirections.size() * m);
    for (Direction d : kDirections) {
        const GridPos cell = env.neighbor(pos, d);
        for (int k = 0; k < m; ++k) {
            values.push_back(env.value(k, cell));
        }
    }
    return Observation(m, std::move(values));
}

double magnitude_goodness(const Environment& env, const PreferenceProfile& profile, int k, GridPos pos) {
    return kPreferenceMax - eval_preference(profile[k], env.value(k, pos), profile.literal_fourth);
}

double goodness(const Environment& env, const PreferenceProfile& profile, GridPos pos) {
    double sum = 0.0;
    for (int k = 0; k < env.magnitude_count(); ++k) {
        sum += magnitude_goodness(env, profile, k, pos);
    }
    return sum / env.magnitude_count();
}

GridPos best_position(const Environment& env, const PreferenceProfile& profile) {
    GridPos best{0, 0};
    double best_value = goodness(env, profile, best);
    for (int r = 0; r < env.size(); ++r) {
        for (int c = 0; c < env.size(); ++c) {
            const double g = goodness(env, profile, {r, c});
            if (g < best_value) {
                best_value = g;
                best = {r, c};
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------

void save_environment(const Environment& env, const PreferenceProfile& profile, std::ostream& out) {
    if (profile.size() != static_cast<std::size_t>(env.magnitude_count())) {
        throw ValidationError("preference profile length does not match magnitude count");
    }
    json doc;
    doc["format"] = kFileFormat;
    doc["version"] = kFileVersion;
    doc["id"] = env.id();
    doc["n"] = env.size();
    doc["m"] = env.magnitude_count();
    doc["alpha"] = env.alpha();
    doc["seed"] = env.seed() ? json(*env.seed()) : json(nullptr);
    json fields = json::array();
    for (const auto& f : env.fields()) {
        fields.push_back(f.values());
    }
    doc["fields"] = std::move(fields);
    json prefs = json::array();
    for (PreferenceKind k : profile.assignment) {
        prefs.push_back(to_string(k));
    }
    doc["preferences"] = std::move(prefs);
    doc["literal_fourth"] = profile.literal_fourth;
    out << doc.dump() << '\n';
    if (!out) {
        throw IoError("failed to write environment");
    }
}

void save_environment(const Environment& env, const PreferenceProfile& profile, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    save_environment(env, profile, out);
}

namespace {

template <typename T>
T required(const json& doc, const char* key) {
    if (!doc.contains(key)) {
        throw ParseError(std::string("environment file: missing key '") + key + "'");
    }
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("environment file: key '") + key + "': " + e.what());
    }
}

} // namespace

LoadedEnvironment load_environment(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("environment file: parse error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw ParseError("environment file: top level must be an object");
    }
    if (required<std::string>(doc, "format") != kFileFormat) {
        throw ParseError("environment file: unexpected format tag");
    }
    const int n = required<int>(doc, "n");
    const int m = required<int>(doc, "m");
    const double alpha = required<double>(doc, "alpha");
    const auto id = required<std::string>(doc, "id");
    const auto raw_fields = required<std::vector<std::vector<double>>>(doc, "fields");
    const auto raw_prefs = required<std::vector<std::string>>(doc, "preferences");
    std::optional<std::uint64_t> seed;
    if (doc.contains("seed") && !doc["seed"].is_null()) {
        seed = required<std::uint64_t>(doc, "seed");
    }

    if (n < 2) {
        throw ValidationError("environment file: n must be at least 2");
    }
    if (static_cast<int>(raw_fields.size()) != m) {
        throw ValidationError("environment file: m = " + std::to_string(m) + " but " +
                              std::to_string(raw_fields.size()) + " fields present");
    }
    if (static_cast<int>(raw_prefs.size()) != m) {
        throw ValidationError("environment file: m = " + std::to_string(m) + " but preference profile has " +
                              std::to_string(raw_prefs.size()) + " entries");
    }
    std::vector<MagnitudeField> fields;
    fields.reserve(m);
    for (std::size_t k = 0; k < raw_fields.size(); ++k) {
        if (raw_fields[k].size() != static_cast<std::size_t>(n) * n) {
            throw ValidationError("environment file: field " + std::to_string(k) + " has " +
                                  std::to_string(raw_fields[k].size()) + " values, expected n*n");
        }
        fields.emplace_back(n, raw_fields[k]);
    }
    PreferenceProfile profile;
    for (const auto& name : raw_prefs) {
        profile.assignment.push_back(preference_from_string(name));
    }
    if (doc.contains("literal_fourth")) {
        profile.literal_fourth = required<bool>(doc, "literal_fourth");
    }
    return {Environment(n, alpha, std::move(fields), id, seed), std::move(profile)};
}

LoadedEnvironment load_environment(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return load_environment(in);
}

void write_heatmap_csv(const Environment& env, int k, std::ostream& out) {
    if (k < 0 || k >= env.magnitude_count()) {
        throw InputError("magnitude index out of range");
    }
    std::ostringstream line;
    line.precision(17);
    for (int r = 0; r < env.size(); ++r) {
        line.str({});
        for (int c = 0; c < env.size(); ++c) {
            if (c > 0) {
                line << ',';
            }
            line << env.value(k, {r, c});
        }
        out << line.str() << '\n';
    }
}

void write_heatmap_csv(const Environment& env, int k, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    write_heatmap_csv(env, k, out);
}

} // namespace gwsim
