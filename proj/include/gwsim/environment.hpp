#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gwsim {

enum class Direction : std::uint8_t { Up = 0, Down = 1, Left = 2, Right = 3 };

inline constexpr std::array<Direction, 4> kDirections{Direction::Up, Direction::Down, Direction::Left,
                                                      Direction::Right};

std::string_view to_string(Direction d);
Direction direction_from_string(std::string_view name);

struct GridPos {
    int row = 0;
    int col = 0;

    friend bool operator==(const GridPos&, const GridPos&) = default;
};

/// One N x N layer of magnitude values, row-major.
class MagnitudeField {
public:
    MagnitudeField() = default;
    MagnitudeField(int size, std::vector<double> values);

    int size() const { return size_; }
    double at(int row, int col) const { return values_[static_cast<std::size_t>(row) * size_ + col]; }
    double at(GridPos p) const { return at(p.row, p.col); }
    const std::vector<double>& values() const { return values_; }

    double max_abs() const;
    /// Largest |a - b| over all 4-neighbour pairs, including the wrap-around pairs.
    double max_adjacent_difference() const;

    friend bool operator==(const MagnitudeField&, const MagnitudeField&) = default;

private:
    int size_ = 0;
    std::vector<double> values_;
};

class Environment {
public:
    Environment() = default;
    /// Validates that all fields are size x size and bounded by alpha.
    Environment(int size, double alpha, std::vector<MagnitudeField> fields, std::string id = {},
                std::optional<std::uint64_t> seed = std::nullopt);

    int size() const { return size_; }
    int magnitude_count() const { return static_cast<int>(fields_.size()); }
    double alpha() const { return alpha_; }
    const std::string& id() const { return id_; }
    std::optional<std::uint64_t> seed() const { return seed_; }
    const std::vector<MagnitudeField>& fields() const { return fields_; }
    const MagnitudeField& field(int k) const { return fields_[k]; }

    double value(int k, GridPos p) const { return fields_[k].at(p); }
    bool contains(GridPos p) const { return p.row >= 0 && p.row < size_ && p.col >= 0 && p.col < size_; }
    /// Neighbouring cell on the torus.
    GridPos neighbor(GridPos p, Direction d) const;

    friend bool operator==(const Environment&, const Environment&) = default;

private:
    int size_ = 0;
    double alpha_ = 10.0;
    std::vector<MagnitudeField> fields_;
    std::string id_;
    std::optional<std::uint64_t> seed_;
};

/// "ESxMy" where x is the grid size and y the number of magnitudes.
std::string environment_id(int size, int magnitude_count);

struct GenerationParams {
    int size = 20;
    int magnitude_count = 5;
    double alpha = 10.0;
    double smooth_bound = 5.0;
    std::uint64_t seed = 0;
};

/// Gaussian noise per magnitude, box-blurred on the torus until the rescaled
/// field keeps every adjacent difference within smooth_bound, then scaled so
/// that max|v| == alpha.
Environment generate_environment(const GenerationParams& params);

// ---------------------------------------------------------------------------
// Preferences

enum class PreferenceKind : std::uint8_t { AbsSine = 0, AbsCosine = 1, Sine = 2, InverseSine = 3 };

inline constexpr std::array<PreferenceKind, 4> kPreferenceKinds{PreferenceKind::AbsSine, PreferenceKind::AbsCosine,
                                                                PreferenceKind::Sine, PreferenceKind::InverseSine};

std::string_view to_string(PreferenceKind kind);
PreferenceKind preference_from_string(std::string_view name);

inline constexpr double kPreferenceDomain = 10.0;
inline constexpr double kPreferenceMax = 10.0;

struct PreferenceProfile {
    std::vector<PreferenceKind> assignment;
    /// Use the literal -cos((x-1)/10 * pi/2) for InverseSine instead of
    /// 5 - 5 sin(x/10 * pi/2). Its range is roughly [-1, 0.16].
    bool literal_fourth = false;

    std::size_t size() const { return assignment.size(); }
    PreferenceKind operator[](std::size_t k) const { return assignment[k]; }

    friend bool operator==(const PreferenceProfile&, const PreferenceProfile&) = default;
};

/// Each magnitude gets one of the four kinds, uniformly and independently.
PreferenceProfile assign_preferences(int magnitude_count, std::uint64_t seed);

/// Preference in [0, 10] for x in [-10, 10]; throws InputError outside.
double eval_preference(PreferenceKind kind, double x, bool literal_fourth = false);

// ---------------------------------------------------------------------------
// Perception

/// Values of the four adjacent cells for every magnitude, direction-major.
class Observation {
public:
    Observation(int magnitude_count, std::vector<double> values)
        : magnitude_count_(magnitude_count), values_(std::move(values)) {}

    int magnitude_count() const { return magnitude_count_; }
    std::size_t size() const { return values_.size(); }
    double value(Direction d, int k) const {
        return values_[static_cast<std::size_t>(d) * magnitude_count_ + k];
    }
    const std::vector<double>& values() const { return values_; }

private:
    int magnitude_count_;
    std::vector<double> values_;
};

Observation observe(const Environment& env, GridPos pos);

/// Per-magnitude goodness, 10 - preference; 0 is best.
double magnitude_goodness(const Environment& env, const PreferenceProfile& profile, int k, GridPos pos);
/// Mean of magnitude_goodness over all magnitudes.
double goodness(const Environment& env, const PreferenceProfile& profile, GridPos pos);
/// Exhaustive argmin of goodness over all cells (first in row-major order on ties).
GridPos best_position(const Environment& env, const PreferenceProfile& profile);

// ---------------------------------------------------------------------------
// Persistence

void save_environment(const Environment& env, const PreferenceProfile& profile, std::ostream& out);
void save_environment(const Environment& env, const PreferenceProfile& profile, const std::filesystem::path& path);

struct LoadedEnvironment {
    Environment environment;
    PreferenceProfile profile;
};

LoadedEnvironment load_environment(std::istream& in);
LoadedEnvironment load_environment(const std::filesystem::path& path);

/// One magnitude as a comma-separated N x N matrix.
void write_heatmap_csv(const Environment& env, int k, std::ostream& out);
void write_heatmap_csv(const Environment& env, int k, const std::filesystem::path& path);

} // namespace gwsim
