#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gwsim/environment.hpp"
#include "gwsim/rng.hpp"

namespace gwsim {

/// A (direction, magnitude) pair: move in `direction` and evaluate magnitude
/// `magnitude` at the destination.
struct ActionTuple {
    Direction direction = Direction::Up;
    int magnitude = 0;

    friend bool operator==(const ActionTuple&, const ActionTuple&) = default;
};

/// Tuples are laid out magnitude-major: index = 4 * magnitude + direction.
inline std::size_t tuple_index(ActionTuple t) {
    return static_cast<std::size_t>(t.magnitude) * kDirections.size() + static_cast<std::size_t>(t.direction);
}
inline ActionTuple tuple_at(std::size_t index) {
    return {kDirections[index % kDirections.size()], static_cast<int>(index / kDirections.size())};
}

enum class AttentionInit { Uniform, Random };

/// Multinomial weights over all 4m action tuples.
class AttentionState {
public:
    AttentionState() = default;
    /// Takes arbitrary non-negative weights and projects them onto the simplex.
    explicit AttentionState(std::vector<double> weights);

    static AttentionState init(int magnitude_count, AttentionInit mode, Rng& rng);
    /// Adopts already-normalized weights as they are (snapshot restore).
    static AttentionState restore(std::vector<double> weights);

    std::size_t size() const { return weights_.size(); }
    int magnitude_count() const { return static_cast<int>(weights_.size() / kDirections.size()); }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<double>& weights() const { return weights_; }

    /// Sum of the four direction weights of magnitude k.
    double magnitude_importance(int k) const;

    /// Clamps every weight to [0, 1] and rescales to unit sum.
    void normalize();

    /// Raw update rule with an explicit learning rate: the chosen weight moves
    /// by +rate (reward > 0) or -rate (reward < 0) and every other weight by
    /// the opposite rate / (4m - 1). Zero reward leaves the state untouched.
    void apply_update(std::size_t chosen, double reward, double rate);

    friend bool operator==(const AttentionState&, const AttentionState&) = default;

private:
    std::vector<double> weights_;
};

struct CandidateSet {
    std::vector<ActionTuple> tuples;
    std::vector<double> importances;

    std::size_t size() const { return tuples.size(); }
};

/// Chooses `limit` distinct tuples. With happiness >= critical the draw is
/// multinomial without replacement; below it the top weights are taken
/// (lowest index first on ties) and no randomness is consumed.
CandidateSet select_actions(const AttentionState& state, double happiness, int limit, double critical_threshold,
                            Rng& rng);

/// Distinct indexes drawn sequentially, each proportional to the weights not
/// yet taken. Remaining mass of zero falls back to a uniform draw.
std::vector<std::size_t> sample_without_replacement(std::span<const double> weights, std::size_t count, Rng& rng);

/// Means of the Gaussian learning-rate draws for small, medium and large rewards.
struct LearningRates {
    double low = 0.05;
    double medium = 0.15;
    double high = 0.2;
    double sigma = 0.001;
};

struct AdaptationParams {
    LearningRates rates;
    double stm_threshold = 1.5;
    double ltm_threshold = 4.0;
    double death_threshold = 2.0;
    double critical_threshold = 3.5;
};

/// Mean of the learning-rate draw. Near death (h < critical) this is the
/// extreme rate 1 - (h - death); otherwise it is tiered by |reward|.
double learning_rate_mean(double reward, double happiness, const AdaptationParams& params);

/// One learning-rate draw, clamped to [0, 1].
double draw_learning_rate(double reward, double happiness, const AdaptationParams& params, Rng& rng);

/// Draws a learning rate and applies it. Returns the rate used (0 when the
/// reward is zero and nothing is drawn).
double adapt_weights(AttentionState& state, std::size_t chosen, double reward, double happiness,
                     const AdaptationParams& params, Rng& rng);

} // namespace gwsim
