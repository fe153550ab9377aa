#pragma once

#include <array>
#include <vector>

#include "gwsim/attention.hpp"
#include "gwsim/environment.hpp"
#include "gwsim/memory.hpp"
#include "gwsim/rng.hpp"

namespace gwsim {

/// Trust the workspace places in each information source; a point on the
/// 3-simplex.
struct WorkspaceWeights {
    double attention = 1.0 / 3.0;
    double short_term = 1.0 / 3.0;
    double long_term = 1.0 / 3.0;

    void normalize();

    friend bool operator==(const WorkspaceWeights&, const WorkspaceWeights&) = default;
};

/// Happiness and the thresholds that shape behaviour around it.
struct Feelings {
    double happiness = 5.0;
    double death_threshold = 2.0;
    double critical_threshold = 3.5;
    double risk_threshold = 4.5;
    double fatigue = 0.05;
    /// Whether h == risk_threshold already counts as the risk regime.
    bool risk_inclusive = false;
};

inline constexpr double kHappinessMin = 0.0;
inline constexpr double kHappinessMax = 10.0;

enum class Regime { Explore, Risk, Critical };

Regime classify(const Feelings& feelings);

struct ScoredCandidate {
    ActionTuple tuple;
    double importance = 0.0;
    int stm_sign = 0;
    int ltm_sign = 0;
    double raw = 0.0;
    double modulated = 0.0;
    double probability = 0.0;
};

struct ScoredCandidates {
    std::vector<ScoredCandidate> items;

    std::size_t size() const { return items.size(); }
    const ScoredCandidate& operator[](std::size_t i) const { return items[i]; }
};

/// raw = w_a * importance + w_s * s + w_l * l with s in {-1, 0, 1} and
/// l in {-2, 0, 2}, modulated by the happiness regime, clamped at zero and
/// normalized (uniform when everything clamps to zero).
ScoredCandidates score_tuples(const CandidateSet& candidates, const MemoryStore& stm, const MemoryStore& ltm,
                              const WorkspaceWeights& weights, const Feelings& feelings);

/// Regime modulation and normalization over precomputed raw scores.
std::vector<double> modulate_scores(const std::vector<double>& raw, Regime regime);
std::vector<double> normalize_scores(const std::vector<double>& modulated);

/// Index into `scored` of one multinomial draw.
std::size_t sample_decision(const ScoredCandidates& scored, Rng& rng);

/// Centered evaluation of an observed value: preference - 5, in [-5, 5].
double evaluate(double value, PreferenceKind kind, bool literal_fourth = false);

/// h <- clamp(h + reward - fatigue, 0, 10); returns whether h >= death threshold.
bool update_happiness(Feelings& feelings, double reward, double fatigue);
inline bool update_happiness(Feelings& feelings, double reward) {
    return update_happiness(feelings, reward, feelings.fatigue);
}

enum class WorkspaceModule { Attention = 0, ShortTerm = 1, LongTerm = 2 };

inline constexpr double kModuleStep = 0.05;

/// +step to `module` and -step/2 to each of the other two when `matched`,
/// the mirror otherwise; then clamp and renormalize.
void apply_module_update(WorkspaceWeights& weights, WorkspaceModule module, bool matched,
                         double step = kModuleStep);

/// Applies the per-module updates in the given order. Attention always takes
/// part (matched iff reward > 0); a memory takes part only when it held a
/// belief (non-zero sign) for the chosen tuple and is matched iff that sign
/// agrees with the reward.
void adapt_module_weights_ordered(WorkspaceWeights& weights, double reward, int stm_sign, int ltm_sign,
                                  const std::array<WorkspaceModule, 3>& order);

/// Same with one uniformly random visiting order.
void adapt_module_weights(WorkspaceWeights& weights, double reward, int stm_sign, int ltm_sign, Rng& rng);

} // namespace gwsim
