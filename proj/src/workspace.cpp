#include "gwsim/workspace.hpp"

#include <algorithm>
#include <numeric>

#include "gwsim/errors.hpp"

namespace gwsim {

void WorkspaceWeights::normalize() {
    attention = std::clamp(attention, 0.0, 1.0);
    short_term = std::clamp(short_term, 0.0, 1.0);
    long_term = std::clamp(long_term, 0.0, 1.0);
    const double sum = attention + short_term + long_term;
    if (sum <= 0.0) {
        attention = short_term = long_term = 1.0 / 3.0;
        return;
    }
    attention /= sum;
    short_term /= sum;
    long_term /= sum;
}

Regime classify(const Feelings& f) {
    if (f.happiness <= f.critical_threshold) {
        return Regime::Critical;
    }
    const bool risky = f.risk_inclusive ? f.happiness <= f.risk_threshold : f.happiness < f.risk_threshold;
    return risky ? Regime::Risk : Regime::Explore;
}

std::vector<double> modulate_scores(const std::vector<double>& raw, Regime regime) {
    std::vector<double> out = raw;
    if (raw.empty() || regime == Regime::Explore) {
        return out;
    }
    // First index wins ties for both best and worst.
    const auto best = static_cast<std::size_t>(std::max_element(raw.begin(), raw.end()) - raw.begin());
    const auto worst = static_cast<std::size_t>(std::min_element(raw.begin(), raw.end()) - raw.begin());
    if (regime == Regime::Critical) {
        std::fill(out.begin(), out.end(), 0.0);
        out[best] = 1.0;
        return out;
    }
    if (raw[best] == raw[worst]) {
        return out; // nothing to separate
    }
    out[best] = 2.0 * raw[best];
    out[worst] = 0.5 * raw[worst];
    return out;
}

std::vector<double> normalize_scores(const std::vector<double>& modulated) {
    std::vector<double> p(modulated.size());
    double total = 0.0;
    for (std::size_t i = 0; i < modulated.size(); ++i) {
        p[i] = std::max(0.0, modulated[i]);
        total += p[i];
    }
    for (double& v : p) {
        v = total > 0.0 ? v / total : 1.0 / static_cast<double>(p.size());
    }
    return p;
}

ScoredCandidates score_tuples(const CandidateSet& candidates, const MemoryStore& stm, const MemoryStore& ltm,
                              const WorkspaceWeights& weights, const Feelings& feelings) {
    if (candidates.size() == 0) {
        throw UsageError("score_tuples needs at least one candidate");
    }
    ScoredCandidates out;
    std::vector<double> raw;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        ScoredCandidate c;
        c.tuple = candidates.tuples[i];
        c.importance = candidates.importances[i];
        c.stm_sign = stm.lookup(c.tuple);
        c.ltm_sign = ltm.lookup(c.tuple);
        c.raw = weights.attention * c.importance + weights.short_term * c.stm_sign +
                weights.long_term * 2.0 * c.ltm_sign;
        raw.push_back(c.raw);
        out.items.push_back(c);
    }
    const auto modulated = modulate_scores(raw, classify(feelings));
    const auto probs = normalize_scores(modulated);
    for (std::size_t i = 0; i < out.items.size(); ++i) {
        out.items[i].modulated = modulated[i];
        out.items[i].probability = probs[i];
    }
    return out;
}

std::size_t sample_decision(const ScoredCandidates& scored, Rng& rng) {
    if (scored.size() == 0) {
        throw UsageError("sample_decision needs at least one candidate");
    }
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        if (scored[i].probability <= 0.0) {
            continue;
        }
        last_positive = i;
        acc += scored[i].probability;
        if (u < acc) {
            return i;
        }
    }
    return last_positive;
}

double evaluate(double value, PreferenceKind kind, bool literal_fourth) {
    return eval_preference(kind, value, literal_fourth) - kPreferenceMax / 2.0;
}

bool update_happiness(Feelings& feelings, double reward, double fatigue) {
    feelings.happiness = std::clamp(feelings.happiness + reward - fatigue, kHappinessMin, kHappinessMax);
    return feelings.happiness >= feelings.death_threshold;
}

void apply_module_update(WorkspaceWeights& weights, WorkspaceModule module, bool matched, double step) {
    const double own = matched ? step : -step;
    const double other = -own / 2.0;
    std::array<double*, 3> slots{&weights.attention, &weights.short_term, &weights.long_term};
    for (std::size_t i = 0; i < slots.size(); ++i) {
        *slots[i] += i == static_cast<std::size_t>(module) ? own : other;
    }
    weights.normalize();
}

void adapt_module_weights_ordered(WorkspaceWeights& weights, double reward, int stm_sign, int ltm_sign,
                                  const std::array<WorkspaceModule, 3>& order) {
    const int reward_sign = reward > 0.0 ? 1 : (reward < 0.0 ? -1 : 0);
    for (WorkspaceModule module : order) {
        switch (module) {
        case WorkspaceModule::Attention:
            apply_module_update(weights, module, reward > 0.0);
            break;
        case WorkspaceModule::ShortTerm:
            if (stm_sign != 0) {
                apply_module_update(weights, module, stm_sign == reward_sign);
            }
            break;
        case WorkspaceModule::LongTerm:
            if (ltm_sign != 0) {
                apply_module_update(weights, module, ltm_sign == reward_sign);
            }
            break;
        }
    }
}

void adapt_module_weights(WorkspaceWeights& weights, double reward, int stm_sign, int ltm_sign, Rng& rng) {
    std::array<WorkspaceModule, 3> order{WorkspaceModule::Attention, WorkspaceModule::ShortTerm,
                                         WorkspaceModule::LongTerm};
    // Fisher-Yates with our own index draws keeps the permutation independent
    // of the standard library's shuffle algorithm.
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::swap(order[i], order[rng.index(i + 1)]);
    }
    adapt_module_weights_ordered(weights, reward, stm_sign, ltm_sign, order);
}

} // namespace gwsim
