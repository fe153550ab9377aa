#include "gwsim/attention.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gwsim/errors.hpp"

namespace gwsim {

AttentionState::AttentionState(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty() || weights_.size() % kDirections.size() != 0) {
        throw ConfigError("attention weights must cover 4 directions per magnitude");
    }
    normalize();
}

AttentionState AttentionState::init(int magnitude_count, AttentionInit mode, Rng& rng) {
    if (magnitude_count < 1) {
        throw ConfigError("magnitude count must be at least 1");
    }
    const std::size_t n = kDirections.size() * static_cast<std::size_t>(magnitude_count);
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    if (mode == AttentionInit::Random) {
        for (double& v : w) {
            v = rng.uniform();
        }
    }
    return AttentionState(std::move(w));
}

AttentionState AttentionState::restore(std::vector<double> weights) {
    AttentionState state;
    if (weights.empty() || weights.size() % kDirections.size() != 0) {
        throw ValidationError("attention weights must cover 4 directions per magnitude");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0 && w <= 1.0)) {
            throw ValidationError("attention weight outside [0, 1]");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ValidationError("attention weights do not sum to 1");
    }
    state.weights_ = std::move(weights);
    return state;
}

double AttentionState::magnitude_importance(int k) const {
    const auto first = weights_.begin() + static_cast<std::ptrdiff_t>(k) * kDirections.size();
    return std::accumulate(first, first + kDirections.size(), 0.0);
}

void AttentionState::normalize() {
    double sum = 0.0;
    for (double& w : weights_) {
        w = std::clamp(w, 0.0, 1.0);
        sum += w;
    }
    if (sum <= 0.0) {
        std::fill(weights_.begin(), weights_.end(), 1.0 / static_cast<double>(weights_.size()));
        return;
    }
    for (double& w : weights_) {
        w /= sum;
    }
}

void AttentionState::apply_update(std::size_t chosen, double reward, double rate) {
    if (reward == 0.0) {
        return;
    }
    const double sign = reward > 0.0 ? 1.0 : -1.0;
    const double spread = rate / static_cast<double>(weights_.size() - 1);
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        weights_[i] += i == chosen ? sign * rate : -sign * spread;
    }
    normalize();
}

std::vector<std::size_t> sample_without_replacement(std::span<const double> weights, std::size_t count, Rng& rng) {
    std::vector<double> remaining(weights.begin(), weights.end());
    std::vector<bool> taken(weights.size(), false);
    std::vector<std::size_t> picked;
    picked.reserve(count);
    for (std::size_t draw = 0; draw < count; ++draw) {
        const double total = std::accumulate(remaining.begin(), remaining.end(), 0.0);
        std::size_t choice = weights.size();
        if (total > 0.0) {
            const double u = rng.uniform() * total;
            double acc = 0.0;
            std::size_t last_positive = weights.size();
            for (std::size_t i = 0; i < remaining.size(); ++i) {
                if (remaining[i] <= 0.0) {
                    continue;
                }
                last_positive = i;
                acc += remaining[i];
                if (u < acc) {
                    choice = i;
                    break;
                }
            }
            if (choice == weights.size()) {
                choice = last_positive; // rounding at the top of the cumulative sum
            }
        } else {
            std::vector<std::size_t> free;
            for (std::size_t i = 0; i < taken.size(); ++i) {
                if (!taken[i]) {
                    free.push_back(i);
                }
            }
            choice = free[rng.index(free.size())];
        }
        taken[choice] = true;
        remaining[choice] = 0.0;
        picked.push_back(choice);
    }
    return picked;
}

CandidateSet select_actions(const AttentionState& state, double happiness, int limit, double critical_threshold,
                            Rng& rng) {
    if (limit < 1 || static_cast<std::size_t>(limit) > state.size()) {
        throw ConfigError("attentional limit must lie in [1, 4m]");
    }
    const auto& w = state.weights();
    std::vector<std::size_t> picked;
    if (happiness < critical_threshold) {
        std::vector<std::size_t> order(w.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
        picked.assign(order.begin(), order.begin() + limit);
    } else {
        picked = sample_without_replacement(w, static_cast<std::size_t>(limit), rng);
    }

    CandidateSet out;
    double total = 0.0;
    for (std::size_t i : picked) {
        out.tuples.push_back(tuple_at(i));
        out.importances.push_back(w[i]);
        total += w[i];
    }
    for (double& v : out.importances) {
        v = total > 0.0 ? v / total : 1.0 / static_cast<double>(picked.size());
    }
    return out;
}

double learning_rate_mean(double reward, double happiness, const AdaptationParams& params) {
    if (happiness < params.critical_threshold) {
        return 1.0 - (happiness - params.death_threshold);
    }
    const double magnitude = std::abs(reward);
    if (magnitude > params.ltm_threshold) {
        return params.rates.high;
    }
    if (magnitude > params.stm_threshold) {
        return params.rates.medium;
    }
    return params.rates.low;
}

double draw_learning_rate(double reward, double happiness, const AdaptationParams& params, Rng& rng) {
    const double r = rng.normal(learning_rate_mean(reward, happiness, params), params.rates.sigma);
    return std::clamp(r, 0.0, 1.0);
}

double adapt_weights(AttentionState& state, std::size_t chosen, double reward, double happiness,
                     const AdaptationParams& params, Rng& rng) {
    if (reward == 0.0) {
        return 0.0;
    }
    const double rate = draw_learning_rate(reward, happiness, params, rng);
    state.apply_update(chosen, reward, rate);
    return rate;
}

} // namespace gwsim
