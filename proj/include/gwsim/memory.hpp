#pragma once

#include <cstddef>
#include <vector>

#include "gwsim/attention.hpp"

namespace gwsim {

/// A remembered evaluation: moving in `direction` and reading `magnitude`
/// at iteration `timestamp` gave `reward`.
struct Belief {
    double reward = 0.0;
    Direction direction = Direction::Up;
    int magnitude = 0;
    long timestamp = 0;

    ActionTuple tuple() const { return {direction, magnitude}; }

    friend bool operator==(const Belief&, const Belief&) = default;
};

enum class MemoryKind { ShortTerm, LongTerm };

enum class StoreOutcome { None, Short, Long };

/// Bounded belief store. Short-term memory is a FIFO; long-term memory keeps
/// the most relevant beliefs (largest |reward|, newer wins ties).
class MemoryStore {
public:
    MemoryStore() = default;
    MemoryStore(MemoryKind kind, std::size_t capacity, double threshold)
        : kind_(kind), capacity_(capacity), threshold_(threshold) {}

    MemoryKind kind() const { return kind_; }
    std::size_t capacity() const { return capacity_; }
    double threshold() const { return threshold_; }
    const std::vector<Belief>& beliefs() const { return beliefs_; }
    std::size_t size() const { return beliefs_.size(); }
    bool empty() const { return beliefs_.empty(); }

    bool admits(double reward) const;
    /// Appends and evicts down to capacity. Does not check the threshold.
    void insert(const Belief& belief);

    /// +1 / -1 for the sign of the most recent belief about `tuple`, 0 if none.
    int lookup(ActionTuple tuple) const;

    friend bool operator==(const MemoryStore&, const MemoryStore&) = default;

private:
    MemoryKind kind_ = MemoryKind::ShortTerm;
    std::size_t capacity_ = 0;
    double threshold_ = 0.0;
    std::vector<Belief> beliefs_; // insertion order
};

/// Admits the evaluation into at most one store, long-term taking precedence.
StoreOutcome maybe_store(MemoryStore& stm, MemoryStore& ltm, double reward, ActionTuple tuple, long timestamp);

} // namespace gwsim
