#include "gwsim/memory.hpp"

#include <cmath>

namespace gwsim {

bool MemoryStore::admits(double reward) const {
    return std::abs(reward) > threshold_;
}

void MemoryStore::insert(const Belief& belief) {
    beliefs_.push_back(belief);
    while (beliefs_.size() > capacity_) {
        auto victim = beliefs_.begin();
        if (kind_ == MemoryKind::LongTerm) {
            // Least relevant first; among equals the oldest, which is the
            // earliest in insertion order.
            for (auto it = beliefs_.begin(); it != beliefs_.end(); ++it) {
                const double a = std::abs(it->reward);
                const double b = std::abs(victim->reward);
                if (a < b || (a == b && it->timestamp < victim->timestamp)) {
                    victim = it;
                }
            }
        }
        beliefs_.erase(victim);
    }
}

int MemoryStore::lookup(ActionTuple tuple) const {
    const Belief* latest = nullptr;
    for (const Belief& b : beliefs_) {
        if (b.tuple() == tuple && (latest == nullptr || b.timestamp >= latest->timestamp)) {
            latest = &b;
        }
    }
    if (latest == nullptr || latest->reward == 0.0) {
        return 0;
    }
    return latest->reward > 0.0 ? 1 : -1;
}

StoreOutcome maybe_store(MemoryStore& stm, MemoryStore& ltm, double reward, ActionTuple tuple, long timestamp) {
    const Belief belief{reward, tuple.direction, tuple.magnitude, timestamp};
    if (ltm.admits(reward)) {
        ltm.insert(belief);
        return StoreOutcome::Long;
    }
    if (stm.admits(reward)) {
        stm.insert(belief);
        return StoreOutcome::Short;
    }
    return StoreOutcome::None;
}

} // namespace gwsim
