#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace gwsim {

/// Per-run random stream. All stochastic decisions of a run draw from one
/// instance so that (config, environment, seed) fixes the whole trajectory.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform();
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);
    double normal(double mean, double stddev);

    std::mt19937_64& engine() { return engine_; }

    std::string serialize() const;
    static Rng deserialize(const std::string& text);

    friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Stable seed derivation: the same (master, label, index) always maps to the
/// same seed, independent of how many other labels exist.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index);

} // namespace gwsim
