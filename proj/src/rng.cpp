#include "gwsim/rng.hpp"

#include <sstream>

#include "gwsim/errors.hpp"

namespace gwsim {

double Rng::uniform() {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    return dist(engine_);
}

std::size_t Rng::index(std::size_t n) {
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(engine_);
}

double Rng::normal(double mean, double stddev) {
    // Fresh distribution per draw: no cached second variate lives outside the
    // engine, so serialize() captures the full stream state.
    std::normal_distribution<double> dist(mean, stddev);
    return dist(engine_);
}

std::string Rng::serialize() const {
    std::ostringstream out;
    out << engine_;
    return out.str();
}

Rng Rng::deserialize(const std::string& text) {
    Rng rng;
    std::istringstream in(text);
    in >> rng.engine_;
    if (in.fail()) {
        throw ParseError("invalid random stream state");
    }
    return rng;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index) {
    // FNV-1a over the label, then mixed with the master seed and index.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(splitmix64(master ^ h) + index);
}

} // namespace gwsim
