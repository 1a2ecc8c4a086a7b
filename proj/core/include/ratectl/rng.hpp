#pragma once

#include <cstdint>
#include <random>

namespace ratectl {

// SplitMix64 finalizer. Used only for deriving decorrelated sub-seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Labels for the independent random streams hanging off one master seed.
// Each (component, index) pair owns its own stream, so reconfiguring e.g.
// one station's service distribution leaves every other stream's variate
// sequence untouched.
enum class SeedComponent : std::uint64_t {
    arrival_process = 1,
    stage_service = 2,
    env_episode = 3,
    agent_init = 4,
    agent_sampling = 5,
    exploration_noise = 6,
    training_run = 7,
    evaluation_run = 8,
};

inline std::uint64_t derive_subseed(std::uint64_t master, SeedComponent component,
                                    std::uint64_t index = 0) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ static_cast<std::uint64_t>(component));
    return splitmix64(h ^ index);
}

// Seedable stream of randomness. Same seed => bit-identical draw sequence.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::mt19937_64& engine() { return engine_; }

    double uniform01() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }

    double standard_normal() {
        return std::normal_distribution<double>(0.0, 1.0)(engine_);
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace ratectl
