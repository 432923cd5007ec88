#pragma once

#include <cstdint>
#include <string>

#include <random>

#include "cotgan/tensor.hpp"

namespace cotgan {

// Deterministic RNG with explicitly specified transforms. The engine is
// std::mt19937_64 (bit-exact across platforms by the standard); uniform and
// normal draws avoid std::*_distribution, whose output is implementation
// defined. State round-trips through serialize()/deserialize() so a resumed
// run continues the exact stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    double uniform();                       // [0, 1), 53-bit resolution
    double uniform(double lo, double hi);   // lo + (hi-lo) * uniform()
    double normal();                        // standard normal, Box-Muller
    double normal(double mean, double stddev);
    std::uint64_t next_u64();
    index_t uniform_int(index_t n);         // [0, n), unbiased

    Tensor normal_tensor(const Shape& shape);
    Tensor uniform_tensor(const Shape& shape, double lo, double hi);

    // Independent stream for parallel or restartable work, keyed off the seed
    // this generator was constructed with.
    Rng derive(std::uint64_t stream) const;
    std::uint64_t base_seed() const { return base_seed_; }

    std::string serialize() const;
    static Rng deserialize(const std::string& text);

private:
    std::uint64_t base_seed_ = 0;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// SplitMix64 step, used for seed expansion and stream derivation.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace cotgan
