#pragma once

#include <cstdint>
#include <string_view>

namespace dgp {

// Counter-based generator: output n is a pure function of (seed, n), so a
// stream can be reproduced from any saved (seed, counter) pair and split
// per sample without sharing state between threads.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0, std::uint64_t counter = 0) : seed_(seed), counter_(counter) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64();
    // Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Uniform integer in [lo, hi], inclusive.
    int uniform_int(int lo, int hi);
    bool bernoulli(double p) { return uniform() < p; }

    // Fills `out` with standard normals (Box-Muller, pairs of draws).
    void fill_normal(float* out, std::size_t n);

    Rng split(std::uint64_t label) const;
    Rng split(std::string_view label) const;

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace dgp
