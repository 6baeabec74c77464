#include "numerics/rng.hpp"

#include <cmath>
#include <numbers>

namespace dgp {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t Rng::next_u64() {
    ++counter_;
    return mix64(seed_ + counter_ * kGamma);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int Rng::uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo + 1);
    return lo + static_cast<int>(next_u64() % span);
}

void Rng::fill_normal(float* out, std::size_t n) {
    for (std::size_t i = 0; i < n; i += 2) {
        // 1 - u keeps the log argument in (0, 1].
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        out[i] = static_cast<float>(r * std::cos(theta));
        if (i + 1 < n) out[i + 1] = static_cast<float>(r * std::sin(theta));
    }
}

Rng Rng::split(std::uint64_t label) const {
    return Rng(mix64(seed_ ^ mix64(label + 0x632BE59BD9B4E019ULL) ^ mix64(counter_)), 0);
}

Rng Rng::split(std::string_view label) const {
    // FNV-1a
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return split(h);
}

}  // namespace dgp
