#pragma once

#include <cstdint>
#include <vector>

#include "numerics/params.hpp"

namespace dgp {

struct AdamConfig {
    float lr = 2e-4f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float epsilon = 1e-8f;
};

struct AdamState {
    std::vector<std::vector<float>> m;
    std::vector<std::vector<float>> v;
    std::int64_t t = 0;
};

// One bias-corrected Adam update of every tensor in `params`, using the
// gradients currently stored on them. Missing gradients count as zero.
void adam_step(ParamSet& params, AdamState& state, const AdamConfig& cfg);

class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}
    void step(ParamSet& params) { adam_step(params, state_, cfg_); }
    const AdamState& state() const { return state_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    AdamState state_;
};

}  // namespace dgp
