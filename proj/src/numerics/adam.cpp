#include "numerics/adam.hpp"

#include <cmath>

#include "error.hpp"

namespace dgp {

void adam_step(ParamSet& params, AdamState& state, const AdamConfig& cfg) {
    if (state.m.empty()) {
        for (const auto& [_, p] : params) {
            state.m.emplace_back(p.numel(), 0.0f);
            state.v.emplace_back(p.numel(), 0.0f);
        }
    }
    if (state.m.size() != params.size()) fail(ErrorCode::Shape, "adam: state does not match parameter count");
    state.t += 1;
    const double c1 = 1.0 - std::pow(static_cast<double>(cfg.beta1), static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(static_cast<double>(cfg.beta2), static_cast<double>(state.t));

    std::size_t i = 0;
    for (auto& [name, p] : params) {
        auto& m = state.m[i];
        auto& v = state.v[i];
        ++i;
        if (m.size() != p.numel()) fail(ErrorCode::Shape, "adam: moment buffer shape mismatch for '" + name + "'");
        const auto g = p.grad_data();
        if (g.empty()) {
            // Zero gradient: moments decay, parameter still moves by the bias-corrected moment.
            for (std::size_t k = 0; k < m.size(); ++k) {
                m[k] *= cfg.beta1;
                v[k] *= cfg.beta2;
            }
        }
        auto data = p.mutable_data();
        for (std::size_t k = 0; k < data.size(); ++k) {
            if (!g.empty()) {
                m[k] = cfg.beta1 * m[k] + (1.0f - cfg.beta1) * g[k];
                v[k] = cfg.beta2 * v[k] + (1.0f - cfg.beta2) * g[k] * g[k];
            }
            const double mhat = m[k] / c1;
            const double vhat = v[k] / c2;
            data[k] -= static_cast<float>(cfg.lr * mhat / (std::sqrt(vhat) + cfg.epsilon));
        }
    }
}

}  // namespace dgp
