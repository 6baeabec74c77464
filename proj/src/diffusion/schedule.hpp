#pragma once

#include <vector>

#include "numerics/tensor.hpp"

namespace dgp {

// Per-step coefficients, indexed 1..T.
class NoiseSchedule {
public:
    NoiseSchedule() = default;
    explicit NoiseSchedule(std::vector<float> betas);

    int steps() const { return static_cast<int>(beta_.size()); }
    float beta(int t) const { return beta_[index(t)]; }
    float alpha(int t) const { return alpha_[index(t)]; }
    float alpha_bar(int t) const { return alpha_bar_[index(t)]; }
    const std::vector<float>& betas() const { return beta_; }

private:
    std::size_t index(int t) const;

    std::vector<float> beta_, alpha_, alpha_bar_;
};

NoiseSchedule make_linear_schedule(int steps, float beta_start, float beta_end);

// sqrt(alpha_bar[t]) * x0 + sqrt(1 - alpha_bar[t]) * eps
Tensor q_sample(const Tensor& x0, int t, const Tensor& eps, const NoiseSchedule& schedule);
// Per-sample levels for a batch [N,...]; t.size() == N.
Tensor q_sample_batch(const Tensor& x0, const std::vector<int>& t, const Tensor& eps, const NoiseSchedule& schedule);

}  // namespace dgp
