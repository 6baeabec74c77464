#include "diffusion/schedule.hpp"

#include <cmath>
#include <string>

#include "error.hpp"

namespace dgp {

NoiseSchedule::NoiseSchedule(std::vector<float> betas) : beta_(std::move(betas)) {
    if (beta_.empty()) fail(ErrorCode::InvalidArgument, "noise schedule needs at least one step");
    double running = 1.0;
    for (float b : beta_) {
        if (!(b > 0.0f && b < 1.0f)) fail(ErrorCode::InvalidArgument, "beta values must lie in (0, 1)");
        alpha_.push_back(1.0f - b);
        running *= 1.0 - static_cast<double>(b);
        alpha_bar_.push_back(static_cast<float>(running));
    }
}

std::size_t NoiseSchedule::index(int t) const {
    if (t < 1 || t > steps()) {
        fail(ErrorCode::InvalidArgument, "timestep " + std::to_string(t) + " out of range [1, " +
                                             std::to_string(steps()) + "]");
    }
    return static_cast<std::size_t>(t - 1);
}

NoiseSchedule make_linear_schedule(int steps, float beta_start, float beta_end) {
    if (steps < 1) fail(ErrorCode::InvalidArgument, "schedule step count must be >= 1");
    if (!(beta_start > 0.0f && beta_start <= beta_end && beta_end < 1.0f)) {
        fail(ErrorCode::InvalidArgument, "need 0 < beta_start <= beta_end < 1");
    }
    std::vector<float> betas(steps);
    for (int i = 0; i < steps; ++i) {
        const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
        betas[i] = static_cast<float>(beta_start + (static_cast<double>(beta_end) - beta_start) * frac);
    }
    return NoiseSchedule(std::move(betas));
}

Tensor q_sample(const Tensor& x0, int t, const Tensor& eps, const NoiseSchedule& schedule) {
    std::vector<int> levels(x0.rank() == 4 ? x0.dim(0) : 1, t);
    if (x0.rank() != 4) {
        // Treat any non-batched tensor as a single sample.
        if (x0.shape() != eps.shape()) fail(ErrorCode::Shape, "q_sample: eps shape differs from x0");
        const float a = std::sqrt(schedule.alpha_bar(t));
        const float s = std::sqrt(1.0f - schedule.alpha_bar(t));
        std::vector<float> out(x0.numel());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x0.data()[i] + s * eps.data()[i];
        return Tensor(x0.shape(), std::move(out));
    }
    return q_sample_batch(x0, levels, eps, schedule);
}

Tensor q_sample_batch(const Tensor& x0, const std::vector<int>& t, const Tensor& eps, const NoiseSchedule& schedule) {
    if (x0.shape() != eps.shape()) fail(ErrorCode::Shape, "q_sample: eps shape differs from x0");
    if (x0.rank() < 1 || static_cast<std::size_t>(x0.dim(0)) != t.size()) {
        fail(ErrorCode::Shape, "q_sample: one timestep per batch entry required");
    }
    const std::size_t per = x0.numel() / t.size();
    std::vector<float> out(x0.numel());
    for (std::size_t n = 0; n < t.size(); ++n) {
        const float a = std::sqrt(schedule.alpha_bar(t[n]));
        const float s = std::sqrt(1.0f - schedule.alpha_bar(t[n]));
        for (std::size_t i = n * per; i < (n + 1) * per; ++i) out[i] = a * x0.data()[i] + s * eps.data()[i];
    }
    return Tensor(x0.shape(), std::move(out));
}

}  // namespace dgp
