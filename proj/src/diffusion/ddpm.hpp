#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "diffusion/epsilon_net.hpp"
#include "diffusion/schedule.hpp"
#include "imaging/image.hpp"
#include "numerics/adam.hpp"
#include "trace.hpp"

namespace dgp {

// [N,C,H,W] from same-sized images.
Tensor stack_images(const std::vector<const Image*>& images);

// One epsilon-prediction step: per-sample t ~ U{1..T}, eps ~ N(0, I),
// loss = mean (eps - net(q_sample(x0, t, eps), t))^2, then one Adam update.
float ddpm_train_step(EpsilonNet& net, const Tensor& batch, Rng& rng, const NoiseSchedule& schedule, Adam& opt);

struct DdpmTrainConfig {
    int steps = 2000;
    int batch_size = 16;
    float lr = 1e-3f;
    std::uint64_t seed = 0;
    // Exponential moving average of the weights, copied into the net when
    // training ends. 0 keeps the raw weights.
    float ema_decay = 0.998f;
};

using ProgressFn = std::function<void(int step, float loss)>;

// Returns the per-step loss history.
std::vector<float> train_ddpm(EpsilonNet& net, const std::vector<Image>& data, const NoiseSchedule& schedule,
                              const DdpmTrainConfig& cfg, const ProgressFn& progress = {});

// Standard reverse iteration t = T..1, posterior variance beta[t]; exactly T
// network evaluations; output clamped to [-1, 1].
Image ancestral_sample(const EpsilonNet& net, const NoiseSchedule& schedule, Rng& rng, int channels, int height,
                       int width, SampleTrace* trace = nullptr);

// Ancestral sampling with the known region re-projected from the forward
// process after every step; known pixels of the result are copied from `img`.
Image ddpm_inpaint_baseline(const EpsilonNet& net, const Image& img, const Mask& mask, const NoiseSchedule& schedule,
                            Rng& rng, SampleTrace* trace = nullptr);

}  // namespace dgp
