#pragma once

#include <vector>

#include "diffusion/schedule.hpp"
#include "numerics/eval_counter.hpp"
#include "numerics/params.hpp"

namespace dgp {

// Noise predictor: conv encoder-decoder 16-32-64-32-16 with additive skips
// and the bottleneck's plane means added back as global context.
// Input is the image plus a constant plane t/T; output has the image's
// channel count. H and W must be divisible by 4.
//
// The convolutional body F is preconditioned per timestep: it sees
// c_in * x_t / sqrt(ab) and the result is eps_hat = a * x_t - b * F, which is
// the noise implied by a denoiser c_skip * x~ + c_out * F with a fixed data
// scale. F's regression target then has unit scale at every t instead of
// needing a gain near 1/sqrt(1 - ab) for small t.
class EpsilonNet {
public:
    static constexpr const char* kKind = "epsilon_net";

    EpsilonNet(int channels, std::uint64_t seed);

    // x: [N,C,H,W], one timestep per sample.
    Tensor forward(const Tensor& x, const std::vector<int>& t, const NoiseSchedule& schedule) const;

    int channels() const { return channels_; }
    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }
    std::uint64_t evaluations() const { return evals_.value(); }

private:
    int channels_;
    ParamSet params_;
    Conv2d enc1_, enc2_, enc3_, dec2_, dec1_, out_;
    EvalCounter evals_;
};

}  // namespace dgp
