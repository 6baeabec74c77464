#pragma once

#include "numerics/eval_counter.hpp"
#include "numerics/params.hpp"

namespace dgp {

// Conditional generator: concat(state, conditioning) with 2C channels in,
// C channels out through tanh. Encoder-decoder 2C-32-64-64-32-C down to
// quarter resolution, additive skips at half and full resolution, and the
// bottleneck's plane means added back as global context. H and W must be
// multiples of 4.
class Generator {
public:
    static constexpr const char* kKind = "generator";

    Generator(int channels, std::uint64_t seed);

    // state: [N,C,H,W]; conditioning: [N,C,H,W] or [N,1,H,W] (replicated).
    Tensor forward(const Tensor& state, const Tensor& conditioning) const;

    int channels() const { return channels_; }
    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }
    std::uint64_t evaluations() const { return evals_.value(); }

private:
    int channels_;
    ParamSet params_;
    Conv2d enc1_, enc2_, mid_, dec_, out_;
    EvalCounter evals_;
};

// Single-image convenience form: [C,H,W] or [1,C,H,W] inputs, [1,C,H,W] out.
Tensor generator_forward(const Generator& g, const Tensor& state, const Tensor& conditioning);

// concat(image, mask) -> stride-2 convs (C+1 -> 32 -> 64) -> spatial mean ->
// linear head; one logit per sample, shape [N,1,1,1].
class Discriminator {
public:
    static constexpr const char* kKind = "discriminator";

    Discriminator(int channels, std::uint64_t seed);

    Tensor forward(const Tensor& image, const Tensor& mask) const;

    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }

private:
    int channels_;
    ParamSet params_;
    Conv2d c1_, c2_, head_;
};

}  // namespace dgp
