#include "gan/networks.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "numerics/ops.hpp"

namespace dgp {

namespace {
constexpr float kSlope = 0.2f;
constexpr float kSkipLimit = 0.995f;

// atanh of the clamped state, added before the output tanh so an untrained
// correction leaves the state (nearly) unchanged. Constant: no gradient flows
// back into the state through this path.
Tensor input_skip(const Tensor& state) {
    std::vector<float> v(state.data().begin(), state.data().end());
    for (float& x : v) x = std::atanh(std::clamp(x, -kSkipLimit, kSkipLimit));
    return Tensor(state.shape(), std::move(v));
}

Tensor as_batch(const Tensor& t) {
    if (t.rank() == 4) return t;
    if (t.rank() == 3) return Tensor({1, t.dim(0), t.dim(1), t.dim(2)}, {t.data().begin(), t.data().end()});
    fail(ErrorCode::Shape, "expected [C,H,W] or [N,C,H,W], got " + shape_str(t.shape()));
}
}  // namespace

Generator::Generator(int channels, std::uint64_t seed) : channels_(channels) {
    Rng rng(seed);
    enc1_ = Conv2d(params_, "enc1", 2 * channels, 32, 3, 1, 1, rng);
    enc2_ = Conv2d(params_, "enc2", 32, 64, 3, 2, 1, rng);
    mid_ = Conv2d(params_, "mid", 64, 64, 3, 2, 1, rng);
    dec_ = Conv2d(params_, "dec", 64, 32, 3, 1, 1, rng);
    out_ = Conv2d(params_, "out", 32, channels, 3, 1, 1, rng);
}

Tensor Generator::forward(const Tensor& state, const Tensor& conditioning) const {
    if (state.rank() != 4 || state.dim(1) != channels_) {
        fail(ErrorCode::Shape, "generator: state must be [N," + std::to_string(channels_) + ",H,W], got " +
                                   shape_str(state.shape()));
    }
    if (conditioning.rank() != 4 || conditioning.dim(0) != state.dim(0) || conditioning.dim(2) != state.dim(2) ||
        conditioning.dim(3) != state.dim(3)) {
        fail(ErrorCode::Shape, "generator: conditioning " + shape_str(conditioning.shape()) +
                                   " does not match state " + shape_str(state.shape()));
    }
    if (state.dim(2) % 4 != 0 || state.dim(3) % 4 != 0) {
        fail(ErrorCode::Shape, "generator: H and W must be multiples of 4");
    }
    Tensor cond = conditioning;
    if (cond.dim(1) == 1 && channels_ != 1) cond = broadcast_channels(cond, channels_);
    if (cond.dim(1) != channels_) {
        fail(ErrorCode::Shape, "generator: conditioning must have 1 or " + std::to_string(channels_) + " channels");
    }
    evals_.increment(static_cast<std::uint64_t>(state.dim(0)));

    const Tensor h1 = leaky_relu(enc1_(concat_channels(state, cond)), kSlope);
    const Tensor h2 = leaky_relu(enc2_(h1), kSlope);
    const Tensor h3 = leaky_relu(mid_(h2), kSlope);
    // Holes can be wider than the receptive field; the plane means carry
    // image-wide context (colors, gradient) into every position.
    const Tensor g3 = add_spatial(h3, spatial_mean(h3));
    const Tensor d = leaky_relu(dec_(add(upsample_nearest(g3, 2), h2)), kSlope);
    return tanh(add(out_(add(upsample_nearest(d, 2), h1)), input_skip(state)));
}

Tensor generator_forward(const Generator& g, const Tensor& state, const Tensor& conditioning) {
    return g.forward(as_batch(state), as_batch(conditioning));
}

Discriminator::Discriminator(int channels, std::uint64_t seed) : channels_(channels) {
    Rng rng(seed);
    c1_ = Conv2d(params_, "c1", channels + 1, 32, 3, 2, 1, rng);
    c2_ = Conv2d(params_, "c2", 32, 64, 3, 2, 1, rng);
    head_ = Conv2d(params_, "head", 64, 1, 1, 1, 0, rng);
}

Tensor Discriminator::forward(const Tensor& image, const Tensor& mask) const {
    if (image.rank() != 4 || image.dim(1) != channels_) {
        fail(ErrorCode::Shape, "discriminator: image must be [N," + std::to_string(channels_) + ",H,W]");
    }
    const Tensor h1 = leaky_relu(c1_(concat_channels(image, mask)), kSlope);
    const Tensor h2 = leaky_relu(c2_(h1), kSlope);
    return head_(spatial_mean(h2));
}

}  // namespace dgp
