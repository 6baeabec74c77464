#include "diffusion/epsilon_net.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "numerics/ops.hpp"

namespace dgp {

namespace {
constexpr float kSlope = 0.2f;
// Rough pixel standard deviation of [-1,1] images.
constexpr double kDataStd = 0.5;
}

EpsilonNet::EpsilonNet(int channels, std::uint64_t seed) : channels_(channels) {
    Rng rng(seed);
    enc1_ = Conv2d(params_, "enc1", channels + 1, 16, 3, 1, 1, rng);
    enc2_ = Conv2d(params_, "enc2", 16, 32, 3, 2, 1, rng);
    enc3_ = Conv2d(params_, "enc3", 32, 64, 3, 2, 1, rng);
    dec2_ = Conv2d(params_, "dec2", 64, 32, 3, 1, 1, rng);
    dec1_ = Conv2d(params_, "dec1", 32, 16, 3, 1, 1, rng);
    out_ = Conv2d(params_, "out", 16, channels, 3, 1, 1, rng);
}

Tensor EpsilonNet::forward(const Tensor& x, const std::vector<int>& t, const NoiseSchedule& schedule) const {
    if (x.rank() != 4 || x.dim(1) != channels_) {
        fail(ErrorCode::Shape, "epsilon net: expected [N," + std::to_string(channels_) + ",H,W], got " +
                                   shape_str(x.shape()));
    }
    if (x.dim(2) % 4 != 0 || x.dim(3) % 4 != 0) fail(ErrorCode::Shape, "epsilon net: H and W must be multiples of 4");
    if (t.size() != static_cast<std::size_t>(x.dim(0))) fail(ErrorCode::Shape, "epsilon net: one timestep per sample");
    evals_.increment(t.size());

    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const std::size_t per = plane * static_cast<std::size_t>(channels_);
    const float total = static_cast<float>(schedule.steps());
    std::vector<float> tp(static_cast<std::size_t>(n) * plane), scaled(x.numel()), skip(x.numel()), gain(x.numel());
    for (int i = 0; i < n; ++i) {
        const double ab = schedule.alpha_bar(t[i]);
        const double s = std::sqrt(ab);
        const double sigma = std::sqrt((1.0 - ab) / ab);
        const double var = sigma * sigma + kDataStd * kDataStd;
        const float c_in = static_cast<float>(1.0 / (std::sqrt(var) * s));
        const float a = static_cast<float>(sigma / (var * s));
        const float b = static_cast<float>(kDataStd / std::sqrt(var));
        std::fill_n(tp.begin() + i * plane, plane, static_cast<float>(t[i]) / total);
        for (std::size_t k = i * per; k < (i + 1) * per; ++k) {
            scaled[k] = c_in * x.data()[k];
            skip[k] = a * x.data()[k];
            gain[k] = b;
        }
    }
    const Tensor input = concat_channels(Tensor(x.shape(), std::move(scaled)), Tensor({n, 1, h, w}, std::move(tp)));

    const Tensor h1 = leaky_relu(enc1_(input), kSlope);
    const Tensor h2 = leaky_relu(enc2_(h1), kSlope);
    const Tensor h3 = leaky_relu(enc3_(h2), kSlope);
    // Plane means give every position the image-wide context (background
    // colors) that the convolutions alone cannot reach.
    const Tensor g3 = add_spatial(h3, spatial_mean(h3));
    const Tensor d2 = add(leaky_relu(dec2_(upsample_nearest(g3, 2)), kSlope), h2);
    const Tensor d1 = add(leaky_relu(dec1_(upsample_nearest(d2, 2)), kSlope), h1);
    return sub(Tensor(x.shape(), std::move(skip)), mul(out_(d1), Tensor(x.shape(), std::move(gain))));
}

}  // namespace dgp
