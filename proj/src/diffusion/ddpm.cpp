#include "diffusion/ddpm.hpp"

#include <chrono>
#include <cmath>

#include "error.hpp"
#include "numerics/ops.hpp"

namespace dgp {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// x_{t-1} from x_t and the predicted noise; adds sqrt(beta_t) z for t > 1.
Tensor reverse_step(const Tensor& x, const Tensor& eps_hat, int t, const NoiseSchedule& s, Rng& rng) {
    const float inv_sqrt_alpha = 1.0f / std::sqrt(s.alpha(t));
    const float coef = s.beta(t) / std::sqrt(1.0f - s.alpha_bar(t));
    std::vector<float> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = inv_sqrt_alpha * (x.data()[i] - coef * eps_hat.data()[i]);
    if (t > 1) {
        const Tensor z = randn(rng, x.shape());
        const float sigma = std::sqrt(s.beta(t));
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += sigma * z.data()[i];
    }
    return Tensor(x.shape(), std::move(out));
}

// x * mask + known * (1 - mask) on [1,C,H,W] tensors.
Tensor project_known(const Tensor& x, const Tensor& known, const Mask& mask) {
    const std::size_t plane = mask.size();
    std::vector<float> out(x.data().begin(), x.data().end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (mask.values()[i % plane] == 0.0f) out[i] = known.data()[i];
    }
    return Tensor(x.shape(), std::move(out));
}

}  // namespace

Tensor stack_images(const std::vector<const Image*>& images) {
    if (images.empty()) fail(ErrorCode::InvalidArgument, "empty batch");
    const Image& first = *images.front();
    std::vector<float> data;
    data.reserve(first.size() * images.size());
    for (const Image* img : images) {
        require_same_dims(first, *img, "stack_images");
        data.insert(data.end(), img->values().begin(), img->values().end());
    }
    return Tensor({static_cast<int>(images.size()), first.channels(), first.height(), first.width()}, std::move(data));
}

float ddpm_train_step(EpsilonNet& net, const Tensor& batch, Rng& rng, const NoiseSchedule& schedule, Adam& opt) {
    if (batch.rank() != 4) fail(ErrorCode::Shape, "ddpm_train_step: batch must be [N,C,H,W]");
    const int n = batch.dim(0);
    std::vector<int> t(n);
    for (auto& v : t) v = rng.uniform_int(1, schedule.steps());
    const Tensor eps = randn(rng, batch.shape());
    const Tensor xt = q_sample_batch(batch, t, eps, schedule);
    const Tensor pred = net.forward(xt, t, schedule);
    const Tensor loss = scale(sum_squares(sub(eps, pred)), 1.0f / static_cast<float>(eps.numel()));
    net.params().zero_grad();
    backward(loss);
    opt.step(net.params());
    return loss.item();
}

std::vector<float> train_ddpm(EpsilonNet& net, const std::vector<Image>& data, const NoiseSchedule& schedule,
                              const DdpmTrainConfig& cfg, const ProgressFn& progress) {
    if (data.empty()) fail(ErrorCode::InvalidArgument, "empty batch: no training images");
    if (cfg.batch_size < 1 || cfg.steps < 0) fail(ErrorCode::InvalidArgument, "invalid ddpm training budget");
    if (!(cfg.ema_decay >= 0.0f && cfg.ema_decay < 1.0f)) fail(ErrorCode::InvalidArgument, "ema_decay must be in [0, 1)");
    Adam opt(AdamConfig{.lr = cfg.lr});
    std::vector<std::vector<float>> ema;
    for (const auto& [name, p] : net.params()) ema.emplace_back(p.data().begin(), p.data().end());
    Rng root(cfg.seed);
    std::vector<float> history;
    history.reserve(cfg.steps);
    for (int step = 0; step < cfg.steps; ++step) {
        Rng rng = root.split(static_cast<std::uint64_t>(step));
        std::vector<const Image*> batch(cfg.batch_size);
        for (auto& p : batch) p = &data[rng.uniform_int(0, static_cast<int>(data.size()) - 1)];
        const float loss = ddpm_train_step(net, stack_images(batch), rng, schedule, opt);
        history.push_back(loss);
        std::size_t i = 0;
        for (const auto& [name, p] : net.params()) {
            auto& avg = ema[i++];
            for (std::size_t k = 0; k < avg.size(); ++k) avg[k] = cfg.ema_decay * avg[k] + (1.0f - cfg.ema_decay) * p.data()[k];
        }
        if (progress) progress(step, loss);
    }
    if (cfg.ema_decay > 0.0f && cfg.steps > 0) {
        std::size_t i = 0;
        for (auto& [name, p] : net.params()) {
            const auto& avg = ema[i++];
            std::copy(avg.begin(), avg.end(), p.mutable_data().begin());
        }
    }
    return history;
}

Image ancestral_sample(const EpsilonNet& net, const NoiseSchedule& schedule, Rng& rng, int channels, int height,
                       int width, SampleTrace* trace) {
    const auto start = Clock::now();
    NoGradGuard no_grad;
    Tensor x = randn(rng, {1, channels, height, width});
    for (int t = schedule.steps(); t >= 1; --t) {
        const Tensor eps_hat = net.forward(x, {t}, schedule);
        if (trace) trace->epsnet_evals += 1;
        x = reverse_step(x, eps_hat, t, schedule, rng);
    }
    if (trace) trace->wall_ms += elapsed_ms(start);
    return Image::from_tensor_clamped(x);
}

Image ddpm_inpaint_baseline(const EpsilonNet& net, const Image& img, const Mask& mask, const NoiseSchedule& schedule,
                            Rng& rng, SampleTrace* trace) {
    require_same_dims(img, mask, "ddpm_inpaint_baseline");
    const auto start = Clock::now();
    NoGradGuard no_grad;
    const Tensor x0 = img.to_tensor();
    const int steps = schedule.steps();
    Tensor x = randn(rng, x0.shape());
    x = project_known(x, q_sample(x0, steps, randn(rng, x0.shape()), schedule), mask);
    for (int t = steps; t >= 1; --t) {
        const Tensor eps_hat = net.forward(x, {t}, schedule);
        if (trace) trace->epsnet_evals += 1;
        x = reverse_step(x, eps_hat, t, schedule, rng);
        if (t > 1) x = project_known(x, q_sample(x0, t - 1, randn(rng, x0.shape()), schedule), mask);
    }
    if (trace) trace->wall_ms += elapsed_ms(start);
    return composite(Image::from_tensor_clamped(x), img, mask);
}

}  // namespace dgp
