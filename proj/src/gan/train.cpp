#include "gan/train.hpp"

#include <algorithm>
#include <cmath>

#include "diffusion/ddpm.hpp"
#include "error.hpp"
#include "imaging/masks.hpp"
#include "numerics/ops.hpp"

namespace dgp {

void GanTrainConfig::validate() const {
    if (!(lr_g > 0 && lr_d > 0 && lambda_l1 >= 0 && batch_size > 0 && steps >= 0 && noise_t_max > 0)) {
        fail(ErrorCode::InvalidArgument, "invalid GAN training configuration");
    }
    if (!(noise_cond_prob >= 0.0f && noise_cond_prob <= 1.0f)) {
        fail(ErrorCode::InvalidArgument, "noise_cond_prob must be in [0, 1]");
    }
    if (!(hole_noise_max >= 0.0f)) fail(ErrorCode::InvalidArgument, "hole_noise_max must be >= 0");
    if (!(chain_fraction >= 0.0f && chain_fraction < 1.0f)) fail(ErrorCode::InvalidArgument, "chain_fraction must be in [0, 1)");
    if (loop_steps < 1) fail(ErrorCode::InvalidArgument, "loop_steps must be >= 1");
    if (!(chain_final_prob >= 0.0f && chain_final_prob <= 1.0f)) {
        fail(ErrorCode::InvalidArgument, "chain_final_prob must be in [0, 1]");
    }
}

GanBatch prepare_gan_batch(const Tensor& clean, Rng& rng, const GanTrainConfig& cfg, const NoiseSchedule& schedule) {
    if (clean.rank() != 4) fail(ErrorCode::InvalidArgument, "empty batch or wrong rank: expected [N,C,H,W]");
    const int n = clean.dim(0), c = clean.dim(1), h = clean.dim(2), w = clean.dim(3);
    const std::size_t per = static_cast<std::size_t>(c) * h * w;
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const int t_max = std::min(cfg.noise_t_max, schedule.steps());
    const auto& families = all_mask_families();

    std::vector<float> masked(clean.numel()), masks(static_cast<std::size_t>(n) * plane), cond(clean.numel());
    std::vector<int> levels(n);
    std::vector<float> hole_std(n, 0.0f);
    for (int i = 0; i < n; ++i) {
        const auto family = families[rng.uniform_int(0, static_cast<int>(families.size()) - 1)];
        const Mask m = gen_mask(family, rng, h, w);
        std::copy(m.values().begin(), m.values().end(), masks.begin() + i * plane);
        const Image img(c, h, w, {clean.data().begin() + i * per, clean.data().begin() + (i + 1) * per});
        const Image corrupted = apply_mask(img, m);
        std::copy(corrupted.values().begin(), corrupted.values().end(), masked.begin() + i * per);
        levels[i] = rng.uniform_int(1, t_max);
        if (rng.bernoulli(cfg.noise_cond_prob)) {
            rng.fill_normal(cond.data() + i * per, per);
        } else {
            for (int ch = 0; ch < c; ++ch) std::copy(m.values().begin(), m.values().end(), cond.begin() + i * per + ch * plane);
            hole_std[i] = static_cast<float>(rng.uniform(0.0, cfg.hole_noise_max));
        }
    }
    const Tensor masked_t(clean.shape(), std::move(masked));
    const Tensor eps = randn(rng, clean.shape());
    // The sampling loop never shrinks the signal, so undo the forward
    // process's sqrt(alpha_bar) factor. Otherwise the generator learns a gain
    // above 1 that compounds across loop steps into saturated colors.
    const Tensor noisy = q_sample_batch(masked_t, levels, eps, schedule);
    std::vector<float> state(noisy.data().begin(), noisy.data().end());
    for (int i = 0; i < n; ++i) {
        const float gain = 1.0f / std::sqrt(schedule.alpha_bar(levels[i]));
        for (std::size_t k = 0; k < per; ++k) state[i * per + k] *= gain;
        if (hole_std[i] == 0.0f) continue;
        // Mask-conditioned calls come at the end of the loop, where the hole
        // holds leftover noise rather than zeros.
        std::vector<float> junk(per);
        rng.fill_normal(junk.data(), per);
        const float* m = masks.data() + i * plane;
        for (int ch = 0; ch < c; ++ch) {
            for (std::size_t k = 0; k < plane; ++k) {
                if (m[k] != 0.0f) state[i * per + ch * plane + k] += hole_std[i] * junk[ch * plane + k];
            }
        }
    }
    return GanBatch{clean, Tensor({n, 1, h, w}, std::move(masks)), Tensor(clean.shape(), std::move(state)),
                    Tensor(clean.shape(), std::move(cond))};
}

LoopChains::LoopChains(const std::vector<Image>& data, const GanTrainConfig& cfg, Rng& rng)
    : data_(data), cfg_(cfg), chains_(static_cast<std::size_t>(cfg.loop_chains())) {
    if (data.empty()) fail(ErrorCode::InvalidArgument, "empty batch: no training images");
    for (std::size_t i = 0; i < chains_.size(); ++i) {
        restart(chains_[i], rng);
        // Staggered so restarts spread over the run.
        chains_[i].age = static_cast<int>(i * cfg.loop_steps / chains_.size());
    }
}

void LoopChains::restart(Chain& c, Rng& rng) const {
    c.clean = &data_[rng.uniform_int(0, static_cast<int>(data_.size()) - 1)];
    const auto& families = all_mask_families();
    c.mask = gen_mask(families[rng.uniform_int(0, static_cast<int>(families.size()) - 1)], rng, c.clean->height(),
                      c.clean->width());
    const Image masked = apply_mask(*c.clean, c.mask);
    c.state.assign(masked.values().begin(), masked.values().end());
    c.noise.resize(c.state.size());
    rng.fill_normal(c.noise.data(), c.noise.size());
    c.age = 0;
}

GanBatch LoopChains::inputs(Rng& rng) {
    const int n = size();
    const Image& first = *chains_.front().clean;
    const int c = first.channels(), h = first.height(), w = first.width();
    const std::size_t per = static_cast<std::size_t>(c) * h * w, plane = static_cast<std::size_t>(h) * w;
    const float sigma = std::sqrt(2.0f / static_cast<float>(cfg_.loop_steps));
    std::vector<float> clean(n * per), masks(n * plane), input(n * per), cond(n * per), eps(per);
    for (int i = 0; i < n; ++i) {
        Chain& ch = chains_[i];
        if (ch.age >= cfg_.loop_steps) restart(ch, rng);
        ch.final_call = rng.bernoulli(cfg_.chain_final_prob);
        rng.fill_normal(eps.data(), per);
        const auto& m = ch.mask.values();
        for (std::size_t k = 0; k < per; ++k) {
            input[i * per + k] = ch.final_call ? std::clamp(ch.state[k], -1.0f, 1.0f) : ch.state[k] + sigma * eps[k];
            cond[i * per + k] = ch.final_call ? m[k % plane] : ch.noise[k];
        }
        std::copy(ch.clean->values().begin(), ch.clean->values().end(), clean.begin() + i * per);
        std::copy(m.begin(), m.end(), masks.begin() + i * plane);
    }
    last_input_ = input;
    return GanBatch{Tensor({n, c, h, w}, std::move(clean)), Tensor({n, 1, h, w}, std::move(masks)),
                    Tensor({n, c, h, w}, std::move(input)), Tensor({n, c, h, w}, std::move(cond))};
}

void LoopChains::advance(const Tensor& generator_out) {
    const std::size_t per = chains_.empty() ? 0 : chains_.front().state.size();
    if (generator_out.numel() != chains_.size() * per) fail(ErrorCode::Shape, "loop chains: output size mismatch");
    const float step = std::sqrt(1.0f / static_cast<float>(cfg_.loop_steps));
    for (std::size_t i = 0; i < chains_.size(); ++i) {
        Chain& ch = chains_[i];
        if (ch.final_call) continue;
        for (std::size_t k = 0; k < per; ++k) {
            const float x = last_input_[i * per + k];
            ch.state[k] = x + (generator_out.data()[i * per + k] - x) * step;
        }
        ++ch.age;
    }
}

GanBatch concat_batches(const GanBatch& a, const GanBatch& b) {
    auto cat = [](const Tensor& x, const Tensor& y) {
        Shape s = x.shape();
        s[0] += y.dim(0);
        std::vector<float> v(x.data().begin(), x.data().end());
        v.insert(v.end(), y.data().begin(), y.data().end());
        return Tensor(s, std::move(v));
    };
    return GanBatch{cat(a.clean, b.clean), cat(a.mask, b.mask), cat(a.state, b.state),
                    cat(a.conditioning, b.conditioning)};
}

Tensor bce_with_logits(const Tensor& logits, bool target_real) {
    return mean(softplus(target_real ? scale(logits, -1.0f) : logits));
}

float discriminator_update(const Generator& g, Discriminator& d, const GanBatch& batch, Adam& opt_d) {
    Tensor fake;
    {
        NoGradGuard no_grad;
        fake = g.forward(batch.state, batch.conditioning);
    }
    const Tensor real_term = bce_with_logits(d.forward(batch.clean, batch.mask), true);
    const Tensor fake_term = bce_with_logits(d.forward(fake, batch.mask), false);
    const Tensor loss = scale(add(real_term, fake_term), 0.5f);
    d.params().zero_grad();
    backward(loss);
    opt_d.step(d.params());
    return loss.item();
}

GanLosses generator_update(Generator& g, const Discriminator& d, const GanBatch& batch, const GanTrainConfig& cfg,
                           Adam& opt_g) {
    const Tensor fake = g.forward(batch.state, batch.conditioning);
    const Tensor adv = bce_with_logits(d.forward(fake, batch.mask), true);
    const Tensor l1 = mean(abs(sub(fake, batch.clean)));
    const Tensor loss = add(adv, scale(l1, cfg.lambda_l1));
    g.params().zero_grad();
    backward(loss);
    opt_g.step(g.params());
    return GanLosses{loss.item(), 0.0f, l1.item()};
}

GanLosses gan_train_step(Generator& g, Discriminator& d, const Tensor& clean, Rng& rng, const GanTrainConfig& cfg,
                         const NoiseSchedule& schedule, Adam& opt_g, Adam& opt_d) {
    const GanBatch batch = prepare_gan_batch(clean, rng, cfg, schedule);
    const float loss_d = discriminator_update(g, d, batch, opt_d);
    GanLosses losses = generator_update(g, d, batch, cfg, opt_g);
    losses.discriminator = loss_d;
    return losses;
}

float generator_l1(const Generator& g, const GanBatch& batch) {
    NoGradGuard no_grad;
    return mean(abs(sub(g.forward(batch.state, batch.conditioning), batch.clean))).item();
}

std::vector<GanLosses> train_gan(Generator& g, Discriminator& d, const std::vector<Image>& data,
                                 const NoiseSchedule& schedule, const GanTrainConfig& cfg,
                                 const GanProgressFn& progress) {
    cfg.validate();
    if (data.empty()) fail(ErrorCode::InvalidArgument, "empty batch: no training images");
    Adam opt_g(AdamConfig{.lr = cfg.lr_g, .beta1 = cfg.beta1});
    Adam opt_d(AdamConfig{.lr = cfg.lr_d, .beta1 = cfg.beta1});
    Rng root(cfg.seed);
    Rng chain_rng = root.split("chains");
    LoopChains chains(data, cfg, chain_rng);
    const int fresh = cfg.batch_size - cfg.loop_chains();
    std::vector<GanLosses> history;
    history.reserve(cfg.steps);
    for (int step = 0; step < cfg.steps; ++step) {
        Rng rng = root.split(static_cast<std::uint64_t>(step));
        std::vector<const Image*> batch(fresh);
        for (auto& p : batch) p = &data[rng.uniform_int(0, static_cast<int>(data.size()) - 1)];
        GanBatch b = prepare_gan_batch(stack_images(batch), rng, cfg, schedule);
        GanBatch chain_batch;
        if (chains.size() > 0) {
            chain_batch = chains.inputs(rng);
            b = concat_batches(b, chain_batch);
        }
        const float loss_d = discriminator_update(g, d, b, opt_d);
        GanLosses losses = generator_update(g, d, b, cfg, opt_g);
        losses.discriminator = loss_d;
        if (chains.size() > 0) {
            NoGradGuard no_grad;
            chains.advance(g.forward(chain_batch.state, chain_batch.conditioning));
        }
        history.push_back(losses);
        if (progress) progress(step, history.back());
    }
    return history;
}

}  // namespace dgp
