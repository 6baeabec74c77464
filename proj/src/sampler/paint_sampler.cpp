#include "sampler/paint_sampler.hpp"

#include <chrono>
#include <cmath>

#include "error.hpp"
#include "numerics/ops.hpp"

namespace dgp {

std::string to_string(SamplerMode m) { return m == SamplerMode::Verbatim ? "verbatim" : "stabilized"; }
std::string to_string(DriftModelKind k) { return k == DriftModelKind::Generator ? "generator" : "epsilon_net"; }

SamplerMode parse_sampler_mode(const std::string& s) {
    if (s == "verbatim") return SamplerMode::Verbatim;
    if (s == "stabilized") return SamplerMode::Stabilized;
    fail(ErrorCode::InvalidArgument, "unknown sampler mode '" + s + "' (expected verbatim or stabilized)");
}

DriftModelKind parse_drift_model(const std::string& s) {
    if (s == "generator") return DriftModelKind::Generator;
    if (s == "epsilon_net") return DriftModelKind::EpsilonNet;
    fail(ErrorCode::InvalidArgument, "unknown drift model '" + s + "' (expected generator or epsilon_net)");
}

Tensor GeneratorDrift::evaluate(const Tensor& state, const Tensor& noise, int, int) const {
    return g_.forward(state, noise);
}

int EpsilonNetDrift::level(int step, int total) const {
    const int steps = schedule_.steps();
    const long k = (static_cast<long>(steps) * (total - step + 1) + total - 1) / total;
    return static_cast<int>(std::clamp<long>(k, 1, steps));
}

Tensor EpsilonNetDrift::evaluate(const Tensor& state, const Tensor&, int step, int total) const {
    const int k = level(step, total);
    const Tensor eps_hat = net_.forward(state, {k}, schedule_);
    return scale(eps_hat, -std::sqrt(1.0f - schedule_.alpha_bar(k)));
}

DenoiseResult denoise_diffusion(const Tensor& x, const DriftModel& model, const SamplerConfig& cfg, Rng& rng) {
    if (cfg.timesteps < 0) fail(ErrorCode::InvalidArgument, "timesteps must be >= 0");
    if (model.kind() != cfg.drift_model) {
        fail(ErrorCode::InvalidArgument, "drift model is " + to_string(model.kind()) + " but config asks for " +
                                             to_string(cfg.drift_model));
    }
    const auto start = std::chrono::steady_clock::now();
    NoGradGuard no_grad;
    DenoiseResult result{x, {}};
    const int T = cfg.timesteps;
    if (T == 0) return result;

    const bool verbatim = cfg.mode == SamplerMode::Verbatim;
    const bool relax = !verbatim && model.kind() == DriftModelKind::Generator;
    const float sigma = verbatim ? std::sqrt(2.0f) : std::sqrt(2.0f / static_cast<float>(T));
    const float step_scale = std::sqrt(1.0f / static_cast<float>(T));

    const Tensor noise = randn(rng, x.shape());
    std::vector<float> state(x.data().begin(), x.data().end());
    for (int i = 1; i <= T; ++i) {
        const Tensor eps = randn(rng, x.shape());
        for (std::size_t k = 0; k < state.size(); ++k) state[k] += sigma * eps.data()[k];
        for (float v : state) {
            if (!std::isfinite(v)) fail(ErrorCode::Diverged, "diverged at step " + std::to_string(i));
        }
        Tensor out;
        try {
            out = model.evaluate(Tensor(x.shape(), state), noise, i, T);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Numeric) fail(ErrorCode::Diverged, "diverged at step " + std::to_string(i));
            throw;
        }
        if (model.kind() == DriftModelKind::Generator) result.trace.generator_evals += 1;
        else result.trace.epsnet_evals += 1;
        if (out.shape() != x.shape()) fail(ErrorCode::Shape, "drift model output shape differs from state");

        double sq = 0.0;
        for (std::size_t k = 0; k < state.size(); ++k) {
            const float drift = relax ? out.data()[k] - state[k] : out.data()[k];
            state[k] += drift * step_scale;
            if (!std::isfinite(state[k])) fail(ErrorCode::Diverged, "diverged at step " + std::to_string(i));
            sq += static_cast<double>(state[k]) * state[k];
        }
        result.trace.step_norms.push_back(std::sqrt(sq / static_cast<double>(state.size())));
    }
    result.state = Tensor(x.shape(), std::move(state));
    result.trace.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
}

InpaintResult diffganpaint_inpaint(const Image& input, const Mask& mask, const Generator& g, const DriftModel& loop_model,
                                   const SamplerConfig& cfg, Rng& rng) {
    require_same_dims(input, mask, "diffganpaint_inpaint");
    if (input.channels() != g.channels()) fail(ErrorCode::Shape, "diffganpaint_inpaint: image channels differ from generator");
    const auto start = std::chrono::steady_clock::now();
    const Image masked = apply_mask(input, mask);
    DenoiseResult denoised = denoise_diffusion(masked.to_tensor(), loop_model, cfg, rng);

    Tensor out;
    {
        NoGradGuard no_grad;
        out = generator_forward(g, Image::from_tensor_clamped(denoised.state).to_tensor(), mask.to_tensor());
    }
    denoised.trace.generator_evals += 1;
    denoised.trace.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return InpaintResult{composite(Image::from_tensor(out), masked, mask), std::move(denoised.trace)};
}

InpaintResult diffganpaint_inpaint(const Image& input, const Mask& mask, const Generator& g, const SamplerConfig& cfg,
                                   Rng& rng) {
    const GeneratorDrift drift(g);
    return diffganpaint_inpaint(input, mask, g, drift, cfg, rng);
}

}  // namespace dgp
