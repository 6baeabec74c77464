#pragma once

#include <cstdint>
#include <string>

#include "diffusion/epsilon_net.hpp"
#include "diffusion/schedule.hpp"
#include "gan/networks.hpp"
#include "imaging/image.hpp"
#include "numerics/rng.hpp"
#include "trace.hpp"

namespace dgp {

enum class SamplerMode { Verbatim, Stabilized };
enum class DriftModelKind { Generator, EpsilonNet };

std::string to_string(SamplerMode m);
std::string to_string(DriftModelKind k);
SamplerMode parse_sampler_mode(const std::string& s);
DriftModelKind parse_drift_model(const std::string& s);

struct SamplerConfig {
    int timesteps = 100;
    SamplerMode mode = SamplerMode::Stabilized;
    DriftModelKind drift_model = DriftModelKind::Generator;
    std::uint64_t seed = 0;
};

// The network evaluated inside the denoising loop.
class DriftModel {
public:
    virtual ~DriftModel() = default;
    virtual DriftModelKind kind() const = 0;
    // `step` runs 1..total; `noise` is the conditioning drawn once per call.
    virtual Tensor evaluate(const Tensor& state, const Tensor& noise, int step, int total) const = 0;
};

// out = G(concat(state, noise)).
class GeneratorDrift final : public DriftModel {
public:
    explicit GeneratorDrift(const Generator& g) : g_(g) {}
    DriftModelKind kind() const override { return DriftModelKind::Generator; }
    Tensor evaluate(const Tensor& state, const Tensor& noise, int step, int total) const override;

private:
    const Generator& g_;
};

// out = -eps_hat * sqrt(1 - alpha_bar[k]), with schedule level k walking from
// T_schedule down to 1 over the loop. Used directly as the drift.
class EpsilonNetDrift final : public DriftModel {
public:
    EpsilonNetDrift(const EpsilonNet& net, const NoiseSchedule& schedule) : net_(net), schedule_(schedule) {}
    DriftModelKind kind() const override { return DriftModelKind::EpsilonNet; }
    Tensor evaluate(const Tensor& state, const Tensor& noise, int step, int total) const override;
    int level(int step, int total) const;

private:
    const EpsilonNet& net_;
    const NoiseSchedule& schedule_;
};

struct DenoiseResult {
    Tensor state;  // un-clamped
    SampleTrace trace;
};

// Draws conditioning noise n0 once, then for i = 1..T:
//   x += sigma * eps;  out = model(x, n0);  x += drift(out) * sqrt(1/T)
// verbatim:   sigma = sqrt(2),   drift(out) = out
// stabilized: sigma = sqrt(2/T), drift(out) = out - x   (generator wiring)
// The epsilon-net wiring uses drift(out) = out in both modes.
DenoiseResult denoise_diffusion(const Tensor& x, const DriftModel& model, const SamplerConfig& cfg, Rng& rng);

struct InpaintResult {
    Image image;
    SampleTrace trace;
};

// masked = input * (1 - mask); denoised = loop(masked); out = G(clamp(denoised), mask);
// result = out * mask + masked * (1 - mask).
InpaintResult diffganpaint_inpaint(const Image& input, const Mask& mask, const Generator& g, const DriftModel& loop_model,
                                   const SamplerConfig& cfg, Rng& rng);
InpaintResult diffganpaint_inpaint(const Image& input, const Mask& mask, const Generator& g, const SamplerConfig& cfg,
                                   Rng& rng);

}  // namespace dgp
