#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "diffusion/schedule.hpp"
#include "gan/networks.hpp"
#include "imaging/image.hpp"
#include "numerics/adam.hpp"

namespace dgp {

struct GanTrainConfig {
    float lr_g = 2e-4f;
    float lr_d = 2e-4f;
    float beta1 = 0.5f;
    float lambda_l1 = 100.0f;
    int batch_size = 16;
    int steps = 3000;
    std::uint64_t seed = 0;
    // Noise levels for generator inputs are drawn from 1..noise_t_max of the schedule.
    int noise_t_max = 50;
    // Fraction of examples conditioned on N(0, I) noise instead of the mask,
    // the conditioning the generator sees inside the denoising loop.
    float noise_cond_prob = 0.5f;
    // Mask-conditioned examples get N(0, s^2) added inside the hole, s ~ U(0, hole_noise_max).
    float hole_noise_max = 1.0f;
    // Share of batch slots (rounded down) filled from persistent
    // stabilized-loop chains driven by the generator being trained; the rest
    // are fresh corrupted images.
    float chain_fraction = 0.5f;
    // Loop length T the chains run before restarting from a new image.
    int loop_steps = 100;
    // Chance a chain slot is presented as the final call (clamped state,
    // mask conditioning) instead of a loop step.
    float chain_final_prob = 0.3f;

    void validate() const;
    int loop_chains() const { return static_cast<int>(static_cast<float>(batch_size) * chain_fraction); }
};

// One training minibatch after corruption.
struct GanBatch {
    Tensor clean;         // x0, [N,C,H,W]
    Tensor mask;          // [N,1,H,W]
    Tensor state;         // q_sample(apply_mask(x0, m), t, eps) / sqrt(alpha_bar[t])
    Tensor conditioning;  // mask replicated to C channels, or noise
};

GanBatch prepare_gan_batch(const Tensor& clean, Rng& rng, const GanTrainConfig& cfg, const NoiseSchedule& schedule);

struct GanLosses {
    float generator = 0.0f;
    float discriminator = 0.0f;
    float l1 = 0.0f;
};

// Mean binary cross-entropy of sigmoid(logits) against an all-real or
// all-fake target: softplus(-z) or softplus(z).
Tensor bce_with_logits(const Tensor& logits, bool target_real);

// Non-saturating BCE on logits; 0.5 * (real + fake) terms. Touches only d's parameters.
float discriminator_update(const Generator& g, Discriminator& d, const GanBatch& batch, Adam& opt_d);
// Adversarial term + lambda_l1 * L1(g_out, x0). Touches only g's parameters.
GanLosses generator_update(Generator& g, const Discriminator& d, const GanBatch& batch, const GanTrainConfig& cfg,
                           Adam& opt_g);

// Stabilized denoising loops advanced one step per training step, each on a
// training image and mask, so the generator learns from the states it
// produces itself.
class LoopChains {
public:
    LoopChains(const std::vector<Image>& data, const GanTrainConfig& cfg, Rng& rng);

    // Inputs for this step, one slot per chain. Draws the loop noise and which
    // slots act as the final call.
    GanBatch inputs(Rng& rng);
    // Moves loop-step slots toward the generator output for this step's inputs.
    void advance(const Tensor& generator_out);
    int size() const { return static_cast<int>(chains_.size()); }

private:
    struct Chain {
        const Image* clean = nullptr;
        Mask mask;
        std::vector<float> state, noise;
        int age = 0;
        bool final_call = false;
    };
    void restart(Chain& c, Rng& rng) const;

    const std::vector<Image>& data_;
    GanTrainConfig cfg_;
    std::vector<Chain> chains_;
    std::vector<float> last_input_;
};

GanBatch concat_batches(const GanBatch& a, const GanBatch& b);

// Discriminator step, then generator step, on one freshly corrupted batch.
GanLosses gan_train_step(Generator& g, Discriminator& d, const Tensor& clean, Rng& rng, const GanTrainConfig& cfg,
                         const NoiseSchedule& schedule, Adam& opt_g, Adam& opt_d);

// Mean L1(g_out, x0) on a corrupted batch, no parameter updates.
float generator_l1(const Generator& g, const GanBatch& batch);

using GanProgressFn = std::function<void(int step, const GanLosses&)>;

std::vector<GanLosses> train_gan(Generator& g, Discriminator& d, const std::vector<Image>& data,
                                 const NoiseSchedule& schedule, const GanTrainConfig& cfg,
                                 const GanProgressFn& progress = {});

}  // namespace dgp
