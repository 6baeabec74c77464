#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diffusion/ddpm.hpp"
#include "gan/train.hpp"
#include "imaging/masks.hpp"
#include "imaging/toyshapes.hpp"
#include "sampler/paint_sampler.hpp"

namespace dgp {

// Every tunable of the command-line workflows. Text form is UTF-8 lines of
// `key = value`; `#` starts a comment; unknown keys are rejected.
struct RunConfig {
    std::uint64_t seed = 0;

    int image_size = 32;
    std::string palette = "rgb";
    int train_count = 1000;
    int test_count = 200;
    int min_shapes = 1;
    int max_shapes = 3;

    int ddpm_steps = 200;
    float beta_start = 5e-4f;
    float beta_end = 0.1f;

    int ddpm_train_steps = 10000;
    int ddpm_batch = 16;
    float ddpm_lr = 1e-3f;
    float ddpm_ema_decay = 0.998f;

    int gan_train_steps = 3000;
    int gan_batch = 16;
    float lr_g = 1e-3f;
    float lr_d = 2e-4f;
    float gan_beta1 = 0.5f;
    float lambda_l1 = 100.0f;
    int gan_noise_t_max = 40;
    float gan_noise_cond_prob = 0.5f;
    float gan_hole_noise_max = 1.0f;
    float gan_chain_fraction = 0.5f;
    float gan_chain_final_prob = 0.3f;

    int timesteps = 100;
    std::string mode = "stabilized";
    std::string drift_model = "generator";

    std::string eval_families = "box,stroke,half,bernoulli";
    std::string eval_methods = "diffganpaint,ddpm_baseline,mean_fill";
    bool record_wall_time = false;
    int threads = 1;

    bool operator==(const RunConfig&) const = default;

    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;
    static const std::vector<std::string>& keys();
    void validate() const;

    DatasetSpec train_spec() const;
    DatasetSpec test_spec() const;
    NoiseSchedule schedule() const;
    DdpmTrainConfig ddpm_train_config() const;
    GanTrainConfig gan_train_config() const;
    SamplerConfig sampler_config() const;
    std::vector<MaskFamily> families() const;
    std::vector<std::string> methods() const;
    std::uint64_t derived_seed(const char* purpose) const;
};

RunConfig parse_config(const std::string& text);
std::string serialize_config(const RunConfig& cfg);
RunConfig load_config(const std::string& path);
void save_config(const RunConfig& cfg, const std::string& path);

std::string format_number(double v);
std::string format_number(float v);

}  // namespace dgp
