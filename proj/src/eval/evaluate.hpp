#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "diffusion/ddpm.hpp"
#include "eval/config.hpp"
#include "gan/networks.hpp"

namespace dgp {

struct EvalRow {
    int sample_id = 0;
    std::string mask_family;
    std::string method;
    double masked_mse = 0.0;
    double psnr = 0.0;
    std::uint64_t generator_evals = 0;
    std::uint64_t epsnet_evals = 0;
    double wall_ms = 0.0;
};

extern const char* const kReportHeader;

struct EvalReport {
    std::vector<EvalRow> rows;

    std::string to_csv() const;
    // Fraction of samples of `family` where `method` has lower masked MSE
    // than mean_fill. Requires mean_fill rows.
    double win_rate_vs_mean_fill(const std::string& method, const std::string& family) const;
    double mean_masked_mse(const std::string& method, const std::string& family) const;
};

struct EvalModels {
    const Generator* generator = nullptr;
    const EpsilonNet* epsilon_net = nullptr;
    const NoiseSchedule* schedule = nullptr;
};

using EvalProgressFn = std::function<void(int done, int total)>;

// Sweeps families x methods over `test_images`. Each (sample, family) pair
// draws its mask and sampler noise from its own stream, so thread count
// never changes the report.
EvalReport evaluate(const RunConfig& cfg, const std::vector<Image>& test_images, const EvalModels& models,
                    const EvalProgressFn& progress = {});

// Mask shared by every method for (sample, family).
Mask eval_mask(const RunConfig& cfg, int sample_id, MaskFamily family, int height, int width);

}  // namespace dgp
