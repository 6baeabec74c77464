#include "eval/evaluate.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include "error.hpp"
#include "eval/metrics.hpp"
#include "sampler/paint_sampler.hpp"

namespace dgp {

const char* const kReportHeader = "sample_id,mask_family,method,masked_mse,psnr,generator_evals,epsnet_evals,wall_ms";

std::string EvalReport::to_csv() const {
    std::string out = std::string(kReportHeader) + "\n";
    for (const auto& r : rows) {
        out += std::to_string(r.sample_id) + "," + r.mask_family + "," + r.method + "," + format_number(r.masked_mse) +
               "," + format_number(r.psnr) + "," + std::to_string(r.generator_evals) + "," +
               std::to_string(r.epsnet_evals) + "," + format_number(r.wall_ms) + "\n";
    }
    return out;
}

double EvalReport::win_rate_vs_mean_fill(const std::string& method, const std::string& family) const {
    std::map<int, double> baseline;
    for (const auto& r : rows) {
        if (r.method == "mean_fill" && r.mask_family == family) baseline[r.sample_id] = r.masked_mse;
    }
    int wins = 0, total = 0;
    for (const auto& r : rows) {
        if (r.method != method || r.mask_family != family) continue;
        const auto it = baseline.find(r.sample_id);
        if (it == baseline.end()) fail(ErrorCode::InvalidArgument, "win rate needs mean_fill rows");
        ++total;
        if (r.masked_mse < it->second) ++wins;
    }
    if (total == 0) fail(ErrorCode::InvalidArgument, "no rows for method '" + method + "' and family '" + family + "'");
    return static_cast<double>(wins) / total;
}

double EvalReport::mean_masked_mse(const std::string& method, const std::string& family) const {
    double acc = 0.0;
    int n = 0;
    for (const auto& r : rows) {
        if (r.method == method && r.mask_family == family) {
            acc += r.masked_mse;
            ++n;
        }
    }
    return n ? acc / n : 0.0;
}

Mask eval_mask(const RunConfig& cfg, int sample_id, MaskFamily family, int height, int width) {
    Rng rng = Rng(cfg.derived_seed("eval_mask")).split(static_cast<std::uint64_t>(sample_id)).split(to_string(family));
    return gen_mask(family, rng, height, width);
}

EvalReport evaluate(const RunConfig& cfg, const std::vector<Image>& test_images, const EvalModels& models,
                    const EvalProgressFn& progress) {
    const auto families = cfg.families();
    const auto methods = cfg.methods();
    const SamplerConfig sampler = cfg.sampler_config();
    for (const auto& m : methods) {
        if (m == "diffganpaint" && !models.generator) fail(ErrorCode::InvalidArgument, "diffganpaint needs a generator checkpoint");
        if (m == "ddpm_baseline" && (!models.epsilon_net || !models.schedule)) {
            fail(ErrorCode::InvalidArgument, "ddpm_baseline needs an epsilon-net checkpoint");
        }
    }
    if (sampler.drift_model == DriftModelKind::EpsilonNet && (!models.epsilon_net || !models.schedule)) {
        fail(ErrorCode::InvalidArgument, "drift_model = epsilon_net needs an epsilon-net checkpoint");
    }

    const int n = static_cast<int>(test_images.size());
    std::vector<std::vector<EvalRow>> per_sample(n);
    auto run_sample = [&](int i) {
        const Image& original = test_images[i];
        std::vector<EvalRow> rows;
        for (MaskFamily family : families) {
            const Mask mask = eval_mask(cfg, i, family, original.height(), original.width());
            const Image masked = apply_mask(original, mask);
            Rng stream = Rng(cfg.derived_seed("eval_sampler")).split(static_cast<std::uint64_t>(i)).split(to_string(family));
            for (const auto& method : methods) {
                EvalRow row{i, to_string(family), method};
                Rng rng = stream.split(method);
                Image result;
                SampleTrace trace;
                if (method == "diffganpaint") {
                    InpaintResult r;
                    if (sampler.drift_model == DriftModelKind::EpsilonNet) {
                        const EpsilonNetDrift drift(*models.epsilon_net, *models.schedule);
                        r = diffganpaint_inpaint(masked, mask, *models.generator, drift, sampler, rng);
                    } else {
                        r = diffganpaint_inpaint(masked, mask, *models.generator, sampler, rng);
                    }
                    result = std::move(r.image);
                    trace = std::move(r.trace);
                } else if (method == "ddpm_baseline") {
                    result = ddpm_inpaint_baseline(*models.epsilon_net, masked, mask, *models.schedule, rng, &trace);
                } else {
                    result = mean_fill(masked, mask);
                }
                row.masked_mse = masked_mse(result, original, mask);
                row.psnr = psnr(result, original);
                row.generator_evals = trace.generator_evals;
                row.epsnet_evals = trace.epsnet_evals;
                row.wall_ms = cfg.record_wall_time ? trace.wall_ms : 0.0;
                rows.push_back(std::move(row));
            }
        }
        per_sample[i] = std::move(rows);
    };

    const int threads = cfg.threads == 0 ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))
                                         : std::max(1, cfg.threads);
    std::atomic<int> next{0}, done{0};
    std::mutex progress_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                run_sample(i);
            } catch (...) {
                std::lock_guard lock(progress_mutex);
                if (!first_error) first_error = std::current_exception();
                next = n;
                return;
            }
            const int d = ++done;
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(d, n);
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (first_error) std::rethrow_exception(first_error);

    EvalReport report;
    for (auto& rows : per_sample) {
        for (auto& r : rows) report.rows.push_back(std::move(r));
    }
    return report;
}

}  // namespace dgp
