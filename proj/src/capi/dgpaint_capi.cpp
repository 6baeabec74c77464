#include "dgpaint/dgpaint.h"

#include <cstring>
#include <filesystem>
#include <new>
#include <optional>
#include <string>
#include <variant>

#include "error.hpp"
#include "fileio.hpp"
#include "eval/checkpoint.hpp"
#include "eval/evaluate.hpp"
#include "eval/metrics.hpp"
#include "eval/workflows.hpp"
#include "imaging/masks.hpp"
#include "imaging/netpbm.hpp"
#include "sampler/paint_sampler.hpp"

struct dgp_config {
    dgp::RunConfig cfg;
};
struct dgp_image {
    dgp::Image img;
};
struct dgp_mask {
    dgp::Mask mask;
};
struct dgp_model {
    std::variant<dgp::Generator, dgp::DiffusionModel> model;
};
struct dgp_report {
    dgp::EvalReport report;
};

namespace {

thread_local std::string g_last_error;

dgp_status to_status(dgp::ErrorCode code) {
    switch (code) {
        case dgp::ErrorCode::InvalidArgument: return DGP_ERR_INVALID_ARGUMENT;
        case dgp::ErrorCode::Shape: return DGP_ERR_SHAPE;
        case dgp::ErrorCode::Io: return DGP_ERR_IO;
        case dgp::ErrorCode::Format: return DGP_ERR_FORMAT;
        case dgp::ErrorCode::Checksum: return DGP_ERR_CHECKSUM;
        case dgp::ErrorCode::Version: return DGP_ERR_VERSION;
        case dgp::ErrorCode::MissingTensor: return DGP_ERR_MISSING_TENSOR;
        case dgp::ErrorCode::Kind: return DGP_ERR_KIND;
        case dgp::ErrorCode::Diverged: return DGP_ERR_DIVERGED;
        case dgp::ErrorCode::Config: return DGP_ERR_CONFIG;
        case dgp::ErrorCode::Numeric: return DGP_ERR_NUMERIC;
    }
    return DGP_ERR_INTERNAL;
}

template <typename F>
dgp_status guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return DGP_OK;
    } catch (const dgp::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        g_last_error = e.what();
        return DGP_ERR_IO;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return DGP_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return DGP_ERR_INTERNAL;
    }
}

template <typename T>
const T& deref(const T* p, const char* what) {
    if (!p) dgp::fail(dgp::ErrorCode::InvalidArgument, std::string(what) + " is NULL");
    return *p;
}

void require_out(const void* p) {
    if (!p) dgp::fail(dgp::ErrorCode::InvalidArgument, "output pointer is NULL");
}

std::string str_arg(const char* s, const char* what) {
    if (!s) dgp::fail(dgp::ErrorCode::InvalidArgument, std::string(what) + " is NULL");
    return s;
}

const dgp::Generator& as_generator(const dgp_model* m) {
    const auto* g = std::get_if<dgp::Generator>(&deref(m, "generator model").model);
    if (!g) dgp::fail(dgp::ErrorCode::Kind, "model is an epsilon_net, expected a generator");
    return *g;
}

const dgp::DiffusionModel& as_diffusion(const dgp_model* m) {
    const auto* d = std::get_if<dgp::DiffusionModel>(&deref(m, "epsilon-net model").model);
    if (!d) dgp::fail(dgp::ErrorCode::Kind, "model is a generator, expected an epsilon_net");
    return *d;
}

void fill_trace(dgp_trace* out, const dgp::SampleTrace& t) {
    if (!out) return;
    out->generator_evals = t.generator_evals;
    out->epsnet_evals = t.epsnet_evals;
    out->wall_ms = t.wall_ms;
}

}  // namespace

extern "C" {

const char* dgp_version(void) { return "1.0.0"; }

const char* dgp_last_error(void) { return g_last_error.c_str(); }

const char* dgp_status_name(dgp_status status) {
    switch (status) {
        case DGP_OK: return "ok";
        case DGP_ERR_INVALID_ARGUMENT: return "invalid argument";
        case DGP_ERR_SHAPE: return "shape mismatch";
        case DGP_ERR_IO: return "i/o error";
        case DGP_ERR_FORMAT: return "format error";
        case DGP_ERR_CHECKSUM: return "checksum mismatch";
        case DGP_ERR_VERSION: return "unsupported version";
        case DGP_ERR_MISSING_TENSOR: return "missing tensor";
        case DGP_ERR_KIND: return "wrong model kind";
        case DGP_ERR_DIVERGED: return "diverged";
        case DGP_ERR_CONFIG: return "config error";
        case DGP_ERR_NUMERIC: return "numeric error";
        case DGP_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

dgp_status dgp_config_create(dgp_config** out) {
    return guarded([&] {
        require_out(out);
        *out = new dgp_config{};
    });
}

dgp_status dgp_config_load(const char* path, dgp_config** out) {
    return guarded([&] {
        require_out(out);
        auto cfg = dgp::load_config(str_arg(path, "path"));
        cfg.validate();
        *out = new dgp_config{std::move(cfg)};
    });
}

dgp_status dgp_config_save(const dgp_config* cfg, const char* path) {
    return guarded([&] { dgp::save_config(deref(cfg, "config").cfg, str_arg(path, "path")); });
}

dgp_status dgp_config_set(dgp_config* cfg, const char* key, const char* value) {
    return guarded([&] {
        if (!cfg) dgp::fail(dgp::ErrorCode::InvalidArgument, "config is NULL");
        cfg->cfg.set(str_arg(key, "key"), str_arg(value, "value"));
    });
}

dgp_status dgp_config_get(const dgp_config* cfg, const char* key, char* buf, size_t cap, size_t* needed) {
    return guarded([&] {
        const std::string v = deref(cfg, "config").cfg.get(str_arg(key, "key"));
        if (needed) *needed = v.size() + 1;
        if (!buf || cap < v.size() + 1) dgp::fail(dgp::ErrorCode::InvalidArgument, "buffer too small");
        std::memcpy(buf, v.c_str(), v.size() + 1);
    });
}

void dgp_config_free(dgp_config* cfg) { delete cfg; }

dgp_status dgp_image_create(int channels, int height, int width, const float* values, dgp_image** out) {
    return guarded([&] {
        require_out(out);
        if (!values) dgp::fail(dgp::ErrorCode::InvalidArgument, "values is NULL");
        if (channels < 1 || height < 1 || width < 1) dgp::fail(dgp::ErrorCode::Shape, "image dimensions must be positive");
        const std::size_t n = static_cast<std::size_t>(channels) * height * width;
        *out = new dgp_image{dgp::Image(channels, height, width, std::vector<float>(values, values + n))};
    });
}

dgp_status dgp_image_load(const char* path, dgp_image** out) {
    return guarded([&] {
        require_out(out);
        *out = new dgp_image{dgp::load_image(str_arg(path, "path"))};
    });
}

dgp_status dgp_image_save(const dgp_image* img, const char* path) {
    return guarded([&] { dgp::save_image(deref(img, "image").img, str_arg(path, "path")); });
}

dgp_status dgp_image_shape(const dgp_image* img, int* channels, int* height, int* width) {
    return guarded([&] {
        const auto& i = deref(img, "image").img;
        if (channels) *channels = i.channels();
        if (height) *height = i.height();
        if (width) *width = i.width();
    });
}

const float* dgp_image_data(const dgp_image* img) { return img ? img->img.values().data() : nullptr; }

void dgp_image_free(dgp_image* img) { delete img; }

dgp_status dgp_mask_create(int height, int width, const float* values, dgp_mask** out) {
    return guarded([&] {
        require_out(out);
        if (!values) dgp::fail(dgp::ErrorCode::InvalidArgument, "values is NULL");
        if (height < 1 || width < 1) dgp::fail(dgp::ErrorCode::Shape, "mask dimensions must be positive");
        *out = new dgp_mask{dgp::Mask(height, width, std::vector<float>(values, values + static_cast<std::size_t>(height) * width))};
    });
}

dgp_status dgp_mask_load(const char* path, dgp_mask** out) {
    return guarded([&] {
        require_out(out);
        *out = new dgp_mask{dgp::load_mask(str_arg(path, "path"))};
    });
}

dgp_status dgp_mask_save(const dgp_mask* mask, const char* path) {
    return guarded([&] { dgp::save_mask(deref(mask, "mask").mask, str_arg(path, "path")); });
}

dgp_status dgp_mask_generate(const char* family, int height, int width, uint64_t seed, dgp_mask** out) {
    return guarded([&] {
        require_out(out);
        const std::string f = str_arg(family, "family");
        if (height < 1 || width < 1) dgp::fail(dgp::ErrorCode::InvalidArgument, "mask dimensions must be positive");
        if (f == "zeros" || f == "ones") {
            *out = new dgp_mask{dgp::Mask::filled(height, width, f == "ones" ? 1.0f : 0.0f)};
            return;
        }
        dgp::Rng rng(seed);
        *out = new dgp_mask{dgp::gen_mask(dgp::parse_mask_family(f), rng, height, width)};
    });
}

dgp_status dgp_mask_shape(const dgp_mask* mask, int* height, int* width) {
    return guarded([&] {
        const auto& m = deref(mask, "mask").mask;
        if (height) *height = m.height();
        if (width) *width = m.width();
    });
}

const float* dgp_mask_data(const dgp_mask* mask) { return mask ? mask->mask.values().data() : nullptr; }

void dgp_mask_free(dgp_mask* mask) { delete mask; }

dgp_status dgp_apply_mask(const dgp_image* img, const dgp_mask* mask, dgp_image** out) {
    return guarded([&] {
        require_out(out);
        *out = new dgp_image{dgp::apply_mask(deref(img, "image").img, deref(mask, "mask").mask)};
    });
}

dgp_status dgp_montage(const dgp_image* original, const dgp_image* masked, const dgp_image* result, dgp_image** out) {
    return guarded([&] {
        require_out(out);
        *out = new dgp_image{dgp::montage(deref(original, "original").img, deref(masked, "masked").img,
                                          deref(result, "result").img)};
    });
}

dgp_status dgp_psnr(const dgp_image* a, const dgp_image* b, double* out_db) {
    return guarded([&] {
        require_out(out_db);
        *out_db = dgp::psnr(deref(a, "image a").img, deref(b, "image b").img);
    });
}

dgp_status dgp_masked_mse(const dgp_image* a, const dgp_image* b, const dgp_mask* mask, double* out) {
    return guarded([&] {
        require_out(out);
        *out = dgp::masked_mse(deref(a, "image a").img, deref(b, "image b").img, deref(mask, "mask").mask);
    });
}

dgp_status dgp_model_load(const char* path, dgp_model** out) {
    return guarded([&] {
        require_out(out);
        const auto ckpt = dgp::load_checkpoint(str_arg(path, "path"));
        if (ckpt.kind == dgp::Generator::kKind) {
            *out = new dgp_model{dgp::generator_from_checkpoint(ckpt)};
        } else if (ckpt.kind == dgp::EpsilonNet::kKind) {
            *out = new dgp_model{dgp::epsilon_net_from_checkpoint(ckpt)};
        } else {
            dgp::fail(dgp::ErrorCode::Kind, "unknown checkpoint kind '" + ckpt.kind + "'");
        }
    });
}

dgp_status dgp_model_save(const dgp_model* model, const char* path) {
    return guarded([&] {
        const std::string p = str_arg(path, "path");
        std::visit(
            [&](const auto& m) {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, dgp::Generator>) dgp::save_checkpoint(p, dgp::to_checkpoint(m));
                else dgp::save_checkpoint(p, dgp::to_checkpoint(m.net, m.schedule));
            },
            deref(model, "model").model);
    });
}

const char* dgp_model_kind(const dgp_model* model) {
    if (!model) return "";
    return std::holds_alternative<dgp::Generator>(model->model) ? dgp::Generator::kKind : dgp::EpsilonNet::kKind;
}

void dgp_model_free(dgp_model* model) { delete model; }

dgp_status dgp_generate_dataset(const dgp_config* cfg, const char* dir) {
    return guarded([&] { dgp::write_dataset(deref(cfg, "config").cfg, str_arg(dir, "dir")); });
}

dgp_status dgp_train_ddpm(const dgp_config* cfg, const char* data_dir, const char* out_path, dgp_progress_fn progress,
                          void* user) {
    return guarded([&] {
        const auto& c = deref(cfg, "config").cfg;
        c.validate();
        const auto data = dgp::training_images(c, data_dir ? data_dir : "");
        const int total = c.ddpm_train_steps;
        dgp::run_train_ddpm(c, data, str_arg(out_path, "out_path"), [&](int step, float loss) {
            if (progress) progress(user, step + 1, total, loss);
        });
    });
}

dgp_status dgp_train_gan(const dgp_config* cfg, const char* data_dir, const char* out_path, dgp_progress_fn progress,
                         void* user) {
    return guarded([&] {
        const auto& c = deref(cfg, "config").cfg;
        c.validate();
        const auto data = dgp::training_images(c, data_dir ? data_dir : "");
        const int total = c.gan_train_steps;
        dgp::run_train_gan(c, data, str_arg(out_path, "out_path"), [&](int step, const dgp::GanLosses& l) {
            if (progress) progress(user, step + 1, total, l.generator);
        });
    });
}

dgp_status dgp_inpaint(const dgp_model* generator, const dgp_model* loop_model, const dgp_image* img,
                       const dgp_mask* mask, const dgp_config* cfg, dgp_image** out, dgp_trace* trace) {
    return guarded([&] {
        require_out(out);
        const auto& c = deref(cfg, "config").cfg;
        const auto& g = as_generator(generator);
        const auto sampler = c.sampler_config();
        dgp::Rng rng = dgp::inpaint_rng(c);
        dgp::InpaintResult r;
        if (sampler.drift_model == dgp::DriftModelKind::EpsilonNet) {
            const auto& dm = as_diffusion(loop_model);
            const dgp::EpsilonNetDrift drift(dm.net, dm.schedule);
            r = dgp::diffganpaint_inpaint(deref(img, "image").img, deref(mask, "mask").mask, g, drift, sampler, rng);
        } else {
            r = dgp::diffganpaint_inpaint(deref(img, "image").img, deref(mask, "mask").mask, g, sampler, rng);
        }
        fill_trace(trace, r.trace);
        *out = new dgp_image{std::move(r.image)};
    });
}

dgp_status dgp_baseline_inpaint(const dgp_model* epsilon_net, const dgp_image* img, const dgp_mask* mask,
                                const dgp_config* cfg, dgp_image** out, dgp_trace* trace) {
    return guarded([&] {
        require_out(out);
        const auto& c = deref(cfg, "config").cfg;
        const auto& dm = as_diffusion(epsilon_net);
        dgp::Rng rng = dgp::inpaint_rng(c);
        dgp::SampleTrace t;
        auto result = dgp::ddpm_inpaint_baseline(dm.net, deref(img, "image").img, deref(mask, "mask").mask,
                                                 dm.schedule, rng, &t);
        fill_trace(trace, t);
        *out = new dgp_image{std::move(result)};
    });
}

dgp_status dgp_evaluate(const dgp_config* cfg, const char* data_dir, const dgp_model* generator,
                        const dgp_model* epsilon_net, dgp_progress_fn progress, void* user, dgp_report** out) {
    return guarded([&] {
        require_out(out);
        const auto& c = deref(cfg, "config").cfg;
        c.validate();
        dgp::EvalModels models;
        if (generator) models.generator = &as_generator(generator);
        if (epsilon_net) {
            const auto& dm = as_diffusion(epsilon_net);
            models.epsilon_net = &dm.net;
            models.schedule = &dm.schedule;
        }
        const auto images = dgp::test_images(c, data_dir ? data_dir : "");
        auto report = dgp::evaluate(c, images, models, [&](int done, int total) {
            if (progress) progress(user, done, total, 0.0);
        });
        *out = new dgp_report{std::move(report)};
    });
}

dgp_status dgp_report_save_csv(const dgp_report* report, const char* path) {
    return guarded([&] { dgp::write_file_atomic(str_arg(path, "path"), deref(report, "report").report.to_csv()); });
}

size_t dgp_report_row_count(const dgp_report* report) { return report ? report->report.rows.size() : 0; }

dgp_status dgp_report_win_rate(const dgp_report* report, const char* method, const char* family, double* out) {
    return guarded([&] {
        require_out(out);
        *out = deref(report, "report").report.win_rate_vs_mean_fill(str_arg(method, "method"), str_arg(family, "family"));
    });
}

dgp_status dgp_report_mean_mse(const dgp_report* report, const char* method, const char* family, double* out) {
    return guarded([&] {
        require_out(out);
        *out = deref(report, "report").report.mean_masked_mse(str_arg(method, "method"), str_arg(family, "family"));
    });
}

dgp_status dgp_report_total_evals(const dgp_report* report, const char* method, uint64_t* generator_evals,
                                  uint64_t* epsnet_evals) {
    return guarded([&] {
        const std::string m = str_arg(method, "method");
        std::uint64_t g = 0, e = 0;
        for (const auto& row : deref(report, "report").report.rows) {
            if (row.method != m) continue;
            g += row.generator_evals;
            e += row.epsnet_evals;
        }
        if (generator_evals) *generator_evals = g;
        if (epsnet_evals) *epsnet_evals = e;
    });
}

void dgp_report_free(dgp_report* report) { delete report; }

}  // extern "C"
