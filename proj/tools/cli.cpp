#include "cli.hpp"

#include <CLI11.hpp>

#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dgpaint/dgpaint.h"

namespace dgp::cli {

namespace {

struct CliError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(dgp_status s) {
    if (s != DGP_OK) throw CliError(std::string(dgp_status_name(s)) + ": " + dgp_last_error());
}

template <typename T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using ConfigPtr = std::unique_ptr<dgp_config, Deleter<dgp_config, dgp_config_free>>;
using ImagePtr = std::unique_ptr<dgp_image, Deleter<dgp_image, dgp_image_free>>;
using MaskPtr = std::unique_ptr<dgp_mask, Deleter<dgp_mask, dgp_mask_free>>;
using ModelPtr = std::unique_ptr<dgp_model, Deleter<dgp_model, dgp_model_free>>;
using ReportPtr = std::unique_ptr<dgp_report, Deleter<dgp_report, dgp_report_free>>;

ImagePtr load_image(const std::string& path) {
    dgp_image* p = nullptr;
    check(dgp_image_load(path.c_str(), &p));
    return ImagePtr(p);
}

MaskPtr load_mask(const std::string& path) {
    dgp_mask* p = nullptr;
    check(dgp_mask_load(path.c_str(), &p));
    return MaskPtr(p);
}

ModelPtr load_model(const std::string& path) {
    dgp_model* p = nullptr;
    check(dgp_model_load(path.c_str(), &p));
    return ModelPtr(p);
}

// Options shared by every subcommand; flags are folded into the config as
// overrides of the file given by --config.
struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> sets;
    std::vector<std::pair<std::string, std::string>> overrides;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "Config file (key = value lines)")->check(CLI::ExistingFile);
        app->add_option("--seed", seed, "Master seed");
        app->add_option("--set", sets, "Config override key=value (repeatable)");
    }

    void override_with(const char* key, const std::string& value) { overrides.emplace_back(key, value); }

    ConfigPtr build() const {
        dgp_config* raw = nullptr;
        if (config_path.empty()) check(dgp_config_create(&raw));
        else check(dgp_config_load(config_path.c_str(), &raw));
        ConfigPtr cfg(raw);
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw CliError("--set expects key=value, got '" + kv + "'");
            check(dgp_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
        }
        if (seed) check(dgp_config_set(cfg.get(), "seed", std::to_string(*seed).c_str()));
        for (const auto& [k, v] : overrides) check(dgp_config_set(cfg.get(), k.c_str(), v.c_str()));
        return cfg;
    }
};

struct ProgressPrinter {
    std::ostream* err;
    const char* label;
    int every;
};

void print_progress(void* user, int step, int total, double value) {
    auto* p = static_cast<ProgressPrinter*>(user);
    if (step % p->every == 0 || step == total) *p->err << p->label << " " << step << "/" << total << " " << value << "\n";
}

void write_montage(const dgp_image* original, const dgp_mask* mask, const dgp_image* result, const std::string& path) {
    dgp_image* masked = nullptr;
    check(dgp_apply_mask(original, mask, &masked));
    ImagePtr masked_ptr(masked);
    dgp_image* m = nullptr;
    check(dgp_montage(original, masked, result, &m));
    ImagePtr montage(m);
    check(dgp_image_save(montage.get(), path.c_str()));
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"dgpaint: diffusion-loop GAN inpainting with a DDPM baseline"};
    app.require_subcommand(1);

    Common common;

    // gen-data
    std::string data_out;
    auto* gen_data = app.add_subcommand("gen-data", "Write the synthetic toyshapes dataset (train/ and test/)");
    gen_data->add_option("--out", data_out, "Output directory")->required();
    common.attach(gen_data);

    // gen-mask
    std::string mask_family, mask_out;
    int mask_size = 32;
    auto* gen_mask = app.add_subcommand("gen-mask", "Write one mask as PGM (0 = known, 255 = hole)");
    gen_mask->add_option("--family", mask_family, "box, stroke, half, bernoulli, zeros or ones")->required();
    gen_mask->add_option("--size", mask_size, "Mask height and width");
    gen_mask->add_option("--out", mask_out, "Output PGM")->required();
    common.attach(gen_mask);

    // train-ddpm / train-gan
    std::string train_data, train_out;
    std::optional<int> train_steps;
    auto* train_ddpm = app.add_subcommand("train-ddpm", "Train the epsilon-prediction network");
    auto* train_gan = app.add_subcommand("train-gan", "Train the conditional generator and discriminator");
    for (auto* sub : {train_ddpm, train_gan}) {
        sub->add_option("--data", train_data, "Dataset directory (default: generate from config)");
        sub->add_option("--out", train_out, "Checkpoint path")->required();
        sub->add_option("--steps", train_steps, "Training steps");
        common.attach(sub);
    }

    // inpaint / baseline-inpaint
    std::string image_path, mask_path, gan_path, ddpm_path, result_path, montage_path;
    std::optional<int> timesteps;
    std::optional<std::string> mode, drift_model;
    auto* inpaint = app.add_subcommand("inpaint", "Inpaint one image with the GAN-driven denoising loop");
    inpaint->add_option("--gan", gan_path, "Generator checkpoint")->required();
    inpaint->add_option("--ddpm", ddpm_path, "Epsilon-net checkpoint (drift-model epsilon_net only)");
    inpaint->add_option("--T", timesteps, "Loop steps");
    inpaint->add_option("--mode", mode, "verbatim or stabilized");
    inpaint->add_option("--drift-model", drift_model, "generator or epsilon_net");
    auto* baseline = app.add_subcommand("baseline-inpaint", "Inpaint one image with the DDPM projection baseline");
    baseline->add_option("--ddpm", ddpm_path, "Epsilon-net checkpoint")->required();
    for (auto* sub : {inpaint, baseline}) {
        sub->add_option("--image", image_path, "Input PPM/PGM")->required();
        sub->add_option("--mask", mask_path, "Mask PGM (255 = hole)")->required();
        sub->add_option("--out", result_path, "Result image")->required();
        sub->add_option("--montage", montage_path, "Original | masked | result strip");
        common.attach(sub);
    }

    // eval
    std::string eval_data, eval_out, eval_gan, eval_ddpm;
    std::optional<std::string> families, methods;
    std::optional<int> threads;
    bool wall_time = false;
    auto* eval = app.add_subcommand("eval", "Sweep mask families x methods over the test split; write a CSV report");
    eval->add_option("--gan", eval_gan, "Generator checkpoint");
    eval->add_option("--ddpm", eval_ddpm, "Epsilon-net checkpoint");
    eval->add_option("--data", eval_data, "Dataset directory (default: generate from config)");
    eval->add_option("--out", eval_out, "CSV report path")->required();
    eval->add_option("--families", families, "Comma-separated mask families");
    eval->add_option("--methods", methods, "Comma-separated methods: diffganpaint, ddpm_baseline, mean_fill");
    eval->add_option("--T", timesteps, "Loop steps for diffganpaint");
    eval->add_option("--mode", mode, "verbatim or stabilized");
    eval->add_option("--threads", threads, "Worker threads (0 = all cores)");
    eval->add_flag("--record-wall-time", wall_time, "Fill the wall_ms column (makes the report run-dependent)");
    common.attach(eval);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (timesteps) common.override_with("timesteps", std::to_string(*timesteps));
        if (mode) common.override_with("mode", *mode);
        if (drift_model) common.override_with("drift_model", *drift_model);
        if (families) common.override_with("eval_families", *families);
        if (methods) common.override_with("eval_methods", *methods);
        if (threads) common.override_with("threads", std::to_string(*threads));
        if (wall_time) common.override_with("record_wall_time", "true");
        if (train_steps) {
            common.override_with(train_ddpm->parsed() ? "ddpm_train_steps" : "gan_train_steps",
                                 std::to_string(*train_steps));
        }
        const ConfigPtr cfg = common.build();

        if (gen_data->parsed()) {
            check(dgp_generate_dataset(cfg.get(), data_out.c_str()));
            out << "wrote dataset to " << data_out << "\n";
        } else if (gen_mask->parsed()) {
            char seed_buf[32];
            check(dgp_config_get(cfg.get(), "seed", seed_buf, sizeof seed_buf, nullptr));
            dgp_mask* m = nullptr;
            check(dgp_mask_generate(mask_family.c_str(), mask_size, mask_size, std::stoull(seed_buf), &m));
            MaskPtr mask(m);
            check(dgp_mask_save(mask.get(), mask_out.c_str()));
        } else if (train_ddpm->parsed() || train_gan->parsed()) {
            const bool is_ddpm = train_ddpm->parsed();
            ProgressPrinter printer{&err, is_ddpm ? "ddpm" : "gan", 100};
            const char* data = train_data.empty() ? nullptr : train_data.c_str();
            check(is_ddpm ? dgp_train_ddpm(cfg.get(), data, train_out.c_str(), print_progress, &printer)
                          : dgp_train_gan(cfg.get(), data, train_out.c_str(), print_progress, &printer));
            out << "wrote " << train_out << "\n";
        } else if (inpaint->parsed() || baseline->parsed()) {
            const ImagePtr image = load_image(image_path);
            const MaskPtr mask = load_mask(mask_path);
            dgp_image* r = nullptr;
            dgp_trace trace{};
            if (inpaint->parsed()) {
                const ModelPtr g = load_model(gan_path);
                const ModelPtr loop = ddpm_path.empty() ? nullptr : load_model(ddpm_path);
                check(dgp_inpaint(g.get(), loop.get(), image.get(), mask.get(), cfg.get(), &r, &trace));
            } else {
                const ModelPtr net = load_model(ddpm_path);
                check(dgp_baseline_inpaint(net.get(), image.get(), mask.get(), cfg.get(), &r, &trace));
            }
            const ImagePtr result(r);
            check(dgp_image_save(result.get(), result_path.c_str()));
            if (!montage_path.empty()) write_montage(image.get(), mask.get(), result.get(), montage_path);
            out << "generator_evals=" << trace.generator_evals << " epsnet_evals=" << trace.epsnet_evals << "\n";
        } else if (eval->parsed()) {
            const ModelPtr g = eval_gan.empty() ? nullptr : load_model(eval_gan);
            const ModelPtr net = eval_ddpm.empty() ? nullptr : load_model(eval_ddpm);
            ProgressPrinter printer{&err, "eval", 20};
            dgp_report* rep = nullptr;
            check(dgp_evaluate(cfg.get(), eval_data.empty() ? nullptr : eval_data.c_str(), g.get(), net.get(),
                               print_progress, &printer, &rep));
            const ReportPtr report(rep);
            check(dgp_report_save_csv(report.get(), eval_out.c_str()));
            out << "wrote " << dgp_report_row_count(report.get()) << " rows to " << eval_out << "\n";
        }
    } catch (const CliError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace dgp::cli
