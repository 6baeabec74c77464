#include "eval/workflows.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "error.hpp"
#include "eval/checkpoint.hpp"
#include "imaging/netpbm.hpp"

namespace fs = std::filesystem;

namespace dgp {

namespace {

std::vector<Image> split_images(const std::string& data_dir, const char* split, const DatasetSpec& spec) {
    if (data_dir.empty()) return gen_toyshapes(spec);
    const fs::path sub = fs::path(data_dir) / split;
    return load_dataset_dir(fs::is_directory(sub) ? sub.string() : data_dir);
}

}  // namespace

std::vector<Image> load_dataset_dir(const std::string& dir) {
    if (!fs::is_directory(dir)) fail(ErrorCode::Io, "dataset directory '" + dir + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".ppm" || ext == ".pgm")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) fail(ErrorCode::Io, "no .ppm/.pgm images in '" + dir + "'");
    std::vector<Image> out;
    out.reserve(files.size());
    for (const auto& f : files) {
        out.push_back(load_image(f.string()));
        require_same_dims(out.front(), out.back(), "dataset");
    }
    return out;
}

void write_dataset(const RunConfig& cfg, const std::string& dir) {
    cfg.validate();
    for (const auto& [split, spec] : {std::pair{"train", cfg.train_spec()}, std::pair{"test", cfg.test_spec()}}) {
        const fs::path sub = fs::path(dir) / split;
        fs::create_directories(sub);
        const char* ext = spec.palette == Palette::Rgb ? "ppm" : "pgm";
        for (int i = 0; i < spec.count; ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "%05d.%s", i, ext);
            save_image(gen_toyshape(spec, static_cast<std::uint64_t>(i)), (sub / name).string());
        }
    }
}

std::vector<Image> training_images(const RunConfig& cfg, const std::string& data_dir) {
    return split_images(data_dir, "train", cfg.train_spec());
}

std::vector<Image> test_images(const RunConfig& cfg, const std::string& data_dir) {
    return split_images(data_dir, "test", cfg.test_spec());
}

EpsilonNet make_epsilon_net(const RunConfig& cfg, int channels) { return EpsilonNet(channels, cfg.derived_seed("ddpm_init")); }
Generator make_generator(const RunConfig& cfg, int channels) { return Generator(channels, cfg.derived_seed("gan_init")); }
Discriminator make_discriminator(const RunConfig& cfg, int channels) {
    return Discriminator(channels, cfg.derived_seed("disc_init"));
}

std::vector<float> run_train_ddpm(const RunConfig& cfg, const std::vector<Image>& data, const std::string& out_path,
                                  const ProgressFn& progress) {
    cfg.validate();
    if (data.empty()) fail(ErrorCode::InvalidArgument, "empty batch: no training images");
    const NoiseSchedule schedule = cfg.schedule();
    EpsilonNet net = make_epsilon_net(cfg, data.front().channels());
    auto history = train_ddpm(net, data, schedule, cfg.ddpm_train_config(), progress);
    save_checkpoint(out_path, to_checkpoint(net, schedule));
    return history;
}

std::vector<GanLosses> run_train_gan(const RunConfig& cfg, const std::vector<Image>& data, const std::string& out_path,
                                     const GanProgressFn& progress) {
    cfg.validate();
    if (data.empty()) fail(ErrorCode::InvalidArgument, "empty batch: no training images");
    const int c = data.front().channels();
    Generator g = make_generator(cfg, c);
    Discriminator d = make_discriminator(cfg, c);
    auto history = train_gan(g, d, data, cfg.schedule(), cfg.gan_train_config(), progress);
    save_checkpoint(out_path, to_checkpoint(g));
    return history;
}

Rng inpaint_rng(const RunConfig& cfg) { return Rng(cfg.derived_seed("inpaint")); }

}  // namespace dgp
