#include "eval/config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <variant>

#include "error.hpp"
#include "fileio.hpp"

namespace dgp {

namespace {

using Field = std::variant<int RunConfig::*, float RunConfig::*, std::uint64_t RunConfig::*, std::string RunConfig::*,
                           bool RunConfig::*>;

struct Entry {
    const char* key;
    Field field;
};

const std::vector<Entry>& table() {
    static const std::vector<Entry> entries{
        {"seed", &RunConfig::seed},
        {"image_size", &RunConfig::image_size},
        {"palette", &RunConfig::palette},
        {"train_count", &RunConfig::train_count},
        {"test_count", &RunConfig::test_count},
        {"min_shapes", &RunConfig::min_shapes},
        {"max_shapes", &RunConfig::max_shapes},
        {"ddpm_steps", &RunConfig::ddpm_steps},
        {"beta_start", &RunConfig::beta_start},
        {"beta_end", &RunConfig::beta_end},
        {"ddpm_train_steps", &RunConfig::ddpm_train_steps},
        {"ddpm_batch", &RunConfig::ddpm_batch},
        {"ddpm_lr", &RunConfig::ddpm_lr},
        {"ddpm_ema_decay", &RunConfig::ddpm_ema_decay},
        {"gan_train_steps", &RunConfig::gan_train_steps},
        {"gan_batch", &RunConfig::gan_batch},
        {"lr_g", &RunConfig::lr_g},
        {"lr_d", &RunConfig::lr_d},
        {"gan_beta1", &RunConfig::gan_beta1},
        {"lambda_l1", &RunConfig::lambda_l1},
        {"gan_noise_t_max", &RunConfig::gan_noise_t_max},
        {"gan_noise_cond_prob", &RunConfig::gan_noise_cond_prob},
        {"gan_hole_noise_max", &RunConfig::gan_hole_noise_max},
        {"gan_chain_fraction", &RunConfig::gan_chain_fraction},
        {"gan_chain_final_prob", &RunConfig::gan_chain_final_prob},
        {"timesteps", &RunConfig::timesteps},
        {"mode", &RunConfig::mode},
        {"drift_model", &RunConfig::drift_model},
        {"eval_families", &RunConfig::eval_families},
        {"eval_methods", &RunConfig::eval_methods},
        {"record_wall_time", &RunConfig::record_wall_time},
        {"threads", &RunConfig::threads},
    };
    return entries;
}

const Entry& find(const std::string& key) {
    for (const auto& e : table()) {
        if (key == e.key) return e;
    }
    fail(ErrorCode::Config, "unknown config key '" + key + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) fail(ErrorCode::Config, "invalid value '" + value + "' for key '" + key + "'");
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string format_number(float v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void RunConfig::set(const std::string& key, const std::string& value) {
    const Entry& e = find(key);
    std::visit(
        [&](auto member) {
            using T = std::remove_reference_t<decltype(this->*member)>;
            if constexpr (std::is_same_v<T, std::string>) {
                this->*member = value;
            } else if constexpr (std::is_same_v<T, bool>) {
                if (value == "true") this->*member = true;
                else if (value == "false") this->*member = false;
                else fail(ErrorCode::Config, "invalid value '" + value + "' for key '" + key + "' (expected true/false)");
            } else {
                this->*member = parse_number<T>(key, value);
            }
        },
        e.field);
}

std::string RunConfig::get(const std::string& key) const {
    const Entry& e = find(key);
    return std::visit(
        [&](auto member) -> std::string {
            using T = std::remove_cvref_t<decltype(this->*member)>;
            if constexpr (std::is_same_v<T, std::string>) return this->*member;
            else if constexpr (std::is_same_v<T, bool>) return this->*member ? "true" : "false";
            else if constexpr (std::is_same_v<T, float>) return format_number(this->*member);
            else return std::to_string(this->*member);
        },
        e.field);
}

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> k = [] {
        std::vector<std::string> out;
        for (const auto& e : table()) out.emplace_back(e.key);
        return out;
    }();
    return k;
}

void RunConfig::validate() const {
    train_spec().validate();
    test_spec().validate();
    if (image_size % 4 != 0) fail(ErrorCode::Config, "image_size must be a multiple of 4");
    (void)schedule();
    if (ddpm_train_steps < 0 || ddpm_batch < 1 || !(ddpm_lr > 0) ||
        !(ddpm_ema_decay >= 0 && ddpm_ema_decay < 1)) fail(ErrorCode::Config, "invalid ddpm training budget");
    gan_train_config().validate();
    if (timesteps < 0) fail(ErrorCode::Config, "timesteps must be >= 0");
    (void)sampler_config();
    (void)families();
    (void)methods();
    if (threads < 0) fail(ErrorCode::Config, "threads must be >= 0");
}

DatasetSpec RunConfig::train_spec() const {
    return DatasetSpec{train_count, image_size, derived_seed("train"), min_shapes, max_shapes, parse_palette(palette)};
}

DatasetSpec RunConfig::test_spec() const {
    return DatasetSpec{test_count, image_size, derived_seed("test"), min_shapes, max_shapes, parse_palette(palette)};
}

NoiseSchedule RunConfig::schedule() const { return make_linear_schedule(ddpm_steps, beta_start, beta_end); }

DdpmTrainConfig RunConfig::ddpm_train_config() const {
    return DdpmTrainConfig{ddpm_train_steps, ddpm_batch, ddpm_lr, derived_seed("ddpm_train"), ddpm_ema_decay};
}

GanTrainConfig RunConfig::gan_train_config() const {
    return GanTrainConfig{lr_g,      lr_d,     gan_beta1, lambda_l1, gan_batch, gan_train_steps, derived_seed("gan_train"),
                          gan_noise_t_max, gan_noise_cond_prob, gan_hole_noise_max, gan_chain_fraction,
                          std::max(timesteps, 1), gan_chain_final_prob};
}

SamplerConfig RunConfig::sampler_config() const {
    return SamplerConfig{timesteps, parse_sampler_mode(mode), parse_drift_model(drift_model), seed};
}

std::vector<MaskFamily> RunConfig::families() const {
    std::vector<MaskFamily> out;
    for (const auto& f : split_list(eval_families)) out.push_back(parse_mask_family(f));
    if (out.empty()) fail(ErrorCode::Config, "eval_families is empty");
    return out;
}

std::vector<std::string> RunConfig::methods() const {
    auto out = split_list(eval_methods);
    for (const auto& m : out) {
        if (m != "diffganpaint" && m != "ddpm_baseline" && m != "mean_fill") {
            fail(ErrorCode::Config, "unknown eval method '" + m + "'");
        }
    }
    if (out.empty()) fail(ErrorCode::Config, "eval_methods is empty");
    return out;
}

std::uint64_t RunConfig::derived_seed(const char* purpose) const { return Rng(seed).split(purpose).next_u64(); }

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(ErrorCode::Config, "config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            cfg.set(key, value);
        } catch (const Error& e) {
            fail(ErrorCode::Config, "config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& key : RunConfig::keys()) out += key + " = " + cfg.get(key) + "\n";
    return out;
}

RunConfig load_config(const std::string& path) {
    const auto bytes = read_file(path);
    return parse_config(std::string(bytes.begin(), bytes.end()));
}

void save_config(const RunConfig& cfg, const std::string& path) { write_file_atomic(path, serialize_config(cfg)); }

}  // namespace dgp
