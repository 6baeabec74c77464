#include <doctest.h>

#include <dgpaint/dgpaint.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

extern "C" int dgp_c_header_check(void);

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("dgpaint_capi_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::vector<char> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

dgp_config* small_config() {
    dgp_config* cfg = nullptr;
    REQUIRE(dgp_config_create(&cfg) == DGP_OK);
    for (auto [k, v] : {std::pair{"image_size", "16"}, {"train_count", "6"}, {"test_count", "2"},
                        {"ddpm_train_steps", "2"}, {"ddpm_batch", "2"}, {"gan_train_steps", "2"},
                        {"gan_batch", "2"}, {"ddpm_steps", "10"}, {"timesteps", "5"}, {"seed", "3"}}) {
        REQUIRE(dgp_config_set(cfg, k, v) == DGP_OK);
    }
    return cfg;
}

}  // namespace

TEST_CASE("header compiles as C") { CHECK(dgp_c_header_check() == DGP_OK); }

TEST_CASE("version and status names") {
    CHECK(std::strlen(dgp_version()) > 0);
    CHECK(std::string(dgp_status_name(DGP_OK)) == "ok");
    CHECK(std::string(dgp_status_name(DGP_ERR_CHECKSUM)) == "checksum mismatch");
}

TEST_CASE("config get, set and errors") {
    dgp_config* cfg = nullptr;
    REQUIRE(dgp_config_create(&cfg) == DGP_OK);
    CHECK(dgp_config_set(cfg, "timesteps", "42") == DGP_OK);
    size_t needed = 0;
    CHECK(dgp_config_get(cfg, "timesteps", nullptr, 0, &needed) == DGP_ERR_INVALID_ARGUMENT);
    CHECK(needed == 3);
    char buf[8];
    CHECK(dgp_config_get(cfg, "timesteps", buf, sizeof buf, &needed) == DGP_OK);
    CHECK(std::string(buf) == "42");
    CHECK(dgp_config_set(cfg, "nonsense", "1") == DGP_ERR_CONFIG);
    CHECK(std::string(dgp_last_error()).find("nonsense") != std::string::npos);
    CHECK(dgp_config_set(nullptr, "timesteps", "1") == DGP_ERR_INVALID_ARGUMENT);
    const fs::path dir = scratch_dir("config");
    CHECK(dgp_config_save(cfg, (dir / "c.cfg").string().c_str()) == DGP_OK);
    dgp_config* back = nullptr;
    CHECK(dgp_config_load((dir / "c.cfg").string().c_str(), &back) == DGP_OK);
    CHECK(dgp_config_get(back, "timesteps", buf, sizeof buf, &needed) == DGP_OK);
    CHECK(std::string(buf) == "42");
    dgp_config_free(back);
    dgp_config_free(cfg);
}

TEST_CASE("images, masks and metrics through handles") {
    std::vector<float> v(3 * 8 * 8, 0.25f);
    dgp_image* img = nullptr;
    REQUIRE(dgp_image_create(3, 8, 8, v.data(), &img) == DGP_OK);
    int c = 0, h = 0, w = 0;
    CHECK(dgp_image_shape(img, &c, &h, &w) == DGP_OK);
    CHECK(c == 3);
    CHECK(h == 8);
    CHECK(w == 8);
    dgp_mask* half = nullptr;
    REQUIRE(dgp_mask_generate("half", 8, 8, 1, &half) == DGP_OK);
    dgp_mask* zeros = nullptr;
    REQUIRE(dgp_mask_generate("zeros", 8, 8, 1, &zeros) == DGP_OK);
    dgp_image* masked = nullptr;
    REQUIRE(dgp_apply_mask(img, zeros, &masked) == DGP_OK);
    CHECK(std::memcmp(dgp_image_data(masked), v.data(), v.size() * sizeof(float)) == 0);
    double db = 0.0;
    CHECK(dgp_psnr(img, masked, &db) == DGP_OK);
    CHECK(db == 99.0);
    double mse = -1.0;
    CHECK(dgp_masked_mse(img, masked, zeros, &mse) == DGP_ERR_INVALID_ARGUMENT);
    CHECK(std::string(dgp_last_error()).find("empty mask region") != std::string::npos);
    CHECK(dgp_masked_mse(img, masked, half, &mse) == DGP_OK);
    CHECK(mse == 0.0);
    dgp_image* strip = nullptr;
    REQUIRE(dgp_montage(img, masked, img, &strip) == DGP_OK);
    CHECK(dgp_image_shape(strip, &c, &h, &w) == DGP_OK);
    CHECK(w == 28);

    std::vector<float> bad(3 * 8 * 8, 2.0f);
    dgp_image* out_of_range = nullptr;
    CHECK(dgp_image_create(3, 8, 8, bad.data(), &out_of_range) == DGP_ERR_INVALID_ARGUMENT);
    CHECK(out_of_range == nullptr);
    dgp_mask* unknown = nullptr;
    CHECK(dgp_mask_generate("spiral", 8, 8, 1, &unknown) == DGP_ERR_INVALID_ARGUMENT);
    dgp_image* loaded = nullptr;
    CHECK(dgp_image_load("/nonexistent/a.ppm", &loaded) == DGP_ERR_IO);

    dgp_image_free(strip);
    dgp_image_free(masked);
    dgp_mask_free(zeros);
    dgp_mask_free(half);
    dgp_image_free(img);
    dgp_image_free(nullptr);
}

TEST_CASE("train, inpaint and evaluate through the library") {
    const fs::path dir = scratch_dir("pipeline");
    dgp_config* cfg = small_config();
    const std::string data = (dir / "data").string();
    REQUIRE(dgp_generate_dataset(cfg, data.c_str()) == DGP_OK);

    int calls = 0;
    auto progress = [](void* user, int, int, double) { ++*static_cast<int*>(user); };
    const std::string eps_path = (dir / "eps.ckpt").string(), gan_path = (dir / "gan.ckpt").string();
    REQUIRE(dgp_train_ddpm(cfg, data.c_str(), eps_path.c_str(), progress, &calls) == DGP_OK);
    CHECK(calls == 2);
    REQUIRE(dgp_train_gan(cfg, data.c_str(), gan_path.c_str(), nullptr, nullptr) == DGP_OK);

    dgp_model *gan = nullptr, *eps = nullptr;
    REQUIRE(dgp_model_load(gan_path.c_str(), &gan) == DGP_OK);
    REQUIRE(dgp_model_load(eps_path.c_str(), &eps) == DGP_OK);
    CHECK(std::string(dgp_model_kind(gan)) == "generator");
    CHECK(std::string(dgp_model_kind(eps)) == "epsilon_net");
    CHECK(dgp_model_save(gan, (dir / "gan2.ckpt").string().c_str()) == DGP_OK);
    CHECK(slurp(dir / "gan2.ckpt") == slurp(gan_path));

    dgp_image* img = nullptr;
    REQUIRE(dgp_image_load((dir / "data" / "test" / "00000.ppm").string().c_str(), &img) == DGP_OK);
    dgp_mask* mask = nullptr;
    REQUIRE(dgp_mask_generate("box", 16, 16, 9, &mask) == DGP_OK);

    dgp_image* out = nullptr;
    dgp_trace trace{};
    REQUIRE(dgp_inpaint(gan, nullptr, img, mask, cfg, &out, &trace) == DGP_OK);
    CHECK(trace.generator_evals == 6);
    CHECK(trace.epsnet_evals == 0);
    dgp_image_free(out);
    out = nullptr;
    CHECK(dgp_inpaint(eps, nullptr, img, mask, cfg, &out, &trace) == DGP_ERR_KIND);
    REQUIRE(dgp_baseline_inpaint(eps, img, mask, cfg, &out, &trace) == DGP_OK);
    CHECK(trace.epsnet_evals == 10);
    dgp_image_free(out);

    dgp_report* report = nullptr;
    REQUIRE(dgp_config_set(cfg, "eval_families", "half") == DGP_OK);
    REQUIRE(dgp_evaluate(cfg, data.c_str(), gan, eps, nullptr, nullptr, &report) == DGP_OK);
    CHECK(dgp_report_row_count(report) == 2 * 3);
    std::uint64_t g = 0, e = 0;
    CHECK(dgp_report_total_evals(report, "diffganpaint", &g, &e) == DGP_OK);
    CHECK(g == 2 * 6);
    CHECK(e == 0);
    CHECK(dgp_report_total_evals(report, "ddpm_baseline", &g, &e) == DGP_OK);
    CHECK(e == 2 * 10);
    double rate = -1.0;
    CHECK(dgp_report_win_rate(report, "ddpm_baseline", "half", &rate) == DGP_OK);
    CHECK(rate >= 0.0);
    CHECK(dgp_report_save_csv(report, (dir / "r.csv").string().c_str()) == DGP_OK);
    CHECK(fs::file_size(dir / "r.csv") > 0);

    dgp_report_free(report);
    dgp_mask_free(mask);
    dgp_image_free(img);
    dgp_model_free(eps);
    dgp_model_free(gan);
    dgp_config_free(cfg);
}

TEST_CASE("corrupted checkpoints are rejected with a checksum status") {
    const fs::path dir = scratch_dir("corrupt");
    dgp_config* cfg = small_config();
    const std::string path = (dir / "g.ckpt").string();
    REQUIRE(dgp_train_gan(cfg, nullptr, path.c_str(), nullptr, nullptr) == DGP_OK);
    auto bytes = slurp(path);
    bytes[bytes.size() / 2] ^= 0x40;
    std::ofstream(path, std::ios::binary | std::ios::trunc).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    dgp_model* m = nullptr;
    CHECK(dgp_model_load(path.c_str(), &m) == DGP_ERR_CHECKSUM);
    CHECK(m == nullptr);
    dgp_config_free(cfg);
}
