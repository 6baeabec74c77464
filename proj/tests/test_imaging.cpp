#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>

using namespace std::string_literals;

#include "error.hpp"
#include "fileio.hpp"
#include "imaging/image.hpp"
#include "imaging/masks.hpp"
#include "imaging/netpbm.hpp"
#include "imaging/toyshapes.hpp"
#include "numerics/rng.hpp"

using namespace dgp;
namespace fs = std::filesystem;

namespace {

std::vector<unsigned char> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("dgpaint_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Image random_image(Rng& rng, int c, int h, int w) {
    std::vector<float> v(static_cast<std::size_t>(c) * h * w);
    for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
    return Image(c, h, w, std::move(v));
}

}  // namespace

TEST_CASE("byte endpoints map to the ends of [-1, 1]") {
    CHECK(dequantize(0) == -1.0f);
    CHECK(std::fabs(dequantize(255) - 1.0f) <= 1.0f / 127.5f);
    CHECK(quantize(-1.0f) == 0);
    CHECK(quantize(1.0f) == 255);
    CHECK(quantize(-7.0f) == 0);
    CHECK(quantize(7.0f) == 255);
}

TEST_CASE("every byte value survives decode then encode, and values survive within one step") {
    for (int v = 0; v < 256; ++v) {
        const auto b = static_cast<unsigned char>(v);
        CHECK(quantize(dequantize(b)) == b);
    }
    // Any value in range round-trips within the quantization bound.
    Rng rng(3);
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const float x = static_cast<float>(rng.uniform(-1.0, 1.0));
        worst = std::max(worst, double(std::fabs(dequantize(quantize(x)) - x)));
    }
    CHECK(worst <= 1.0 / 127.5);
}

TEST_CASE("PPM and PGM files round trip through disk") {
    const fs::path dir = scratch_dir("netpbm");
    Rng rng(9);
    for (int c : {1, 3}) {
        const Image img = random_image(rng, c, 5, 7);
        const std::string path = (dir / (c == 1 ? "a.pgm" : "a.ppm")).string();
        save_image(img, path);
        const auto bytes = read_file(path);
        CHECK(bytes[0] == 'P');
        CHECK(bytes[1] == (c == 1 ? '5' : '6'));
        const Image back = load_image(path);
        REQUIRE(back.channels() == c);
        REQUIRE(back.height() == 5);
        REQUIRE(back.width() == 7);
        for (std::size_t i = 0; i < img.size(); ++i) CHECK(std::fabs(back.values()[i] - img.values()[i]) <= 1.0f / 127.5f);
        // Loading the quantized file and saving again is byte-stable.
        save_image(back, path);
        CHECK(read_file(path) == bytes);
    }
}

TEST_CASE("netpbm layout is interleaved RGB with a plain header") {
    const Image img(3, 1, 2, {-1.0f, 1.0f, 1.0f, -1.0f, -1.0f, 1.0f});
    const auto bytes = encode_netpbm(img);
    const std::string header = "P6\n2 1\n255\n";
    REQUIRE(bytes.size() == header.size() + 6);
    CHECK(std::string(bytes.begin(), bytes.begin() + header.size()) == header);
    const std::vector<unsigned char> payload(bytes.begin() + header.size(), bytes.end());
    CHECK(payload == std::vector<unsigned char>{0, 255, 0, 255, 0, 255});
}

TEST_CASE("netpbm header comments and whitespace") {
    const Image img = decode_netpbm(bytes_of("P5 # comment\n2\t1 # more\n255\n\x00\xff"s));
    CHECK(img.channels() == 1);
    CHECK(img.values()[0] == -1.0f);
    CHECK(img.values()[1] == doctest::Approx(1.0f));
}

TEST_CASE("netpbm errors") {
    CHECK_THROWS_WITH(decode_netpbm(bytes_of("P6\n1 1\n65535\n\0\0\0\0\0\0"s)), doctest::Contains("unsupported maxval"));
    CHECK_THROWS_WITH(decode_netpbm(bytes_of("P3\n1 1\n255\n1 2 3")), doctest::Contains("wrong magic"));
    CHECK_THROWS_WITH(decode_netpbm(bytes_of("P6\n2 2\n255\n\x01\x02")), doctest::Contains("truncated payload"));
    CHECK_THROWS_WITH(decode_netpbm(bytes_of("P6\n2")), doctest::Contains("malformed header"));
    CHECK_THROWS_WITH(decode_netpbm(bytes_of("P5\nx 2\n255\n")), doctest::Contains("malformed header"));
    CHECK_THROWS_WITH(decode_netpbm(bytes_of("")), doctest::Contains("wrong magic"));
    try {
        (void)load_image("/nonexistent/dir/x.ppm");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Io);
    }
}

TEST_CASE("mask files are strict 0/255 PGMs") {
    const fs::path dir = scratch_dir("maskio");
    Rng rng(1);
    const Mask m = gen_mask_bernoulli(rng, 8, 8, 0.5);
    save_mask(m, (dir / "m.pgm").string());
    CHECK(load_mask((dir / "m.pgm").string()) == m);
    write_file_atomic((dir / "bad.pgm").string(), bytes_of("P5\n1 2\n255\n\x00\x80"s));
    CHECK_THROWS_WITH(load_mask((dir / "bad.pgm").string()), doctest::Contains("0 (known) or 255 (hole)"));
    save_image(Image::filled(3, 2, 2, 1.0f), (dir / "rgb.ppm").string());
    CHECK_THROWS(load_mask((dir / "rgb.ppm").string()));
}

TEST_CASE("image and mask value contracts") {
    CHECK_THROWS(Image(3, 1, 1, {0.0f, 1.5f, 0.0f}));
    CHECK_THROWS(Image(2, 1, 1, {0.0f, 0.0f}));
    CHECK_THROWS(Image(1, 2, 2, {0.0f}));
    CHECK_THROWS(Mask(1, 2, {0.0f, 0.5f}));
    CHECK(Mask(1, 2, {0.0f, 1.0f}).coverage() == 0.5);
}

TEST_CASE("toyshapes are deterministic, in range and per-sample addressable") {
    DatasetSpec spec;
    spec.count = 20;
    spec.seed = 5;
    const auto a = gen_toyshapes(spec);
    const auto b = gen_toyshapes(spec);
    REQUIRE(a.size() == 20);
    CHECK(a == b);
    CHECK(gen_toyshape(spec, 7) == a[7]);
    CHECK(a[3].channels() == 3);
    CHECK(a[3].height() == 32);
    for (const auto& img : a) {
        for (float v : img.values()) {
            CHECK(v >= -1.0f);
            CHECK(v <= 1.0f);
        }
    }
    CHECK_FALSE(a[0] == a[1]);
    spec.seed = 6;
    CHECK_FALSE(gen_toyshape(spec, 7) == a[7]);
    spec.palette = Palette::Gray;
    CHECK(gen_toyshape(spec, 0).channels() == 1);
    spec.size = 4;
    CHECK_THROWS(spec.validate());
}

TEST_CASE("toyshapes per-channel mean over the default 1000 x 32 x 32 set") {
    DatasetSpec spec;
    const auto data = gen_toyshapes(spec);
    double m[3] = {0, 0, 0};
    for (const auto& img : data)
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < 32; ++y)
                for (int x = 0; x < 32; ++x) m[c] += img.at(c, y, x);
    // Reference measurement with seed 0: -0.0026, -0.0112, -0.0169.
    const double frozen[3] = {-0.0026, -0.0112, -0.0169};
    for (int c = 0; c < 3; ++c) {
        m[c] /= 1000.0 * 1024.0;
        CHECK(m[c] > -0.5);
        CHECK(m[c] < 0.5);
        CHECK(std::fabs(m[c] - frozen[c]) < 1e-3);
    }
}

TEST_CASE("half masks cover exactly half") {
    for (HalfSide side : {HalfSide::Left, HalfSide::Right, HalfSide::Top, HalfSide::Bottom}) {
        const Mask m = gen_mask_half(32, 32, side);
        CHECK(m.coverage() == 0.5);
    }
    const Mask left = gen_mask_half(32, 32, HalfSide::Left);
    CHECK(left.hole(0, 0));
    CHECK(left.hole(31, 15));
    CHECK_FALSE(left.hole(0, 16));
}

TEST_CASE("bernoulli coverage concentrates around p") {
    Rng rng(17);
    for (int i = 0; i < 20; ++i) {
        const double cov = gen_mask_bernoulli(rng, 64, 64, 0.3).coverage();
        CHECK(cov >= 0.25);
        CHECK(cov <= 0.35);
    }
    CHECK_THROWS(gen_mask_bernoulli(rng, 8, 8, 0.0));
    CHECK_THROWS(gen_mask_bernoulli(rng, 8, 8, 1.0));
}

TEST_CASE("box coverage always in [0.1, 0.5] and strokes are non-trivial") {
    Rng rng(23);
    for (int i = 0; i < 500; ++i) {
        const int h = rng.uniform_int(8, 40), w = rng.uniform_int(8, 40);
        const double cov = gen_mask_box(rng, h, w).coverage();
        CHECK(cov >= 0.1);
        CHECK(cov <= 0.5);
    }
    for (int i = 0; i < 50; ++i) {
        const Mask m = gen_mask_stroke(rng, 32, 32);
        CHECK(m.hole_count() > 0);
        CHECK(m.hole_count() < 32u * 32u);
    }
}

TEST_CASE("every generated mask is binary") {
    Rng rng(29);
    for (MaskFamily f : all_mask_families()) {
        for (int i = 0; i < 20; ++i) {
            const Mask m = gen_mask(f, rng, 16, 24);
            CHECK(m.height() == 16);
            CHECK(m.width() == 24);
            for (float v : m.values()) CHECK((v == 0.0f || v == 1.0f));
        }
    }
}

TEST_CASE("degenerate mask dimensions are rejected") {
    Rng rng(1);
    CHECK_THROWS_WITH(gen_mask_box(rng, 7, 32), doctest::Contains("degenerate"));
    CHECK_THROWS_WITH(gen_mask_stroke(rng, 32, 4), doctest::Contains("degenerate"));
    CHECK_THROWS_WITH(gen_mask_half(0, 32, HalfSide::Left), doctest::Contains("degenerate"));
    CHECK_THROWS_WITH(gen_mask_bernoulli(rng, 5, 5, 0.3), doctest::Contains("degenerate"));
}

TEST_CASE("mask family names") {
    for (MaskFamily f : all_mask_families()) CHECK(parse_mask_family(to_string(f)) == f);
    CHECK_THROWS(parse_mask_family("blob"));
}

TEST_CASE("apply_mask identities") {
    Rng rng(31);
    const Image img = random_image(rng, 3, 8, 8);
    CHECK(apply_mask(img, Mask::filled(8, 8, 0.0f)) == img);
    const Image holes = apply_mask(img, Mask::filled(8, 8, 1.0f));
    for (float v : holes.values()) CHECK(v == 0.0f);
    const Image ones = Image::filled(3, 8, 8, 1.0f);
    const Image half = apply_mask(ones, gen_mask_half(8, 8, HalfSide::Left));
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) CHECK(half.at(c, y, x) == (x < 4 ? 0.0f : 1.0f));
    CHECK_THROWS(apply_mask(img, Mask::filled(8, 9, 0.0f)));
}

TEST_CASE("apply_mask is idempotent for every family") {
    Rng rng(37);
    for (MaskFamily f : all_mask_families()) {
        const Image img = random_image(rng, 3, 16, 16);
        const Mask m = gen_mask(f, rng, 16, 16);
        const Image once = apply_mask(img, m);
        CHECK(apply_mask(once, m) == once);
    }
}

TEST_CASE("mean_fill uses the known-region mean per channel") {
    const Image img(1, 1, 4, {0.2f, 0.4f, -1.0f, 1.0f});
    const Mask m(1, 4, {0.0f, 0.0f, 1.0f, 1.0f});
    const Image f = mean_fill(img, m);
    CHECK(f.values()[0] == 0.2f);
    CHECK(f.values()[1] == 0.4f);
    CHECK(f.values()[2] == doctest::Approx(0.3f));
    CHECK(f.values()[3] == doctest::Approx(0.3f));
}

TEST_CASE("composite takes holes from the result and known pixels from the input") {
    const Image known(1, 1, 3, {0.1f, 0.2f, 0.3f});
    const Image result(1, 1, 3, {-0.5f, -0.6f, -0.7f});
    const Image out = composite(result, known, Mask(1, 3, {0.0f, 1.0f, 0.0f}));
    CHECK(out == Image(1, 1, 3, {0.1f, -0.6f, 0.3f}));
}

TEST_CASE("montage layout") {
    Rng rng(41);
    const Image a = random_image(rng, 3, 32, 32), b = random_image(rng, 3, 32, 32), c = random_image(rng, 3, 32, 32);
    const Image m = montage(a, b, c);
    CHECK(m.channels() == 3);
    CHECK(m.height() == 32);
    CHECK(m.width() == 32 * 3 + 4);
    for (int ch = 0; ch < 3; ++ch) {
        for (int y = 0; y < 32; ++y) {
            for (int x = 0; x < 32; ++x) {
                CHECK(m.at(ch, y, x) == a.at(ch, y, x));
                CHECK(m.at(ch, y, x + 34) == b.at(ch, y, x));
                CHECK(m.at(ch, y, x + 68) == c.at(ch, y, x));
            }
            for (int x : {32, 33, 66, 67}) CHECK(m.at(ch, y, x) == 1.0f);
        }
    }
    CHECK_THROWS(montage(a, b, random_image(rng, 3, 32, 31)));
}
