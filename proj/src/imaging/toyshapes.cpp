#include "imaging/toyshapes.hpp"

#include <algorithm>

#include "error.hpp"
#include "numerics/rng.hpp"

namespace dgp {

void DatasetSpec::validate() const {
    if (count < 1) fail(ErrorCode::InvalidArgument, "dataset count must be >= 1");
    if (size < 8) fail(ErrorCode::InvalidArgument, "dataset image size must be >= 8");
    if (min_shapes < 0 || max_shapes < min_shapes) fail(ErrorCode::InvalidArgument, "invalid shape-count range");
}

Image gen_toyshape(const DatasetSpec& spec, std::uint64_t index) {
    spec.validate();
    Rng rng = Rng(spec.seed).split(index);
    const int c = spec.palette == Palette::Rgb ? 3 : 1;
    const int n = spec.size;
    const std::size_t plane = static_cast<std::size_t>(n) * n;
    std::vector<float> px(plane * c);

    auto random_color = [&] {
        std::vector<float> col(c);
        for (auto& v : col) v = static_cast<float>(rng.uniform(-1.0, 1.0));
        return col;
    };

    // Background: projection onto an integer direction, normalized to [0, 1].
    int dx = 0, dy = 0;
    while (dx == 0 && dy == 0) {
        dx = rng.uniform_int(-2, 2);
        dy = rng.uniform_int(-2, 2);
    }
    const auto from = random_color();
    const auto to = random_color();
    const int lo = std::min(0, dx * (n - 1)) + std::min(0, dy * (n - 1));
    const int hi = std::max(0, dx * (n - 1)) + std::max(0, dy * (n - 1));
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const float t = static_cast<float>(x * dx + y * dy - lo) / static_cast<float>(hi - lo);
            for (int ch = 0; ch < c; ++ch) px[ch * plane + y * n + x] = from[ch] + (to[ch] - from[ch]) * t;
        }
    }

    const int shapes = rng.uniform_int(spec.min_shapes, spec.max_shapes);
    for (int s = 0; s < shapes; ++s) {
        const bool circle = rng.bernoulli(0.5);
        const auto col = random_color();
        auto paint = [&](int y, int x) {
            for (int ch = 0; ch < c; ++ch) px[ch * plane + y * n + x] = col[ch];
        };
        if (circle) {
            const int r = rng.uniform_int(std::max(1, n / 16), std::max(2, n / 6));
            const int cy = rng.uniform_int(0, n - 1), cx = rng.uniform_int(0, n - 1);
            for (int y = 0; y < n; ++y) {
                for (int x = 0; x < n; ++x) {
                    if ((y - cy) * (y - cy) + (x - cx) * (x - cx) <= r * r) paint(y, x);
                }
            }
        } else {
            const int h = rng.uniform_int(std::max(2, n / 8), std::max(3, n / 3));
            const int w = rng.uniform_int(std::max(2, n / 8), std::max(3, n / 3));
            const int y0 = rng.uniform_int(0, n - h), x0 = rng.uniform_int(0, n - w);
            for (int y = y0; y < y0 + h; ++y) {
                for (int x = x0; x < x0 + w; ++x) paint(y, x);
            }
        }
    }
    for (auto& v : px) v = std::clamp(v, -1.0f, 1.0f);
    return Image(c, n, n, std::move(px));
}

std::vector<Image> gen_toyshapes(const DatasetSpec& spec) {
    spec.validate();
    std::vector<Image> out;
    out.reserve(spec.count);
    for (int i = 0; i < spec.count; ++i) out.push_back(gen_toyshape(spec, static_cast<std::uint64_t>(i)));
    return out;
}

std::string to_string(Palette p) { return p == Palette::Rgb ? "rgb" : "gray"; }

Palette parse_palette(const std::string& name) {
    if (name == "rgb") return Palette::Rgb;
    if (name == "gray") return Palette::Gray;
    fail(ErrorCode::InvalidArgument, "unknown palette '" + name + "' (expected rgb or gray)");
}

}  // namespace dgp
