#include "imaging/masks.hpp"

#include <algorithm>
#include <cstdlib>

#include "error.hpp"

namespace dgp {

namespace {
void check_dims(int h, int w) {
    if (h < 8 || w < 8) {
        fail(ErrorCode::InvalidArgument, "degenerate mask dimensions " + std::to_string(h) + "x" + std::to_string(w) +
                                             " (need at least 8x8)");
    }
}

void stamp_disk(std::vector<float>& m, int h, int w, int cy, int cx, int r) {
    for (int y = std::max(0, cy - r); y <= std::min(h - 1, cy + r); ++y) {
        for (int x = std::max(0, cx - r); x <= std::min(w - 1, cx + r); ++x) {
            if ((y - cy) * (y - cy) + (x - cx) * (x - cx) <= r * r) m[static_cast<std::size_t>(y) * w + x] = 1.0f;
        }
    }
}
}  // namespace

std::string to_string(MaskFamily f) {
    switch (f) {
        case MaskFamily::Box: return "box";
        case MaskFamily::Stroke: return "stroke";
        case MaskFamily::Half: return "half";
        case MaskFamily::Bernoulli: return "bernoulli";
    }
    return "?";
}

MaskFamily parse_mask_family(std::string_view name) {
    for (auto f : all_mask_families()) {
        if (to_string(f) == name) return f;
    }
    fail(ErrorCode::InvalidArgument, "unknown mask family '" + std::string(name) + "'");
}

const std::vector<MaskFamily>& all_mask_families() {
    static const std::vector<MaskFamily> families{MaskFamily::Box, MaskFamily::Stroke, MaskFamily::Half,
                                                  MaskFamily::Bernoulli};
    return families;
}

Mask gen_mask_box(Rng& rng, int h, int w) {
    check_dims(h, w);
    const long area = static_cast<long>(h) * w;
    // Rejection sampling on the box size keeps coverage inside [0.1, 0.5] exactly.
    for (;;) {
        const int bh = rng.uniform_int(1, h);
        const int bw = rng.uniform_int(1, w);
        const long a = static_cast<long>(bh) * bw;
        if (10 * a < area || 2 * a > area) continue;
        const int y0 = rng.uniform_int(0, h - bh);
        const int x0 = rng.uniform_int(0, w - bw);
        std::vector<float> m(static_cast<std::size_t>(area), 0.0f);
        for (int y = y0; y < y0 + bh; ++y) {
            std::fill_n(m.begin() + static_cast<std::size_t>(y) * w + x0, bw, 1.0f);
        }
        return Mask(h, w, std::move(m));
    }
}

Mask gen_mask_stroke(Rng& rng, int h, int w) {
    check_dims(h, w);
    std::vector<float> m(static_cast<std::size_t>(h) * w, 0.0f);
    const int strokes = rng.uniform_int(1, 3);
    const int max_step = std::max(2, std::min(h, w) / 4);
    for (int s = 0; s < strokes; ++s) {
        const int radius = rng.uniform_int(1, 3);
        int y = rng.uniform_int(0, h - 1);
        int x = rng.uniform_int(0, w - 1);
        const int vertices = rng.uniform_int(3, 8);
        stamp_disk(m, h, w, y, x, radius);
        for (int v = 0; v < vertices; ++v) {
            const int ny = std::clamp(y + rng.uniform_int(-max_step, max_step), 0, h - 1);
            const int nx = std::clamp(x + rng.uniform_int(-max_step, max_step), 0, w - 1);
            // Bresenham walk from (y, x) to (ny, nx), stamping the brush.
            const int dy = -std::abs(ny - y), dx = std::abs(nx - x);
            const int sy = y < ny ? 1 : -1, sx = x < nx ? 1 : -1;
            int err = dx + dy;
            for (;;) {
                stamp_disk(m, h, w, y, x, radius);
                if (y == ny && x == nx) break;
                const int e2 = 2 * err;
                if (e2 >= dy) {
                    err += dy;
                    x += sx;
                }
                if (e2 <= dx) {
                    err += dx;
                    y += sy;
                }
            }
        }
    }
    return Mask(h, w, std::move(m));
}

Mask gen_mask_half(int h, int w, HalfSide side) {
    check_dims(h, w);
    std::vector<float> m(static_cast<std::size_t>(h) * w, 0.0f);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool hole = false;
            switch (side) {
                case HalfSide::Left: hole = x < w / 2; break;
                case HalfSide::Right: hole = x >= w - w / 2; break;
                case HalfSide::Top: hole = y < h / 2; break;
                case HalfSide::Bottom: hole = y >= h - h / 2; break;
            }
            if (hole) m[static_cast<std::size_t>(y) * w + x] = 1.0f;
        }
    }
    return Mask(h, w, std::move(m));
}

Mask gen_mask_bernoulli(Rng& rng, int h, int w, double p) {
    check_dims(h, w);
    if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::InvalidArgument, "bernoulli mask probability must be in (0, 1)");
    std::vector<float> m(static_cast<std::size_t>(h) * w);
    for (auto& v : m) v = rng.bernoulli(p) ? 1.0f : 0.0f;
    return Mask(h, w, std::move(m));
}

Mask gen_mask(MaskFamily family, Rng& rng, int h, int w) {
    switch (family) {
        case MaskFamily::Box: return gen_mask_box(rng, h, w);
        case MaskFamily::Stroke: return gen_mask_stroke(rng, h, w);
        case MaskFamily::Half: return gen_mask_half(h, w, static_cast<HalfSide>(rng.uniform_int(0, 3)));
        case MaskFamily::Bernoulli: return gen_mask_bernoulli(rng, h, w, kDefaultBernoulliP);
    }
    fail(ErrorCode::InvalidArgument, "unknown mask family");
}

}  // namespace dgp
