#include "imaging/image.hpp"

#include <algorithm>
#include <string>

#include "error.hpp"

namespace dgp {

namespace {
void check_dims(int c, int h, int w, std::size_t n) {
    if (c < 1 || h < 1 || w < 1) fail(ErrorCode::Shape, "image dimensions must be positive");
    if (static_cast<std::size_t>(c) * h * w != n) fail(ErrorCode::Shape, "image value count does not match C*H*W");
}

Shape image_shape(const Tensor& t) {
    if (t.rank() == 3) return t.shape();
    if (t.rank() == 4 && t.dim(0) == 1) return {t.dim(1), t.dim(2), t.dim(3)};
    fail(ErrorCode::Shape, "expected an image tensor [C,H,W] or [1,C,H,W], got " + shape_str(t.shape()));
}
}  // namespace

Image::Image(int channels, int height, int width, std::vector<float> values)
    : c_(channels), h_(height), w_(width), values_(std::move(values)) {
    check_dims(c_, h_, w_, values_.size());
    if (c_ != 1 && c_ != 3) fail(ErrorCode::Shape, "images must have 1 or 3 channels, got " + std::to_string(c_));
    for (float v : values_) {
        if (!(v >= -1.0f && v <= 1.0f)) fail(ErrorCode::InvalidArgument, "image value outside [-1, 1]");
    }
}

Image Image::filled(int channels, int height, int width, float value) {
    return Image(channels, height, width,
                 std::vector<float>(static_cast<std::size_t>(std::max(channels, 0)) * std::max(height, 0) *
                                        std::max(width, 0),
                                    value));
}

Image Image::from_tensor(const Tensor& t) {
    const auto s = image_shape(t);
    return Image(s[0], s[1], s[2], {t.data().begin(), t.data().end()});
}

Image Image::from_tensor_clamped(const Tensor& t) {
    const auto s = image_shape(t);
    std::vector<float> v(t.data().begin(), t.data().end());
    for (auto& x : v) x = std::clamp(x, -1.0f, 1.0f);
    return Image(s[0], s[1], s[2], std::move(v));
}

Tensor Image::to_tensor() const { return Tensor({1, c_, h_, w_}, values_); }

Mask::Mask(int height, int width, std::vector<float> values) : h_(height), w_(width), values_(std::move(values)) {
    check_dims(1, h_, w_, values_.size());
    for (float v : values_) {
        if (v != 0.0f && v != 1.0f) fail(ErrorCode::InvalidArgument, "mask values must be exactly 0 or 1");
    }
}

Mask Mask::filled(int height, int width, float value) {
    return Mask(height, width, std::vector<float>(static_cast<std::size_t>(std::max(height, 0)) * std::max(width, 0), value));
}

Mask Mask::from_image(const Image& img) {
    if (img.channels() != 1) fail(ErrorCode::Shape, "mask image must have one channel");
    std::vector<float> v(img.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const float x = img.values()[i];
        if (x == 1.0f) v[i] = 1.0f;
        else if (x == -1.0f) v[i] = 0.0f;
        else fail(ErrorCode::InvalidArgument, "mask pixels must be black (known) or white (hole)");
    }
    return Mask(img.height(), img.width(), std::move(v));
}

double Mask::coverage() const { return static_cast<double>(hole_count()) / static_cast<double>(values_.size()); }

std::size_t Mask::hole_count() const {
    return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), 1.0f));
}

Image Mask::to_image() const {
    std::vector<float> v(values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = values_[i] != 0.0f ? 1.0f : -1.0f;
    return Image(1, h_, w_, std::move(v));
}

Tensor Mask::to_tensor() const { return Tensor({1, 1, h_, w_}, values_); }

void require_same_dims(const Image& img, const Mask& mask, const char* op) {
    if (img.height() != mask.height() || img.width() != mask.width()) {
        fail(ErrorCode::Shape, std::string(op) + ": image is " + std::to_string(img.height()) + "x" +
                                   std::to_string(img.width()) + " but mask is " + std::to_string(mask.height()) +
                                   "x" + std::to_string(mask.width()));
    }
}

void require_same_dims(const Image& a, const Image& b, const char* op) {
    if (a.channels() != b.channels() || a.height() != b.height() || a.width() != b.width()) {
        fail(ErrorCode::Shape, std::string(op) + ": image dimensions differ");
    }
}

Image apply_mask(const Image& img, const Mask& mask) {
    require_same_dims(img, mask, "apply_mask");
    const std::size_t plane = mask.size();
    std::vector<float> out(img.values().begin(), img.values().end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (mask.values()[i % plane] != 0.0f) out[i] = 0.0f;
    }
    return Image(img.channels(), img.height(), img.width(), std::move(out));
}

Image mean_fill(const Image& img, const Mask& mask) {
    require_same_dims(img, mask, "mean_fill");
    const std::size_t plane = mask.size();
    std::vector<float> out(img.values().begin(), img.values().end());
    for (int c = 0; c < img.channels(); ++c) {
        double acc = 0.0;
        std::size_t known = 0;
        for (std::size_t i = 0; i < plane; ++i) {
            if (mask.values()[i] == 0.0f) {
                acc += img.values()[c * plane + i];
                ++known;
            }
        }
        const float fill = known ? static_cast<float>(acc / static_cast<double>(known)) : 0.0f;
        for (std::size_t i = 0; i < plane; ++i) {
            if (mask.values()[i] != 0.0f) out[c * plane + i] = fill;
        }
    }
    return Image(img.channels(), img.height(), img.width(), std::move(out));
}

Image composite(const Image& result, const Image& known, const Mask& mask) {
    require_same_dims(result, known, "composite");
    require_same_dims(result, mask, "composite");
    const std::size_t plane = mask.size();
    std::vector<float> out(known.values().begin(), known.values().end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (mask.values()[i % plane] != 0.0f) out[i] = result.values()[i];
    }
    return Image(known.channels(), known.height(), known.width(), std::move(out));
}

Image montage(const Image& original, const Image& masked, const Image& result) {
    require_same_dims(original, masked, "montage");
    require_same_dims(original, result, "montage");
    constexpr int kSeparator = 2;
    const int c = original.channels(), h = original.height(), w = original.width();
    const int total_w = 3 * w + 2 * kSeparator;
    std::vector<float> out(static_cast<std::size_t>(c) * h * total_w, 1.0f);
    const Image* panels[] = {&original, &masked, &result};
    for (int p = 0; p < 3; ++p) {
        const int x0 = p * (w + kSeparator);
        for (int ch = 0; ch < c; ++ch) {
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    out[(static_cast<std::size_t>(ch) * h + y) * total_w + x0 + x] = panels[p]->at(ch, y, x);
                }
            }
        }
    }
    return Image(c, h, total_w, std::move(out));
}

}  // namespace dgp
