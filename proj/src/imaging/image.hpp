#pragma once

#include <span>
#include <vector>

#include "numerics/tensor.hpp"

namespace dgp {

// Pixel grid (C,H,W) with every value in [-1, 1].
class Image {
public:
    Image() = default;
    Image(int channels, int height, int width, std::vector<float> values);
    static Image filled(int channels, int height, int width, float value);
    // Accepts [C,H,W] or [1,C,H,W].
    static Image from_tensor(const Tensor& t);
    // Same as from_tensor after clamping into [-1, 1].
    static Image from_tensor_clamped(const Tensor& t);

    int channels() const { return c_; }
    int height() const { return h_; }
    int width() const { return w_; }
    std::size_t size() const { return values_.size(); }
    std::span<const float> values() const { return values_; }
    float at(int c, int y, int x) const { return values_[(static_cast<std::size_t>(c) * h_ + y) * w_ + x]; }

    // [1,C,H,W]
    Tensor to_tensor() const;

    bool operator==(const Image&) const = default;

private:
    int c_ = 0, h_ = 0, w_ = 0;
    std::vector<float> values_;
};

// Binary hole indicator (1,H,W): 1 = missing, 0 = known.
class Mask {
public:
    Mask() = default;
    Mask(int height, int width, std::vector<float> values);
    static Mask filled(int height, int width, float value);
    static Mask from_image(const Image& img);

    int height() const { return h_; }
    int width() const { return w_; }
    std::size_t size() const { return values_.size(); }
    std::span<const float> values() const { return values_; }
    bool hole(int y, int x) const { return values_[static_cast<std::size_t>(y) * w_ + x] != 0.0f; }
    double coverage() const;
    std::size_t hole_count() const;

    Image to_image() const;
    // [1,1,H,W]
    Tensor to_tensor() const;

    bool operator==(const Mask&) const = default;

private:
    int h_ = 0, w_ = 0;
    std::vector<float> values_;
};

void require_same_dims(const Image& img, const Mask& mask, const char* op);
void require_same_dims(const Image& a, const Image& b, const char* op);

// img * (1 - mask): holes become 0.0, known pixels are copied exactly.
Image apply_mask(const Image& img, const Mask& mask);

// Fills holes with the per-channel mean of the known region.
Image mean_fill(const Image& img, const Mask& mask);

// result * mask + known * (1 - mask), with known pixels copied exactly.
Image composite(const Image& result, const Image& known, const Mask& mask);

// original | masked | result, separated by 2-pixel white columns.
Image montage(const Image& original, const Image& masked, const Image& result);

}  // namespace dgp
