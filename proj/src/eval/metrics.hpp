#pragma once

#include "imaging/image.hpp"

namespace dgp {

constexpr double kPsnrCap = 99.0;

// Images mapped to [0, 1]; 10 log10(1 / MSE), capped at 99 dB.
double psnr(const Image& a, const Image& b);

// Mean squared error over hole pixels (mask = 1) on the [-1, 1] scale.
double masked_mse(const Image& a, const Image& b, const Mask& mask);

}  // namespace dgp
