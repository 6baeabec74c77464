#include "eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace dgp {

double psnr(const Image& a, const Image& b) {
    require_same_dims(a, b, "psnr");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = (static_cast<double>(a.values()[i]) - b.values()[i]) * 0.5;
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(a.size());
    if (mse == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double masked_mse(const Image& a, const Image& b, const Mask& mask) {
    require_same_dims(a, b, "masked_mse");
    require_same_dims(a, mask, "masked_mse");
    const std::size_t plane = mask.size();
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (mask.values()[i % plane] == 0.0f) continue;
        const double d = static_cast<double>(a.values()[i]) - b.values()[i];
        acc += d * d;
        ++count;
    }
    if (count == 0) fail(ErrorCode::InvalidArgument, "empty mask region");
    return acc / static_cast<double>(count);
}

}  // namespace dgp
