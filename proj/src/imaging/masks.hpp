#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "imaging/image.hpp"
#include "numerics/rng.hpp"

namespace dgp {

enum class MaskFamily { Box, Stroke, Half, Bernoulli };
enum class HalfSide { Left, Right, Top, Bottom };

std::string to_string(MaskFamily f);
MaskFamily parse_mask_family(std::string_view name);
const std::vector<MaskFamily>& all_mask_families();

// Axis-aligned rectangle covering 10-50% of the area.
Mask gen_mask_box(Rng& rng, int height, int width);
// Random-walk brush strokes, brush radius 1-3.
Mask gen_mask_stroke(Rng& rng, int height, int width);
Mask gen_mask_half(int height, int width, HalfSide side);
Mask gen_mask_bernoulli(Rng& rng, int height, int width, double p);

constexpr double kDefaultBernoulliP = 0.3;

// One mask of the given family; the half side is drawn from `rng`.
Mask gen_mask(MaskFamily family, Rng& rng, int height, int width);

}  // namespace dgp
