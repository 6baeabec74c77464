#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imaging/image.hpp"

namespace dgp {

enum class Palette { Rgb, Gray };

struct DatasetSpec {
    int count = 1000;
    int size = 32;
    std::uint64_t seed = 0;
    int min_shapes = 1;
    int max_shapes = 3;
    Palette palette = Palette::Rgb;

    void validate() const;
};

// Linear-gradient background with 1-3 filled rectangles/circles. Sample i
// depends only on (seed, i); geometry is rasterized with integer arithmetic.
Image gen_toyshape(const DatasetSpec& spec, std::uint64_t index);
std::vector<Image> gen_toyshapes(const DatasetSpec& spec);

std::string to_string(Palette p);
Palette parse_palette(const std::string& name);

}  // namespace dgp
