#pragma once

#include <string>
#include <vector>

#include "imaging/image.hpp"

namespace dgp {

// Binary PGM (P5, one channel) and PPM (P6, three channels), maxval 255.
// Byte v maps to v / 127.5 - 1.
Image decode_netpbm(const std::vector<unsigned char>& bytes);
std::vector<unsigned char> encode_netpbm(const Image& img);

Image load_image(const std::string& path);
void save_image(const Image& img, const std::string& path);

// PGM with 0 = known, 255 = hole.
Mask load_mask(const std::string& path);
void save_mask(const Mask& mask, const std::string& path);

unsigned char quantize(float x);
float dequantize(unsigned char v);

}  // namespace dgp
