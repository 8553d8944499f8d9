#pragma once

#include <string>

#include "rdt/image.hpp"

namespace rdt {

// PNG codec for the three modality encodings. Values are normalized to
// [0,1] in memory; RGB and TIR store 8-bit, depth stores 16-bit.
Image load_png(const std::string& path, int expect_ch);
void save_png8(const std::string& path, const Image& img);   // 1 or 3 channels
void save_png16(const std::string& path, const Image& img);  // 1 channel

}  // namespace rdt
