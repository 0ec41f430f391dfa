#pragma once

#include <string>

#include "mpskit/image.hpp"
#include "mpskit/mask.hpp"

namespace mpskit {

// Masks persist as 8-bit single-channel PNG: 0 = occluded, 255 = retained.
// Writing is deterministic (fixed filter/compression, no ancillary chunks),
// so identical masks produce byte-identical files.
void write_mask_png(const PixelMask& mask, const std::string& path);
PixelMask read_mask_png(const std::string& path);

// Dataset images: any 8/16-bit gray / gray+alpha / RGB / RGBA PNG, decoded to
// a float tensor in [0,1] with 1 or 3 channels (alpha dropped).
ImageTensor read_image_png(const std::string& path);

// 8-bit PNG from a [0,1] float tensor (1 or 3 channels); values are clamped.
void write_image_png(const ImageTensor& image, const std::string& path);

}  // namespace mpskit
