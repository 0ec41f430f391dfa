#include "mpskit/mask.hpp"

#include <algorithm>

namespace mpskit {

std::size_t PixelMask::area() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

void PixelMask::fill_region(const Region& r, bool v) {
    for (int y = r.top; y < r.top + r.height; ++y)
        std::fill_n(bits.begin() + static_cast<std::size_t>(y) * width + r.left, r.width,
                    static_cast<std::uint8_t>(v ? 1 : 0));
}

}  // namespace mpskit
