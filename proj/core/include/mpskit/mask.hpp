#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mpskit {

struct PixelCoord {
    int y = 0;
    int x = 0;
    bool operator==(const PixelCoord&) const = default;
    auto operator<=>(const PixelCoord&) const = default;
};

// Axis-aligned pixel rectangle: rows [top, top+height), cols [left, left+width).
struct Region {
    int top = 0;
    int left = 0;
    int height = 0;
    int width = 0;

    bool contains(int y, int x) const {
        return y >= top && y < top + height && x >= left && x < left + width;
    }
    long long area() const { return static_cast<long long>(height) * width; }
    bool operator==(const Region&) const = default;
};

// Boolean H x W grid marking a retained-pixel set.
struct PixelMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> bits;  // 0/1, row-major

    PixelMask() = default;
    PixelMask(int h, int w, bool fill = false)
        : height(h), width(w), bits(static_cast<std::size_t>(h) * w, fill ? 1 : 0) {}

    bool at(int y, int x) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int y, int x, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }

    std::size_t area() const;  // count of true bits
    std::size_t size() const { return bits.size(); }
    bool empty_mask() const { return area() == 0; }
    bool same_dims(const PixelMask& o) const { return height == o.height && width == o.width; }

    void fill_region(const Region& r, bool v);

    bool operator==(const PixelMask&) const = default;
};

}  // namespace mpskit
