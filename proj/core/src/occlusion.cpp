#include "mpskit/occlusion.hpp"

#include <stdexcept>
#include <string>

namespace mpskit {

namespace {

std::string region_str(const Region& r) {
    return "(top=" + std::to_string(r.top) + ", left=" + std::to_string(r.left) +
           ", h=" + std::to_string(r.height) + ", w=" + std::to_string(r.width) + ")";
}

}  // namespace

Partition split_region(const Region& region, PixelCoord split_point) {
    if (region.height < 2 || region.width < 2)
        throw std::invalid_argument("split_region: region too small to split " + region_str(region));
    const int y = split_point.y;
    const int x = split_point.x;
    if (y <= region.top || y > region.top + region.height - 1 ||
        x <= region.left || x > region.left + region.width - 1)
        throw std::invalid_argument("split_region: split point (" + std::to_string(y) + "," +
                                    std::to_string(x) + ") not interior to " + region_str(region));

    const int top_h = y - region.top;
    const int bot_h = region.top + region.height - y;
    const int left_w = x - region.left;
    const int right_w = region.left + region.width - x;

    Partition p;
    p.parent = region;
    p.parts[0] = Region{region.top, region.left, top_h, left_w};   // above-left
    p.parts[1] = Region{region.top, x, top_h, right_w};            // above-right
    p.parts[2] = Region{y, region.left, bot_h, left_w};            // below-left
    p.parts[3] = Region{y, x, bot_h, right_w};                     // below-right
    return p;
}

PixelCoord draw_split_point(const Region& region, Rng& rng) {
    if (region.height < 2 || region.width < 2)
        throw std::invalid_argument("draw_split_point: region too small to split " + region_str(region));
    const std::uint64_t rows = static_cast<std::uint64_t>(region.height - 1);
    const std::uint64_t cols = static_cast<std::uint64_t>(region.width - 1);
    const std::uint64_t idx = uniform_below(rng, rows * cols);
    return PixelCoord{region.top + 1 + static_cast<int>(idx / cols),
                      region.left + 1 + static_cast<int>(idx % cols)};
}

ImageTensor composite(const ImageTensor& image, const PixelMask& mask, const BaselineSpec& baseline) {
    if (mask.height != image.height || mask.width != image.width)
        throw std::invalid_argument("composite: mask dims " + std::to_string(mask.height) + "x" +
                                    std::to_string(mask.width) + " do not match image " +
                                    std::to_string(image.height) + "x" + std::to_string(image.width));
    ImageTensor out(image.height, image.width, image.channels);
    const int c_count = image.channels;
    for (std::size_t p = 0; p < mask.size(); ++p) {
        const std::size_t base = p * c_count;
        if (mask.bits[p]) {
            for (int c = 0; c < c_count; ++c) out.values[base + c] = image.values[base + c];
        } else {
            for (int c = 0; c < c_count; ++c) out.values[base + c] = baseline.value_for(c);
        }
    }
    return out;
}

PixelMask mutant_mask(const SubsetMutant& mutant, const PixelMask& carrier) {
    const Partition& part = mutant.partition;
    if (part.parent.top + part.parent.height > carrier.height ||
        part.parent.left + part.parent.width > carrier.width)
        throw std::invalid_argument("mutant_mask: partition exceeds carrier dims");

    PixelMask out = carrier;
    out.fill_region(part.parent, false);
    for (int i = 0; i < 4; ++i) {
        if (!(mutant.retained & (1u << i))) continue;
        const Region& r = part.parts[i];
        for (int y = r.top; y < r.top + r.height; ++y)
            for (int x = r.left; x < r.left + r.width; ++x)
                if (carrier.at(y, x)) out.set(y, x, true);
    }
    return out;
}

std::vector<SubsetMutant> enumerate_subsets(const Partition& partition) {
    std::vector<SubsetMutant> out;
    out.reserve(16);
    for (unsigned b = 0; b < 16; ++b) out.push_back(SubsetMutant{partition, b});
    return out;
}

}  // namespace mpskit
