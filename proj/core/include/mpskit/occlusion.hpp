#pragma once

#include <array>
#include <vector>

#include "mpskit/image.hpp"
#include "mpskit/mask.hpp"
#include "mpskit/rng.hpp"

namespace mpskit {

// Constant per-channel value substituted for occluded pixels. An empty vector
// means all-zero; a single value broadcasts to every channel.
struct BaselineSpec {
    std::vector<float> values;

    float value_for(int channel) const {
        if (values.empty()) return 0.f;
        return values.size() == 1 ? values[0] : values[static_cast<std::size_t>(channel)];
    }
};

// 4-way rectangular split of a parent region. parts[0..3] are the quadrants
// above-left, above-right, below-left, below-right of the split point, and
// form a disjoint cover of the parent.
struct Partition {
    Region parent;
    std::array<Region, 4> parts;
};

// One occlusion mutant: the subset of parts kept at original values.
struct SubsetMutant {
    Partition partition;
    unsigned retained = 0;  // bitmask over parts, bits 0..3
};

// Splits at an interior point: the split point's row/column start the
// below/right quadrants. Requires height >= 2, width >= 2 and the point
// strictly inside (not on the top or left edge), so all four parts are
// nonempty. Throws std::invalid_argument otherwise.
Partition split_region(const Region& region, PixelCoord split_point);

// Uniform draw over the (h-1)*(w-1) valid interior split points.
PixelCoord draw_split_point(const Region& region, Rng& rng);

// Output pixel = original where mask is true, baseline elsewhere.
ImageTensor composite(const ImageTensor& image, const PixelMask& mask, const BaselineSpec& baseline);

// True exactly on carrier ∩ retained parts inside the parent region; outside
// the parent the carrier is copied through.
PixelMask mutant_mask(const SubsetMutant& mutant, const PixelMask& carrier);

// All 16 subsets in canonical order (retained bitmask ascending 0..15).
std::vector<SubsetMutant> enumerate_subsets(const Partition& partition);

}  // namespace mpskit
