#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mpskit/image.hpp"
#include "mpskit/mask.hpp"
#include "mpskit/occlusion.hpp"
#include "mpskit/oracle.hpp"
#include "mpskit/responsibility.hpp"

namespace mpskit {

// One extracted minimal sufficient pixel set for a (model, image) pair.
// `degenerate` marks images whose all-baseline composite already keeps the
// class; such records carry an empty mask and are excluded from size stats.
struct MpsRecord {
    std::string model_id;
    std::string image_id;
    PixelMask mask;
    double area_ratio = 0.0;  // mask.area() / (height * width)
    int predicted_class = -1;
    std::optional<int> ground_truth;
    std::optional<bool> correct;
    bool degenerate = false;
    long long oracle_calls_used = 0;
};

double area_ratio(const PixelMask& mask);

// Flat row-major pixel indices sorted by landscape score descending, ties by
// position ascending. Length = height * width.
std::vector<std::size_t> rank_pixels(const ResponsibilityLandscape& landscape);

// Mask of the first `length` entries of a ranking.
PixelMask prefix_mask(const std::vector<std::size_t>& ranked, std::size_t length, int height,
                      int width);

// Grows ranked-pixel prefixes over the baseline in chunks of
// ceil(chunk_fraction * total), then binary-searches the final chunk for the
// smallest passing prefix. The returned mask always reproduces the image's
// top class (the full prefix is the original image, so a pass exists).
// Fills mask, area_ratio, predicted_class, degenerate, and oracle_calls_used;
// identity fields are the caller's.
MpsRecord extract_mps(const ImageTensor& image, const ResponsibilityLandscape& landscape,
                      const Oracle& oracle, const BaselineSpec& baseline,
                      double chunk_fraction = 0.01);

// True iff compositing the record's mask over the baseline reproduces
// record.predicted_class.
bool verify_sufficiency(const MpsRecord& record, const ImageTensor& image, const Oracle& oracle,
                        const BaselineSpec& baseline);

}  // namespace mpskit
