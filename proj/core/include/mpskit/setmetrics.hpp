#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mpskit/extraction.hpp"
#include "mpskit/mask.hpp"

namespace mpskit {

// 2|a∩b| / (|a|+|b|). Both empty compares as identical (1.0); exactly one
// empty gives 0.0.
double dice(const PixelMask& a, const PixelMask& b);

// Exact symmetric Hausdorff distance in pixel units. Throws DataError when
// either mask is empty (degenerate records must be filtered upstream).
double hausdorff(const PixelMask& a, const PixelMask& b);

// Squared Euclidean distance from every cell to the nearest true cell,
// exact in integers. All-false mask gives all cells the +inf sentinel.
std::vector<std::int64_t> squared_distance_transform(const PixelMask& mask);

// Nearest-neighbor resample with round-half-down source indexing:
// out(i,j) = mask(rhd(i*h/target_h), rhd(j*w/target_w)).
PixelMask resample_mask(const PixelMask& mask, int target_h, int target_w);

enum class MaskMetric { dice, hausdorff };

// Mean per-image metric for every model pair, on the shared reference grid
// (max height and max width among compared models, stated in report output).
struct PairwiseMatrix {
    MaskMetric metric = MaskMetric::dice;
    std::vector<std::string> model_ids;  // ascending; rows and columns
    int grid_height = 0;
    int grid_width = 0;
    std::size_t image_count = 0;  // common non-degenerate images
    std::vector<double> values;   // row-major, model count squared

    double at(std::size_t i, std::size_t j) const { return values[i * model_ids.size() + j]; }
};

// Drops degenerate records, intersects per-model image sets, resamples every
// mask to the reference grid, and averages the metric per model pair.
// Diagonal is exactly 1.0 for dice and 0.0 for hausdorff.
PairwiseMatrix pairwise_matrix(const std::vector<MpsRecord>& records, MaskMetric metric);

}  // namespace mpskit
