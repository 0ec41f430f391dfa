#include "mpskit/extraction.hpp"

#include "mpskit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mpskit {

double area_ratio(const PixelMask& mask) {
    if (mask.size() == 0) return 0.0;
    return static_cast<double>(mask.area()) / static_cast<double>(mask.size());
}

std::vector<std::size_t> rank_pixels(const ResponsibilityLandscape& landscape) {
    std::vector<std::size_t> order(landscape.scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (landscape.scores[a] != landscape.scores[b]) {
            return landscape.scores[a] > landscape.scores[b];
        }
        return a < b;
    });
    return order;
}

PixelMask prefix_mask(const std::vector<std::size_t>& ranked, std::size_t length, int height,
                      int width) {
    if (length > ranked.size()) throw std::invalid_argument("prefix length exceeds ranking");
    PixelMask mask(height, width, false);
    for (std::size_t i = 0; i < length; ++i) mask.bits[ranked[i]] = 1;
    return mask;
}

MpsRecord extract_mps(const ImageTensor& image, const ResponsibilityLandscape& landscape,
                      const Oracle& oracle, const BaselineSpec& baseline, double chunk_fraction) {
    if (!(chunk_fraction > 0.0 && chunk_fraction <= 1.0)) {
        throw DataError("chunk_fraction must lie in (0, 1]");
    }
    if (landscape.height != image.height || landscape.width != image.width) {
        throw DataError("landscape dims do not match image");
    }

    MpsRecord record;
    record.oracle_calls_used = 1;
    record.predicted_class = oracle.classify(image).class_index;

    const std::size_t total = image.pixel_count();
    const std::vector<std::size_t> ranked = rank_pixels(landscape);

    auto prefix_passes = [&](std::size_t length) {
        ++record.oracle_calls_used;
        const PixelMask mask = prefix_mask(ranked, length, image.height, image.width);
        return oracle.classify(composite(image, mask, baseline)).class_index ==
               record.predicted_class;
    };

    if (prefix_passes(0)) {
        record.mask = PixelMask(image.height, image.width, false);
        record.area_ratio = 0.0;
        record.degenerate = true;
        return record;
    }

    const std::size_t chunk = static_cast<std::size_t>(
        std::ceil(chunk_fraction * static_cast<double>(total)));

    // Walk chunk boundaries until one passes. The full prefix restores the
    // original image, so `total` passes without a query.
    std::size_t failing = 0;   // largest known-failing prefix length
    std::size_t passing = total;
    for (std::size_t boundary = chunk; boundary < total; boundary += chunk) {
        if (prefix_passes(boundary)) {
            passing = boundary;
            break;
        }
        failing = boundary;
    }

    // Smallest passing length in (failing, passing].
    while (passing - failing > 1) {
        const std::size_t mid = failing + (passing - failing) / 2;
        if (prefix_passes(mid)) {
            passing = mid;
        } else {
            failing = mid;
        }
    }

    record.mask = prefix_mask(ranked, passing, image.height, image.width);
    record.area_ratio = area_ratio(record.mask);
    record.degenerate = false;
    return record;
}

bool verify_sufficiency(const MpsRecord& record, const ImageTensor& image, const Oracle& oracle,
                        const BaselineSpec& baseline) {
    if (record.mask.height != image.height || record.mask.width != image.width) {
        throw DataError("record mask dims do not match image");
    }
    return oracle.classify(composite(image, record.mask, baseline)).class_index ==
           record.predicted_class;
}

}  // namespace mpskit
