#include "mpskit/setmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "mpskit/errors.hpp"

namespace mpskit {

namespace {

constexpr std::int64_t kFar = std::int64_t{1} << 50;  // safe under += square terms

void require_same_dims(const PixelMask& a, const PixelMask& b) {
    if (!a.same_dims(b)) throw DataError("mask dims differ");
}

// 1D squared-distance transform over sampled parabolas (lower envelope scan).
void dt_1d(const std::int64_t* f, std::int64_t* d, int* v, double* z, int n) {
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s;
        for (;;) {
            const int p = v[k];
            s = (static_cast<double>(f[q] - f[p]) +
                 static_cast<double>(static_cast<std::int64_t>(q) * q -
                                     static_cast<std::int64_t>(p) * p)) /
                (2.0 * (q - p));
            if (s > z[k]) break;
            --k;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const std::int64_t diff = q - v[k];
        d[q] = diff * diff + f[v[k]];
    }
}

}  // namespace

std::vector<std::int64_t> squared_distance_transform(const PixelMask& mask) {
    const int h = mask.height;
    const int w = mask.width;
    std::vector<std::int64_t> grid(static_cast<std::size_t>(h) * w);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = mask.bits[i] ? 0 : kFar;

    const int n = std::max(h, w);
    std::vector<std::int64_t> f(static_cast<std::size_t>(n)), d(static_cast<std::size_t>(n));
    std::vector<int> v(static_cast<std::size_t>(n));
    std::vector<double> z(static_cast<std::size_t>(n) + 1);

    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[static_cast<std::size_t>(y)] = grid[static_cast<std::size_t>(y) * w + x];
        dt_1d(f.data(), d.data(), v.data(), z.data(), h);
        for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[static_cast<std::size_t>(y)];
    }
    for (int y = 0; y < h; ++y) {
        std::int64_t* row = grid.data() + static_cast<std::size_t>(y) * w;
        dt_1d(row, d.data(), v.data(), z.data(), w);
        std::copy_n(d.data(), w, row);
    }
    return grid;
}

double dice(const PixelMask& a, const PixelMask& b) {
    require_same_dims(a, b);
    std::size_t inter = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        if (a.bits[i] && b.bits[i]) ++inter;
    }
    const std::size_t sum = a.area() + b.area();
    if (sum == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(sum);
}

double hausdorff(const PixelMask& a, const PixelMask& b) {
    require_same_dims(a, b);
    if (a.empty_mask() || b.empty_mask()) {
        throw DataError("hausdorff distance undefined for an empty mask");
    }
    const std::vector<std::int64_t> to_a = squared_distance_transform(a);
    const std::vector<std::int64_t> to_b = squared_distance_transform(b);
    std::int64_t worst = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        if (a.bits[i]) worst = std::max(worst, to_b[i]);
        if (b.bits[i]) worst = std::max(worst, to_a[i]);
    }
    return std::sqrt(static_cast<double>(worst));
}

PixelMask resample_mask(const PixelMask& mask, int target_h, int target_w) {
    if (target_h < 1 || target_w < 1) throw std::invalid_argument("target dims must be positive");
    // Round-half-down of i*h/t is floor((2*i*h + t - 1) / (2*t)), clamped.
    auto src_index = [](int i, int src_n, int target_n) {
        const long long num = 2ll * i * src_n + target_n - 1;
        const long long idx = num / (2ll * target_n);
        return static_cast<int>(std::min<long long>(idx, src_n - 1));
    };
    PixelMask out(target_h, target_w, false);
    for (int i = 0; i < target_h; ++i) {
        const int sy = src_index(i, mask.height, target_h);
        for (int j = 0; j < target_w; ++j) {
            out.set(i, j, mask.at(sy, src_index(j, mask.width, target_w)));
        }
    }
    return out;
}

PairwiseMatrix pairwise_matrix(const std::vector<MpsRecord>& records, MaskMetric metric) {
    // Keyed maps give ascending model and image order, so means accumulate
    // in a fixed sequence.
    std::map<std::string, std::map<std::string, const MpsRecord*>> by_model;
    for (const MpsRecord& r : records) {
        if (r.degenerate) continue;
        by_model[r.model_id][r.image_id] = &r;
    }
    if (by_model.size() < 2) throw DataError("pairwise comparison needs at least two models");

    std::set<std::string> common;
    bool first = true;
    for (const auto& [model, images] : by_model) {
        std::set<std::string> ids;
        for (const auto& [image_id, rec] : images) ids.insert(image_id);
        if (first) {
            common = std::move(ids);
            first = false;
        } else {
            std::set<std::string> kept;
            std::set_intersection(common.begin(), common.end(), ids.begin(), ids.end(),
                                  std::inserter(kept, kept.begin()));
            common = std::move(kept);
        }
    }
    if (common.empty()) throw DataError("no common non-degenerate images across models");

    PairwiseMatrix matrix;
    matrix.metric = metric;
    for (const auto& [model, images] : by_model) {
        matrix.model_ids.push_back(model);
        for (const auto& [image_id, rec] : images) {
            if (!common.contains(image_id)) continue;
            matrix.grid_height = std::max(matrix.grid_height, rec->mask.height);
            matrix.grid_width = std::max(matrix.grid_width, rec->mask.width);
        }
    }
    matrix.image_count = common.size();

    const std::size_t m = matrix.model_ids.size();
    matrix.values.assign(m * m, metric == MaskMetric::dice ? 1.0 : 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& rows_i = by_model[matrix.model_ids[i]];
        for (std::size_t j = i + 1; j < m; ++j) {
            const auto& rows_j = by_model[matrix.model_ids[j]];
            double sum = 0.0;
            for (const std::string& image_id : common) {
                const PixelMask ma =
                    resample_mask(rows_i.at(image_id)->mask, matrix.grid_height, matrix.grid_width);
                const PixelMask mb =
                    resample_mask(rows_j.at(image_id)->mask, matrix.grid_height, matrix.grid_width);
                sum += metric == MaskMetric::dice ? dice(ma, mb) : hausdorff(ma, mb);
            }
            const double mean = sum / static_cast<double>(common.size());
            matrix.values[i * m + j] = mean;
            matrix.values[j * m + i] = mean;
        }
    }
    return matrix;
}

}  // namespace mpskit
