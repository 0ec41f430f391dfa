#include "mpskit/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mpskit {

ImageTensor::ImageTensor(int h, int w, int c, float fill)
    : height(h), width(w), channels(c),
      values(static_cast<std::size_t>(h) * w * c, fill) {}

void ImageTensor::validate() const {
    if (height < 1 || width < 1 || channels < 1)
        throw std::invalid_argument("ImageTensor: dims must be >= 1, got " + std::to_string(height) +
                                    "x" + std::to_string(width) + "x" + std::to_string(channels));
    if (values.size() != size())
        throw std::invalid_argument("ImageTensor: value count " + std::to_string(values.size()) +
                                    " does not match dims");
    for (float v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("ImageTensor: non-finite value");
}

Classification make_classification(std::vector<float> scores) {
    if (scores.empty()) throw std::invalid_argument("make_classification: empty score vector");
    int best = 0;
    for (int i = 1; i < static_cast<int>(scores.size()); ++i)
        if (scores[i] > scores[best]) best = i;  // strict >: ties keep the lowest index
    return Classification{best, std::move(scores)};
}

ImageTensor resize_bilinear(const ImageTensor& src, int target_h, int target_w) {
    if (target_h < 1 || target_w < 1)
        throw std::invalid_argument("resize_bilinear: target dims must be >= 1");
    if (src.height == target_h && src.width == target_w) return src;

    ImageTensor out(target_h, target_w, src.channels);
    const double sy = static_cast<double>(src.height) / target_h;
    const double sx = static_cast<double>(src.width) / target_w;
    for (int y = 0; y < target_h; ++y) {
        // pixel-center alignment
        double fy = (y + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(src.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < target_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(src.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, src.width - 1);
            const double wx = fx - x0;
            for (int c = 0; c < src.channels; ++c) {
                const double top = src.at(y0, x0, c) * (1.0 - wx) + src.at(y0, x1, c) * wx;
                const double bot = src.at(y1, x0, c) * (1.0 - wx) + src.at(y1, x1, c) * wx;
                out.at(y, x, c) = static_cast<float>(top * (1.0 - wy) + bot * wy);
            }
        }
    }
    return out;
}

ImageTensor center_crop(const ImageTensor& src, int target_h, int target_w) {
    if (target_h > src.height || target_w > src.width)
        throw std::invalid_argument("center_crop: target exceeds source dims");
    const int off_y = (src.height - target_h) / 2;
    const int off_x = (src.width - target_w) / 2;
    ImageTensor out(target_h, target_w, src.channels);
    for (int y = 0; y < target_h; ++y)
        for (int x = 0; x < target_w; ++x)
            for (int c = 0; c < src.channels; ++c)
                out.at(y, x, c) = src.at(y + off_y, x + off_x, c);
    return out;
}

}  // namespace mpskit
