#pragma once

#include <cstddef>
#include <vector>

namespace mpskit {

// H x W x C row-major float image. In pipeline use this is the tensor an
// oracle consumes, i.e. preprocessing (resize, normalize) has already been
// applied; occlusion operates directly on these values.
struct ImageTensor {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> values;  // size = height * width * channels

    ImageTensor() = default;
    ImageTensor(int h, int w, int c, float fill = 0.f);

    float& at(int y, int x, int c) { return values[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
    float at(int y, int x, int c) const { return values[(static_cast<std::size_t>(y) * width + x) * channels + c]; }

    std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }
    std::size_t size() const { return pixel_count() * channels; }
    bool same_dims(const ImageTensor& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }

    // Throws std::invalid_argument on non-positive dims, size mismatch or
    // non-finite values.
    void validate() const;
};

// Class index plus the full score vector it was taken from. The index is
// always an argmax of the scores, ties broken by lowest index.
struct Classification {
    int class_index = 0;
    std::vector<float> scores;

    bool operator==(const Classification&) const = default;
};

// Argmax with ties broken by lowest class index.
Classification make_classification(std::vector<float> scores);

// Bilinear resize of all channels. Used by external-model preprocessing.
ImageTensor resize_bilinear(const ImageTensor& src, int target_h, int target_w);

// Center crop; target dims must not exceed source dims.
ImageTensor center_crop(const ImageTensor& src, int target_h, int target_w);

}  // namespace mpskit
