#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mpskit/image.hpp"
#include "mpskit/mask.hpp"

namespace mpskit {

// Uniform black-box inference interface. classify() consumes an already
// preprocessed tensor, so occlusion baselines land on the values the model
// actually sees; preprocess() maps a raw dataset image to that tensor.
class Oracle {
public:
    virtual ~Oracle() = default;

    virtual const std::string& model_id() const = 0;
    virtual const std::string& architecture_tag() const = 0;
    virtual int input_height() const = 0;
    virtual int input_width() const = 0;
    virtual int input_channels() const = 0;
    virtual int class_count() const = 0;

    // Handles declaring false are serialized by the pipeline.
    virtual bool thread_safe() const { return true; }

    // Deterministic: identical inputs yield identical results.
    virtual Classification classify(const ImageTensor& image) const = 0;

    // Raw dataset image -> oracle input tensor. Default: validate dims only.
    virtual ImageTensor preprocess(const ImageTensor& raw) const;

    // Elementwise identical to repeated classify(); order preserved.
    std::vector<Classification> classify_batch(std::span<const ImageTensor> images) const;

protected:
    void check_dims(const ImageTensor& image) const;
};

using OracleHandle = std::shared_ptr<const Oracle>;

enum class SyntheticKind { pixel_key, threshold_region, linear };

// Built-in classifiers with analytically known minimal sufficient sets.
//
//   pixel_key:        class 1 iff every key pixel is off-baseline, i.e. some
//                     channel deviates from 0 by more than match_tolerance.
//                     The key set is then the unique minimal sufficient set
//                     for any image whose key pixels are off-baseline.
//   threshold_region: class 1 iff at least `threshold` pixels of `region`
//                     are off-baseline.
//   linear:           scores = weight matrix times the flattened image.
struct SyntheticOracleSpec {
    SyntheticKind kind = SyntheticKind::pixel_key;
    std::string model_id = "synthetic";
    std::string architecture_tag = "synthetic";
    int input_height = 0;
    int input_width = 0;
    int input_channels = 1;
    float match_tolerance = 0.f;

    std::vector<PixelCoord> key_pixels;  // pixel_key

    Region region;      // threshold_region
    int threshold = 1;  // 1 <= threshold <= region.area()

    std::vector<float> weights;  // linear: class_count x (H*W*C), row-major
    int linear_class_count = 0;

    void validate() const;  // throws std::invalid_argument
};

OracleHandle make_synthetic_oracle(const SyntheticOracleSpec& spec);

}  // namespace mpskit
