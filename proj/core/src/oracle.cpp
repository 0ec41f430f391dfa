#include "mpskit/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

#include "mpskit/errors.hpp"

namespace mpskit {
namespace {

std::string dim_mismatch_message(const Oracle& oracle, const ImageTensor& image) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "oracle '%s' expects %dx%dx%d input, got %dx%dx%d",
                  oracle.model_id().c_str(), oracle.input_height(), oracle.input_width(),
                  oracle.input_channels(), image.height, image.width, image.channels);
    return buf;
}

}  // namespace

void Oracle::check_dims(const ImageTensor& image) const {
    if (image.height != input_height() || image.width != input_width() ||
        image.channels != input_channels()) {
        throw DataError(dim_mismatch_message(*this, image));
    }
}

ImageTensor Oracle::preprocess(const ImageTensor& raw) const {
    check_dims(raw);
    return raw;
}

std::vector<Classification> Oracle::classify_batch(std::span<const ImageTensor> images) const {
    std::vector<Classification> out;
    out.reserve(images.size());
    for (const ImageTensor& image : images) out.push_back(classify(image));
    return out;
}

namespace {

class SyntheticOracle : public Oracle {
public:
    explicit SyntheticOracle(SyntheticOracleSpec spec) : spec_(std::move(spec)) {
        spec_.validate();
    }

    const std::string& model_id() const override { return spec_.model_id; }
    const std::string& architecture_tag() const override { return spec_.architecture_tag; }
    int input_height() const override { return spec_.input_height; }
    int input_width() const override { return spec_.input_width; }
    int input_channels() const override { return spec_.input_channels; }

    int class_count() const override {
        return spec_.kind == SyntheticKind::linear ? spec_.linear_class_count : 2;
    }

    Classification classify(const ImageTensor& image) const override {
        check_dims(image);
        switch (spec_.kind) {
            case SyntheticKind::pixel_key:
                return boolean_result(all_keys_active(image));
            case SyntheticKind::threshold_region:
                return boolean_result(active_region_count(image) >= spec_.threshold);
            case SyntheticKind::linear:
                return linear_result(image);
        }
        throw std::logic_error("unreachable synthetic kind");
    }

private:
    // Active: some channel deviates from the zero baseline beyond tolerance.
    bool pixel_active(const ImageTensor& image, int y, int x) const {
        for (int c = 0; c < image.channels; ++c) {
            if (std::fabs(image.at(y, x, c)) > spec_.match_tolerance) return true;
        }
        return false;
    }

    bool all_keys_active(const ImageTensor& image) const {
        for (const PixelCoord& p : spec_.key_pixels) {
            if (!pixel_active(image, p.y, p.x)) return false;
        }
        return true;
    }

    int active_region_count(const ImageTensor& image) const {
        int count = 0;
        const Region& r = spec_.region;
        for (int y = r.top; y < r.top + r.height; ++y) {
            for (int x = r.left; x < r.left + r.width; ++x) {
                if (pixel_active(image, y, x)) ++count;
            }
        }
        return count;
    }

    static Classification boolean_result(bool positive) {
        Classification result;
        result.class_index = positive ? 1 : 0;
        result.scores = positive ? std::vector<float>{0.f, 1.f} : std::vector<float>{1.f, 0.f};
        return result;
    }

    Classification linear_result(const ImageTensor& image) const {
        const std::size_t n = image.size();
        std::vector<float> scores(static_cast<std::size_t>(spec_.linear_class_count), 0.f);
        for (int k = 0; k < spec_.linear_class_count; ++k) {
            const float* row = spec_.weights.data() + static_cast<std::size_t>(k) * n;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(row[i]) * image.values[i];
            scores[static_cast<std::size_t>(k)] = static_cast<float>(acc);
        }
        return make_classification(std::move(scores));
    }

    SyntheticOracleSpec spec_;
};

}  // namespace

void SyntheticOracleSpec::validate() const {
    if (input_height < 1 || input_width < 1 || input_channels < 1) {
        throw std::invalid_argument("synthetic oracle dims must be positive");
    }
    if (model_id.empty()) throw std::invalid_argument("synthetic oracle needs a model_id");
    if (match_tolerance < 0.f) throw std::invalid_argument("match_tolerance must be >= 0");
    switch (kind) {
        case SyntheticKind::pixel_key: {
            if (key_pixels.empty()) throw std::invalid_argument("pixel_key oracle needs key pixels");
            for (const PixelCoord& p : key_pixels) {
                if (p.y < 0 || p.y >= input_height || p.x < 0 || p.x >= input_width) {
                    throw std::invalid_argument("key pixel out of bounds");
                }
            }
            break;
        }
        case SyntheticKind::threshold_region: {
            if (region.height < 1 || region.width < 1 || region.top < 0 || region.left < 0 ||
                region.top + region.height > input_height ||
                region.left + region.width > input_width) {
                throw std::invalid_argument("threshold region out of bounds");
            }
            if (threshold < 1 || static_cast<long long>(threshold) > region.area()) {
                throw std::invalid_argument("threshold must lie in [1, region area]");
            }
            break;
        }
        case SyntheticKind::linear: {
            if (linear_class_count < 2) {
                throw std::invalid_argument("linear oracle needs at least two classes");
            }
            const std::size_t n = static_cast<std::size_t>(input_height) *
                                  static_cast<std::size_t>(input_width) *
                                  static_cast<std::size_t>(input_channels);
            if (weights.size() != n * static_cast<std::size_t>(linear_class_count)) {
                throw std::invalid_argument("linear weights must be class_count x input size");
            }
            break;
        }
    }
}

OracleHandle make_synthetic_oracle(const SyntheticOracleSpec& spec) {
    return std::make_shared<SyntheticOracle>(spec);
}

}  // namespace mpskit
