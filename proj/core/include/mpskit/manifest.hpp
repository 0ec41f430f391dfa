#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mpskit {

enum class ResizeStrategy { stretch, shorter_side_then_center_crop };

ResizeStrategy parse_resize_strategy(const std::string& name);  // throws DataError
std::string resize_strategy_name(ResizeStrategy strategy);

// One classifier entry of a model manifest. channel_means/channel_stds apply
// per channel after resizing; values are in the raw image scale.
struct ModelManifest {
    std::string model_id;
    std::string architecture_tag;
    std::string model_path;
    int input_height = 0;
    int input_width = 0;
    std::vector<float> channel_means;
    std::vector<float> channel_stds;
    ResizeStrategy resize_strategy = ResizeStrategy::stretch;
    int class_count = 0;

    void validate() const;  // throws DataError naming the offending model_id
};

// Parses a JSON array of manifest entries. Unknown or missing keys are
// reported by name; duplicate model_id values are rejected.
std::vector<ModelManifest> parse_manifest_json(const std::string& text);
std::vector<ModelManifest> load_manifest(const std::filesystem::path& path);

std::string manifest_to_json(const std::vector<ModelManifest>& entries);

}  // namespace mpskit
