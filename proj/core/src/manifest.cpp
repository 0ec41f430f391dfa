#include "mpskit/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mpskit/errors.hpp"

namespace mpskit {

using nlohmann::json;

ResizeStrategy parse_resize_strategy(const std::string& name) {
    if (name == "stretch") return ResizeStrategy::stretch;
    if (name == "shorter_side_then_center_crop") {
        return ResizeStrategy::shorter_side_then_center_crop;
    }
    throw DataError("unknown resize_strategy '" + name + "'");
}

std::string resize_strategy_name(ResizeStrategy strategy) {
    switch (strategy) {
        case ResizeStrategy::stretch: return "stretch";
        case ResizeStrategy::shorter_side_then_center_crop:
            return "shorter_side_then_center_crop";
    }
    throw DataError("invalid resize strategy value");
}

void ModelManifest::validate() const {
    const std::string who = "manifest entry '" + model_id + "': ";
    if (model_id.empty()) throw DataError("manifest entry with empty model_id");
    if (architecture_tag.empty()) throw DataError(who + "empty architecture_tag");
    if (model_path.empty()) throw DataError(who + "empty model_path");
    if (input_height < 1 || input_width < 1) throw DataError(who + "input dims must be positive");
    if (class_count < 2) throw DataError(who + "class_count must be at least 2");
    if (channel_means.empty()) throw DataError(who + "channel_means must be non-empty");
    if (channel_stds.size() != channel_means.size()) {
        throw DataError(who + "channel_stds length differs from channel_means");
    }
    for (float s : channel_stds) {
        if (!(s > 0.f)) throw DataError(who + "channel_stds must be positive");
    }
}

namespace {

const std::set<std::string> kManifestKeys = {
    "model_id",      "architecture_tag", "model_path",
    "input_height",  "input_width",      "channel_means",
    "channel_stds",  "resize_strategy",  "class_count",
};

ModelManifest parse_entry(const json& obj, std::size_t index) {
    const std::string where = "manifest entry " + std::to_string(index);
    if (!obj.is_object()) throw DataError(where + " is not an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!kManifestKeys.contains(key)) throw DataError(where + ": unknown key '" + key + "'");
    }
    for (const std::string& key : kManifestKeys) {
        if (!obj.contains(key)) throw DataError(where + ": missing key '" + key + "'");
    }
    ModelManifest entry;
    try {
        entry.model_id = obj.at("model_id").get<std::string>();
        entry.architecture_tag = obj.at("architecture_tag").get<std::string>();
        entry.model_path = obj.at("model_path").get<std::string>();
        entry.input_height = obj.at("input_height").get<int>();
        entry.input_width = obj.at("input_width").get<int>();
        entry.channel_means = obj.at("channel_means").get<std::vector<float>>();
        entry.channel_stds = obj.at("channel_stds").get<std::vector<float>>();
        entry.resize_strategy =
            parse_resize_strategy(obj.at("resize_strategy").get<std::string>());
        entry.class_count = obj.at("class_count").get<int>();
    } catch (const json::exception& e) {
        throw DataError(where + ": " + e.what());
    }
    entry.validate();
    return entry;
}

}  // namespace

std::vector<ModelManifest> parse_manifest_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw DataError("manifest root must be a JSON array");
    std::vector<ModelManifest> entries;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        ModelManifest entry = parse_entry(doc[i], i);
        if (!seen.insert(entry.model_id).second) {
            throw DataError("duplicate model_id '" + entry.model_id + "' in manifest");
        }
        entries.push_back(std::move(entry));
    }
    if (entries.empty()) throw DataError("manifest lists no models");
    return entries;
}

std::vector<ModelManifest> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open manifest '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_manifest_json(buf.str());
}

std::string manifest_to_json(const std::vector<ModelManifest>& entries) {
    json arr = json::array();
    for (const ModelManifest& m : entries) {
        arr.push_back(json{{"model_id", m.model_id},
                           {"architecture_tag", m.architecture_tag},
                           {"model_path", m.model_path},
                           {"input_height", m.input_height},
                           {"input_width", m.input_width},
                           {"channel_means", m.channel_means},
                           {"channel_stds", m.channel_stds},
                           {"resize_strategy", resize_strategy_name(m.resize_strategy)},
                           {"class_count", m.class_count}});
    }
    return arr.dump(2) + "\n";
}

}  // namespace mpskit
