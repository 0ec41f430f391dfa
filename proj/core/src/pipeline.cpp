#include "mpskit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "mpskit/errors.hpp"
#include "mpskit/onnx_backend.hpp"
#include "mpskit/png_io.hpp"
#include "mpskit/version.hpp"

namespace mpskit {

using nlohmann::json;

namespace {

void logln(std::ostream* log, const std::string& line) {
    if (log) *log << line << "\n";
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& raw) {
    if (raw.find_first_of(",\"\n") == std::string::npos) return raw;
    std::string out = "\"";
    for (char c : raw) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

const char* synthetic_kind_name(SyntheticKind kind) {
    switch (kind) {
        case SyntheticKind::pixel_key: return "pixel_key";
        case SyntheticKind::threshold_region: return "threshold_region";
        case SyntheticKind::linear: return "linear";
    }
    return "?";
}

SyntheticKind parse_synthetic_kind(const std::string& name) {
    if (name == "pixel_key") return SyntheticKind::pixel_key;
    if (name == "threshold_region") return SyntheticKind::threshold_region;
    if (name == "linear") return SyntheticKind::linear;
    throw DataError("unknown synthetic oracle kind '" + name + "'");
}

json synthetic_spec_json(const SyntheticOracleSpec& spec) {
    json doc{{"kind", synthetic_kind_name(spec.kind)},
             {"model_id", spec.model_id},
             {"architecture_tag", spec.architecture_tag},
             {"input_height", spec.input_height},
             {"input_width", spec.input_width},
             {"input_channels", spec.input_channels},
             {"match_tolerance", spec.match_tolerance}};
    switch (spec.kind) {
        case SyntheticKind::pixel_key: {
            json keys = json::array();
            for (const PixelCoord& p : spec.key_pixels) keys.push_back(json::array({p.y, p.x}));
            doc["key_pixels"] = std::move(keys);
            break;
        }
        case SyntheticKind::threshold_region:
            doc["region"] = {{"top", spec.region.top},
                             {"left", spec.region.left},
                             {"height", spec.region.height},
                             {"width", spec.region.width}};
            doc["threshold"] = spec.threshold;
            break;
        case SyntheticKind::linear:
            doc["weights"] = spec.weights;
            doc["class_count"] = spec.linear_class_count;
            break;
    }
    return doc;
}

SyntheticOracleSpec synthetic_spec_from(const json& doc) {
    SyntheticOracleSpec spec;
    try {
        spec.kind = parse_synthetic_kind(doc.at("kind").get<std::string>());
        spec.model_id = doc.at("model_id").get<std::string>();
        spec.architecture_tag = doc.value("architecture_tag", spec.model_id);
        spec.input_height = doc.at("input_height").get<int>();
        spec.input_width = doc.at("input_width").get<int>();
        spec.input_channels = doc.value("input_channels", 1);
        spec.match_tolerance = doc.value("match_tolerance", 0.f);
        switch (spec.kind) {
            case SyntheticKind::pixel_key:
                for (const json& p : doc.at("key_pixels")) {
                    spec.key_pixels.push_back(PixelCoord{p.at(0).get<int>(), p.at(1).get<int>()});
                }
                break;
            case SyntheticKind::threshold_region: {
                const json& r = doc.at("region");
                spec.region = Region{r.at("top").get<int>(), r.at("left").get<int>(),
                                     r.at("height").get<int>(), r.at("width").get<int>()};
                spec.threshold = doc.at("threshold").get<int>();
                break;
            }
            case SyntheticKind::linear:
                spec.weights = doc.at("weights").get<std::vector<float>>();
                spec.linear_class_count = doc.at("class_count").get<int>();
                break;
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("synthetic oracle spec: ") + e.what());
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("synthetic oracle spec: ") + e.what());
    }
    return spec;
}

// Effective experiment parameters only; file locations excluded so reruns
// into fresh directories keep the same hash.
json config_identity_json(const RunConfig& config) {
    json models = json::array();
    for (const ModelEntry& entry : config.models) {
        if (const auto* manifest = std::get_if<ModelManifest>(&entry)) {
            models.push_back(json::parse(manifest_to_json({*manifest})).at(0));
        } else {
            models.push_back(synthetic_spec_json(std::get<SyntheticOracleSpec>(entry)));
        }
    }
    return json{{"models", std::move(models)},
                {"search",
                 {{"iterations", config.search.iterations},
                  {"max_depth", config.search.max_depth},
                  {"min_side", config.search.min_side},
                  {"mutant_budget", config.search.mutant_budget},
                  {"seed", config.search.seed}}},
                {"baseline", config.baseline.values},
                {"chunk_fraction", config.chunk_fraction},
                {"significance", config.significance},
                {"save_landscapes", config.save_landscapes}};
}

void check_known_keys(const json& obj, const std::set<std::string>& known,
                      const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!known.contains(key)) throw DataError(where + ": unknown key '" + key + "'");
    }
}

std::string read_text_file(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(std::string("cannot open ") + what + " '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw DataError("short write on '" + path.string() + "'");
}

}  // namespace

std::string synthetic_spec_to_json(const SyntheticOracleSpec& spec) {
    return synthetic_spec_json(spec).dump(2) + "\n";
}

SyntheticOracleSpec synthetic_spec_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("synthetic oracle spec is not valid JSON: ") + e.what());
    }
    return synthetic_spec_from(doc);
}

void RunConfig::validate() const {
    if (models.empty()) throw DataError("run config lists no models");
    if (dataset_dir.empty()) throw DataError("run config has no dataset directory");
    if (output_dir.empty()) throw DataError("run config has no output directory");
    if (!(chunk_fraction > 0.0 && chunk_fraction <= 1.0)) {
        throw DataError("chunk_fraction must lie in (0, 1]");
    }
    if (!(significance > 0.0 && significance < 1.0)) {
        throw DataError("significance must lie in (0, 1)");
    }
    try {
        search.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("search config: ") + e.what());
    }
    for (float v : baseline.values) {
        if (!std::isfinite(v)) throw DataError("baseline values must be finite");
    }
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("run config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw DataError("run config root must be a JSON object");
    check_known_keys(doc,
                     {"models", "dataset", "labels", "output_dir", "search", "baseline",
                      "chunk_fraction", "significance", "save_landscapes"},
                     "run config");

    RunConfig config;
    try {
        if (!doc.contains("models")) throw DataError("run config: missing key 'models'");
        for (const json& entry : doc.at("models")) {
            if (!entry.is_object()) throw DataError("run config: model entry is not an object");
            if (entry.contains("kind")) {
                config.models.emplace_back(synthetic_spec_from(entry));
            } else {
                std::vector<ModelManifest> parsed =
                    parse_manifest_json(json::array({entry}).dump());
                ModelManifest manifest = parsed.at(0);
                std::filesystem::path p(manifest.model_path);
                if (p.is_relative()) manifest.model_path = (base_dir / p).string();
                config.models.emplace_back(std::move(manifest));
            }
        }
        auto resolve = [&](const std::string& raw) {
            std::filesystem::path p(raw);
            return p.is_relative() ? base_dir / p : p;
        };
        config.dataset_dir = resolve(doc.at("dataset").get<std::string>());
        if (doc.contains("labels")) config.labels_path = resolve(doc.at("labels").get<std::string>());
        config.output_dir = resolve(doc.at("output_dir").get<std::string>());
        if (doc.contains("search")) {
            const json& s = doc.at("search");
            check_known_keys(s, {"iterations", "max_depth", "min_side", "mutant_budget", "seed"},
                             "run config search");
            config.search.iterations = s.value("iterations", config.search.iterations);
            config.search.max_depth = s.value("max_depth", config.search.max_depth);
            config.search.min_side = s.value("min_side", config.search.min_side);
            config.search.mutant_budget = s.value("mutant_budget", config.search.mutant_budget);
            config.search.seed = s.value("seed", config.search.seed);
        }
        if (doc.contains("baseline")) {
            if (doc.at("baseline").is_number()) {
                config.baseline.values = {doc.at("baseline").get<float>()};
            } else {
                config.baseline.values = doc.at("baseline").get<std::vector<float>>();
            }
        }
        config.chunk_fraction = doc.value("chunk_fraction", config.chunk_fraction);
        config.significance = doc.value("significance", config.significance);
        config.save_landscapes = doc.value("save_landscapes", config.save_landscapes);
    } catch (const json::exception& e) {
        throw DataError(std::string("run config: ") + e.what());
    }
    config.validate();
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return parse_run_config(read_text_file(path, "run config"),
                            path.has_parent_path() ? path.parent_path()
                                                   : std::filesystem::path("."));
}

std::uint64_t config_hash(const RunConfig& config) {
    return fnv1a64(config_identity_json(config).dump());
}

OracleHandle instantiate_model(const ModelEntry& entry) {
    if (const auto* manifest = std::get_if<ModelManifest>(&entry)) {
        return load_external_model(*manifest);
    }
    return make_synthetic_oracle(std::get<SyntheticOracleSpec>(entry));
}

std::map<std::string, int> load_labels_csv(const std::filesystem::path& path) {
    const std::string text = read_text_file(path, "label file");
    std::map<std::string, int> labels;
    std::istringstream in(text);
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw DataError("label row " + std::to_string(row) + " has no comma");
        }
        const std::string id = line.substr(0, comma);
        const std::string value = line.substr(comma + 1);
        int parsed = 0;
        try {
            std::size_t used = 0;
            parsed = std::stoi(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            if (row == 1) continue;  // header line
            throw DataError("label row " + std::to_string(row) + " has a malformed class index '" +
                            value + "'");
        }
        if (parsed < 0) {
            throw DataError("label row " + std::to_string(row) + " has a negative class index");
        }
        if (!labels.emplace(id, parsed).second) {
            throw DataError("label row " + std::to_string(row) + " repeats image_id '" + id + "'");
        }
    }
    return labels;
}

Dataset ingest_dataset(const std::filesystem::path& dir,
                       const std::optional<std::filesystem::path>& labels_path,
                       std::ostream* log) {
    if (!std::filesystem::is_directory(dir)) {
        throw DataError("dataset directory '" + dir.string() + "' does not exist");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (ext == ".png") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.stem().string() < b.stem().string(); });

    Dataset dataset;
    std::set<std::string> seen;
    for (const std::filesystem::path& file : files) {
        const std::string id = file.stem().string();
        if (!seen.insert(id).second) {
            throw DataError("duplicate image_id '" + id + "' in dataset");
        }
        try {
            (void)read_image_png(file);  // decodability check only
        } catch (const DataError& e) {
            logln(log, std::string("warning: skipping undecodable image: ") + e.what());
            ++dataset.skipped;
            continue;
        }
        dataset.entries.push_back(DatasetEntry{id, file, std::nullopt});
    }
    if (dataset.skipped > 0) {
        logln(log, "warning: skipped " + std::to_string(dataset.skipped) + " undecodable file(s)");
    }
    if (dataset.entries.empty()) {
        throw DataError("dataset directory '" + dir.string() + "' has no decodable PNG images");
    }

    if (labels_path) {
        const std::map<std::string, int> labels = load_labels_csv(*labels_path);
        std::set<std::string> matched;
        for (DatasetEntry& entry : dataset.entries) {
            const auto it = labels.find(entry.image_id);
            if (it != labels.end()) {
                entry.label = it->second;
                matched.insert(it->first);
            }
        }
        for (const auto& [id, value] : labels) {
            (void)value;
            if (!matched.contains(id)) {
                logln(log, "warning: label for unknown image_id '" + id + "' ignored");
            }
        }
    }
    return dataset;
}

namespace {

json record_to_json(const MpsRecord& record) {
    json doc{{"model_id", record.model_id},
             {"image_id", record.image_id},
             {"mask_path", record.image_id + ".png"},
             {"area_ratio", record.area_ratio},
             {"predicted_class", record.predicted_class},
             {"ground_truth", nullptr},
             {"correct", nullptr},
             {"degenerate", record.degenerate},
             {"oracle_calls_used", record.oracle_calls_used}};
    if (record.ground_truth) doc["ground_truth"] = *record.ground_truth;
    if (record.correct) doc["correct"] = *record.correct;
    return doc;
}

}  // namespace

void save_record(const MpsRecord& record, const std::filesystem::path& records_dir) {
    const std::filesystem::path model_dir = records_dir / record.model_id;
    std::filesystem::create_directories(model_dir);
    write_mask_png(record.mask, model_dir / (record.image_id + ".png"));
    write_text_file(model_dir / (record.image_id + ".json"),
                    record_to_json(record).dump(2) + "\n");
}

MpsRecord load_record(const std::filesystem::path& json_path) {
    json doc;
    try {
        doc = json::parse(read_text_file(json_path, "record"));
    } catch (const json::exception& e) {
        throw DataError("record '" + json_path.string() + "': " + e.what());
    }
    MpsRecord record;
    try {
        record.model_id = doc.at("model_id").get<std::string>();
        record.image_id = doc.at("image_id").get<std::string>();
        record.area_ratio = doc.at("area_ratio").get<double>();
        record.predicted_class = doc.at("predicted_class").get<int>();
        if (doc.contains("ground_truth") && !doc.at("ground_truth").is_null()) {
            record.ground_truth = doc.at("ground_truth").get<int>();
        }
        if (doc.contains("correct") && !doc.at("correct").is_null()) {
            record.correct = doc.at("correct").get<bool>();
        }
        record.degenerate = doc.at("degenerate").get<bool>();
        record.oracle_calls_used = doc.at("oracle_calls_used").get<long long>();
        const std::string mask_name = doc.at("mask_path").get<std::string>();
        record.mask = read_mask_png(json_path.parent_path() / mask_name);
    } catch (const json::exception& e) {
        throw DataError("record '" + json_path.string() + "': " + e.what());
    }
    return record;
}

std::vector<MpsRecord> load_records(const std::filesystem::path& dir) {
    std::filesystem::path root = dir;
    if (std::filesystem::is_directory(dir / "records")) root = dir / "records";
    if (!std::filesystem::is_directory(root)) {
        throw DataError("records directory '" + dir.string() + "' does not exist");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json" &&
            entry.path().filename() != "run_meta.json") {
            // Landscape sidecars ("*.landscape.bin.json") are not records.
            if (entry.path().stem().extension() == ".bin") continue;
            files.push_back(entry.path());
        }
    }
    std::vector<MpsRecord> records;
    records.reserve(files.size());
    for (const std::filesystem::path& file : files) records.push_back(load_record(file));
    std::sort(records.begin(), records.end(), [](const MpsRecord& a, const MpsRecord& b) {
        return std::tie(a.model_id, a.image_id) < std::tie(b.model_id, b.image_id);
    });
    return records;
}

std::optional<RunMeta> load_run_meta(const std::filesystem::path& dir) {
    const std::filesystem::path path = dir / "run_meta.json";
    if (!std::filesystem::exists(path)) return std::nullopt;
    json doc;
    try {
        doc = json::parse(read_text_file(path, "run metadata"));
        RunMeta meta;
        meta.tool_version = doc.value("tool_version", "");
        meta.config_hash_hex = doc.value("config_hash", "");
        meta.seed = doc.value("seed", std::uint64_t{0});
        for (const json& m : doc.value("models", json::array())) {
            meta.models.push_back(ModelInfo{m.at("model_id").get<std::string>(),
                                            m.at("architecture_tag").get<std::string>(),
                                            m.at("input_height").get<int>(),
                                            m.at("input_width").get<int>(),
                                            m.at("class_count").get<int>()});
        }
        for (const json& f : doc.value("failed_models", json::array())) {
            meta.failed_models.emplace_back(f.at("model_id").get<std::string>(),
                                            f.at("error").get<std::string>());
        }
        return meta;
    } catch (const json::exception& e) {
        throw DataError("run metadata '" + path.string() + "': " + e.what());
    }
}

std::string aggregate_csv(const std::vector<MpsRecord>& records) {
    std::vector<const MpsRecord*> sorted;
    sorted.reserve(records.size());
    for (const MpsRecord& r : records) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](const MpsRecord* a, const MpsRecord* b) {
        return std::tie(a->model_id, a->image_id) < std::tie(b->model_id, b->image_id);
    });
    std::string out =
        "model_id,image_id,area_ratio,predicted_class,ground_truth,correct,degenerate,"
        "oracle_calls_used\n";
    for (const MpsRecord* r : sorted) {
        out += csv_field(r->model_id);
        out += ',';
        out += csv_field(r->image_id);
        out += ',';
        out += format_double(r->area_ratio);
        out += ',';
        out += std::to_string(r->predicted_class);
        out += ',';
        if (r->ground_truth) out += std::to_string(*r->ground_truth);
        out += ',';
        if (r->correct) out += *r->correct ? "true" : "false";
        out += ',';
        out += r->degenerate ? "true" : "false";
        out += ',';
        out += std::to_string(r->oracle_calls_used);
        out += '\n';
    }
    return out;
}

void write_aggregate_csv(const std::vector<MpsRecord>& records,
                         const std::filesystem::path& path) {
    write_text_file(path, aggregate_csv(records));
}

CheckSummary check_run_consistency(const std::filesystem::path& dir, std::ostream* log) {
    const std::vector<MpsRecord> records = load_records(dir);
    CheckSummary summary;
    for (const MpsRecord& record : records) {
        const std::string where = "record " + record.model_id + "/" + record.image_id;
        if (record.mask.size() == 0) throw DataError(where + ": mask has no pixels");
        const double recomputed = area_ratio(record.mask);
        if (recomputed != record.area_ratio) {
            throw DataError(where + ": stored area_ratio " + std::to_string(record.area_ratio) +
                            " but the mask gives " + std::to_string(recomputed));
        }
        if (record.degenerate && record.mask.area() != 0) {
            throw DataError(where + ": flagged degenerate but the mask is not empty");
        }
        if (record.ground_truth && record.correct &&
            *record.correct != (record.predicted_class == *record.ground_truth)) {
            throw DataError(where + ": correct flag disagrees with the ground truth");
        }
        ++summary.records_checked;
    }

    // records.csv is what the report layer aggregates, so it must equal a
    // fresh aggregation of the individual records.
    const std::filesystem::path csv_path = dir / "records.csv";
    if (std::filesystem::exists(csv_path)) {
        const std::string stored = read_text_file(csv_path, "aggregate CSV");
        const std::string rebuilt = aggregate_csv(records);
        if (stored != rebuilt) {
            throw DataError("aggregate '" + csv_path.string() +
                            "' does not match the records it claims to summarize");
        }
        summary.aggregate_checked = true;
    } else if (log) {
        *log << "no aggregate CSV next to the records; skipped that check\n";
    }
    return summary;
}

int apply_labels(std::vector<MpsRecord>& records, const std::map<std::string, int>& labels) {
    int matched = 0;
    for (MpsRecord& record : records) {
        const auto it = labels.find(record.image_id);
        if (it == labels.end()) continue;
        record.ground_truth = it->second;
        record.correct = record.predicted_class == it->second;
        ++matched;
    }
    return matched;
}

ExtractSummary run_extraction(const RunConfig& config, const ExtractOptions& options,
                              std::ostream* log) {
    config.validate();
    if (options.workers < 1) throw UsageError("workers must be >= 1");
    const Dataset dataset = ingest_dataset(config.dataset_dir, config.labels_path, log);

    struct LoadedModel {
        OracleHandle oracle;
        std::mutex serial;  // held for oracles that are not thread safe
    };
    std::vector<std::shared_ptr<LoadedModel>> models;
    RunMeta meta;
    meta.tool_version = version_string();
    meta.seed = config.search.seed;
    meta.config_hash_hex = hex64(config_hash(config));
    std::set<std::string> ids;
    for (const ModelEntry& entry : config.models) {
        const std::string entry_id = std::holds_alternative<ModelManifest>(entry)
                                         ? std::get<ModelManifest>(entry).model_id
                                         : std::get<SyntheticOracleSpec>(entry).model_id;
        try {
            if (!ids.insert(entry_id).second) {
                throw DataError("duplicate model_id '" + entry_id + "' in run config");
            }
            auto loaded = std::make_shared<LoadedModel>();
            loaded->oracle = instantiate_model(entry);
            models.push_back(std::move(loaded));
            const Oracle& oracle = *models.back()->oracle;
            meta.models.push_back(ModelInfo{oracle.model_id(), oracle.architecture_tag(),
                                            oracle.input_height(), oracle.input_width(),
                                            oracle.class_count()});
        } catch (const DataError&) {
            throw;  // config-level problem, not a backend failure
        } catch (const std::exception& e) {
            logln(log, "warning: model '" + entry_id + "' failed to load: " + e.what());
            meta.failed_models.emplace_back(entry_id, e.what());
        }
    }
    if (models.empty()) {
        throw BackendError("no model could be loaded (" +
                           std::to_string(meta.failed_models.size()) + " failed)");
    }

    const std::filesystem::path records_dir = config.output_dir / "records";
    std::filesystem::create_directories(records_dir);

    struct Job {
        std::shared_ptr<LoadedModel> model;
        const DatasetEntry* entry;
    };
    std::vector<Job> jobs;
    ExtractSummary summary;
    summary.models_loaded = static_cast<int>(models.size());
    summary.models_failed = static_cast<int>(meta.failed_models.size());
    summary.images = static_cast<int>(dataset.entries.size());
    for (const auto& model : models) {
        for (const DatasetEntry& entry : dataset.entries) {
            const std::filesystem::path target =
                records_dir / model->oracle->model_id() / (entry.image_id + ".json");
            if (!options.force && std::filesystem::exists(target)) {
                ++summary.jobs_skipped;
                continue;
            }
            jobs.push_back(Job{model, &entry});
        }
    }

    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    std::vector<std::string> job_errors;
    auto worker_body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job& job = jobs[i];
            const Oracle& oracle = *job.model->oracle;
            try {
                std::unique_lock<std::mutex> serial(job.model->serial, std::defer_lock);
                if (!oracle.thread_safe()) serial.lock();

                const ImageTensor raw = read_image_png(job.entry->path);
                const ImageTensor prepared = oracle.preprocess(raw);
                SearchStats stats;
                const ResponsibilityLandscape landscape = build_landscape(
                    prepared, oracle, config.search, config.baseline, 1, &stats);
                MpsRecord record = extract_mps(prepared, landscape, oracle, config.baseline,
                                               config.chunk_fraction);
                record.model_id = oracle.model_id();
                record.image_id = job.entry->image_id;
                record.oracle_calls_used += stats.oracle_calls;
                if (job.entry->label) {
                    record.ground_truth = *job.entry->label;
                    record.correct = record.predicted_class == *job.entry->label;
                }
                save_record(record, records_dir);
                if (config.save_landscapes) {
                    save_landscape(landscape, config.search,
                                   records_dir / record.model_id /
                                       (record.image_id + ".landscape.bin"));
                }
                std::lock_guard<std::mutex> lock(log_mutex);
                ++summary.jobs_run;
                logln(log, "[extract] " + record.model_id + " " + record.image_id +
                               " area=" + format_double(record.area_ratio) +
                               (record.degenerate ? " (degenerate)" : "") +
                               " calls=" + std::to_string(record.oracle_calls_used));
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(log_mutex);
                job_errors.push_back("model '" + oracle.model_id() + "' image '" +
                                     job.entry->image_id + "': " + e.what());
                logln(log, "warning: extraction failed for " + job_errors.back());
            }
        }
    };

    const int worker_count = std::min<std::size_t>(options.workers, std::max<std::size_t>(jobs.size(), 1));
    if (worker_count > 1) {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(worker_count));
        for (int w = 0; w < worker_count; ++w) pool.emplace_back(worker_body);
        for (std::thread& t : pool) t.join();
    } else {
        worker_body();
    }

    const std::vector<MpsRecord> all_records = load_records(config.output_dir);
    if (all_records.empty()) {
        if (!job_errors.empty()) throw BackendError("every extraction job failed: " + job_errors.front());
        throw DataError("run produced no records");
    }
    write_aggregate_csv(all_records, config.output_dir / "records.csv");

    json meta_doc{{"tool_version", meta.tool_version},
                  {"config_hash", meta.config_hash_hex},
                  {"seed", meta.seed},
                  {"models", json::array()},
                  {"failed_models", json::array()}};
    for (const ModelInfo& m : meta.models) {
        meta_doc["models"].push_back(json{{"model_id", m.model_id},
                                          {"architecture_tag", m.architecture_tag},
                                          {"input_height", m.input_height},
                                          {"input_width", m.input_width},
                                          {"class_count", m.class_count}});
    }
    for (const auto& [id, error] : meta.failed_models) {
        meta_doc["failed_models"].push_back(json{{"model_id", id}, {"error", error}});
    }
    write_text_file(config.output_dir / "run_meta.json", meta_doc.dump(2) + "\n");

    logln(log, "[extract] done: " + std::to_string(summary.jobs_run) + " extracted, " +
                   std::to_string(summary.jobs_skipped) + " resumed, " +
                   std::to_string(job_errors.size()) + " failed");
    return summary;
}

std::map<std::string, std::string> select_top_models(
    const std::vector<MpsRecord>& records, const std::map<std::string, std::string>& tags) {
    struct Tally {
        int labeled = 0;
        int correct = 0;
    };
    std::map<std::string, Tally> by_model;
    for (const MpsRecord& r : records) {
        if (!r.correct.has_value()) continue;
        Tally& t = by_model[r.model_id];
        ++t.labeled;
        if (*r.correct) ++t.correct;
    }
    if (by_model.empty()) throw DataError("no records with known correctness");

    std::map<std::string, std::pair<std::string, double>> best;  // tag -> (model, accuracy)
    for (const auto& [model, tally] : by_model) {
        const auto tag_it = tags.find(model);
        const std::string tag = tag_it == tags.end() ? std::string("unknown") : tag_it->second;
        const double accuracy = static_cast<double>(tally.correct) / tally.labeled;
        const auto it = best.find(tag);
        // Ascending model iteration makes the lexicographically smaller id
        // win ties automatically.
        if (it == best.end() || accuracy > it->second.second) {
            best[tag] = {model, accuracy};
        }
    }
    std::map<std::string, std::string> winners;
    for (const auto& [tag, pick] : best) winners[tag] = pick.first;
    return winners;
}

Consensus consensus_correctness(const std::vector<MpsRecord>& records) {
    std::map<std::string, std::map<int, int>> votes;
    std::map<std::string, int> totals;
    for (const MpsRecord& r : records) {
        ++votes[r.image_id][r.predicted_class];
        ++totals[r.image_id];
    }
    Consensus consensus;
    for (const auto& [image, counts] : votes) {
        int best_class = -1;
        int best_count = 0;
        for (const auto& [cls, count] : counts) {
            if (count > best_count) {
                best_class = cls;
                best_count = count;
            }
        }
        if (2 * best_count > totals[image]) {
            consensus.by_image[image] = best_class;
        } else {
            ++consensus.abstentions;
        }
    }
    return consensus;
}

int apply_consensus(std::vector<MpsRecord>& records) {
    const Consensus consensus = consensus_correctness(records);
    for (MpsRecord& r : records) {
        const auto it = consensus.by_image.find(r.image_id);
        if (it != consensus.by_image.end()) r.correct = r.predicted_class == it->second;
    }
    return consensus.abstentions;
}

std::pair<std::set<std::string>, std::set<std::string>> intersect_by_fidelity(
    const std::vector<MpsRecord>& records, const std::vector<std::string>& model_ids) {
    const std::set<std::string> wanted(model_ids.begin(), model_ids.end());
    std::map<std::string, std::pair<int, int>> per_image;  // correct count, incorrect count
    for (const MpsRecord& r : records) {
        if (!wanted.contains(r.model_id) || !r.correct.has_value()) continue;
        auto& [n_correct, n_incorrect] = per_image[r.image_id];
        (*r.correct ? n_correct : n_incorrect) += 1;
    }
    std::pair<std::set<std::string>, std::set<std::string>> out;
    const int n = static_cast<int>(wanted.size());
    for (const auto& [image, counts] : per_image) {
        if (counts.first == n) out.first.insert(image);
        if (counts.second == n) out.second.insert(image);
    }
    return out;
}

}  // namespace mpskit
