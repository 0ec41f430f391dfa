#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "mpskit/extraction.hpp"
#include "mpskit/manifest.hpp"
#include "mpskit/occlusion.hpp"
#include "mpskit/oracle.hpp"
#include "mpskit/responsibility.hpp"

namespace mpskit {

struct DatasetEntry {
    std::string image_id;  // file stem
    std::filesystem::path path;
    std::optional<int> label;
};

struct Dataset {
    std::vector<DatasetEntry> entries;  // ascending image_id
    int skipped = 0;                    // undecodable files
};

// image_id -> class index. Throws DataError naming the offending row.
std::map<std::string, int> load_labels_csv(const std::filesystem::path& path);

// Scans a directory of PNG images; ids are file stems, ordering ascending.
// Undecodable files are logged and counted, labels for unknown ids warned.
Dataset ingest_dataset(const std::filesystem::path& dir,
                       const std::optional<std::filesystem::path>& labels_path,
                       std::ostream* log = nullptr);

// A model is either an external exported graph or a built-in synthetic
// oracle (objects with a "kind" key in the config).
using ModelEntry = std::variant<ModelManifest, SyntheticOracleSpec>;

struct RunConfig {
    std::vector<ModelEntry> models;
    std::filesystem::path dataset_dir;
    std::optional<std::filesystem::path> labels_path;
    std::filesystem::path output_dir;
    SearchConfig search;
    BaselineSpec baseline;            // applied to preprocessed tensors
    double chunk_fraction = 0.01;
    double significance = 0.01;
    bool save_landscapes = false;

    void validate() const;  // throws DataError
};

// Relative paths in the config resolve against base_dir.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// FNV-1a over the canonical JSON form; identical configs hash identically.
std::uint64_t config_hash(const RunConfig& config);

SyntheticOracleSpec synthetic_spec_from_json(const std::string& text);
std::string synthetic_spec_to_json(const SyntheticOracleSpec& spec);

// Instantiates one model entry as an oracle (throws BackendError /
// std::invalid_argument on failure).
OracleHandle instantiate_model(const ModelEntry& entry);

struct ModelInfo {
    std::string model_id;
    std::string architecture_tag;
    int input_height = 0;
    int input_width = 0;
    int class_count = 0;
};

struct RunMeta {
    std::string tool_version;
    std::string config_hash_hex;
    std::uint64_t seed = 0;
    std::vector<ModelInfo> models;                       // successfully loaded
    std::vector<std::pair<std::string, std::string>> failed_models;  // id, error
};

struct ExtractOptions {
    int workers = 1;
    bool force = false;
};

struct ExtractSummary {
    int models_loaded = 0;
    int models_failed = 0;
    int images = 0;
    int jobs_run = 0;
    int jobs_skipped = 0;  // resumed from existing records
};

// Runs build_landscape + extract_mps for every (model, image) pair and
// persists one record per pair:
//   <out>/records/<model_id>/<image_id>.json  (+ sibling .png mask)
//   <out>/records.csv   aggregate, ordered by (model_id, image_id)
//   <out>/run_meta.json seed, config hash, tool version, model info
// Existing records are skipped unless options.force. Model load failures
// warn and continue; only all models failing raises BackendError.
ExtractSummary run_extraction(const RunConfig& config, const ExtractOptions& options,
                              std::ostream* log = nullptr);

// Record persistence. save_record writes <dir>/<model_id>/<image_id>.json
// plus the mask PNG it references.
void save_record(const MpsRecord& record, const std::filesystem::path& records_dir);
MpsRecord load_record(const std::filesystem::path& json_path);

// Loads every record under <dir>/records (or <dir> itself when it has no
// records/ child), sorted by (model_id, image_id).
std::vector<MpsRecord> load_records(const std::filesystem::path& dir);
std::optional<RunMeta> load_run_meta(const std::filesystem::path& dir);

std::string aggregate_csv(const std::vector<MpsRecord>& records);
void write_aggregate_csv(const std::vector<MpsRecord>& records,
                         const std::filesystem::path& path);

// Every report number must be recomputable from the persisted records.
// check_run_consistency re-derives what each record claims (area ratio from
// the mask PNG, degeneracy, correctness vs ground truth) and, when the run
// directory has a records.csv, re-aggregates the records and compares
// byte-for-byte. Any divergence raises DataError naming the artifact.
struct CheckSummary {
    int records_checked = 0;
    bool aggregate_checked = false;
};
CheckSummary check_run_consistency(const std::filesystem::path& dir, std::ostream* log = nullptr);

// Attaches ground truth and correctness by image_id; returns how many
// records matched a label.
int apply_labels(std::vector<MpsRecord>& records, const std::map<std::string, int>& labels);

// Best model per architecture tag by accuracy over records with known
// correctness; ties break to the lexicographically smaller model_id.
// tags maps model_id to architecture tag; unmapped models share "unknown".
std::map<std::string, std::string> select_top_models(
    const std::vector<MpsRecord>& records, const std::map<std::string, std::string>& tags);

struct Consensus {
    std::map<std::string, int> by_image;  // images with a strict majority
    int abstentions = 0;                  // images without one
};

// Strict majority vote over per-model predictions, image by image.
Consensus consensus_correctness(const std::vector<MpsRecord>& records);

// Marks records correct iff their prediction matches the consensus class;
// records of no-consensus images keep correctness unset. Returns abstentions.
int apply_consensus(std::vector<MpsRecord>& records);

// Image sets on which every listed model is correct / every one incorrect.
std::pair<std::set<std::string>, std::set<std::string>> intersect_by_fidelity(
    const std::vector<MpsRecord>& records, const std::vector<std::string>& model_ids);

}  // namespace mpskit
