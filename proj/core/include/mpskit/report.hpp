#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mpskit/pipeline.hpp"
#include "mpskit/setmetrics.hpp"
#include "mpskit/stats.hpp"

namespace mpskit {

struct ModelSummary {
    std::string model_id;
    std::string architecture_tag;
    int record_count = 0;
    int degenerate_count = 0;
    int labeled_count = 0;    // records with known correctness
    int correct_count = 0;
    int incorrect_count = 0;
    std::optional<double> area_labeled;    // "Area": mean over labeled, non-degenerate
    std::optional<double> area_correct;    // "Correct"
    std::optional<double> area_incorrect;  // "Incorrect"
    std::optional<double> area_overall;    // "Mean": every non-degenerate record
    std::optional<double> accuracy;        // correct / labeled
};

struct StatEntry {
    std::string test;
    TestResult result;
    std::optional<double> corrected_p;  // set when a Bonferroni family applies
    double threshold = 0.01;
    bool significant = false;
};

struct ComparisonReport {
    std::vector<ModelSummary> models;  // ascending model_id
    std::optional<PairwiseMatrix> dice_matrix;
    std::optional<PairwiseMatrix> hausdorff_matrix;
    std::vector<StatEntry> stats;
    std::optional<EffectEstimate> effect;
    std::optional<std::string> effect_note;  // reason when the fit is skipped
    std::map<std::string, std::string> top_models;  // architecture tag -> model_id
    std::size_t all_correct_images = 0;
    std::size_t all_incorrect_images = 0;
    int consensus_abstentions = -1;  // -1: consensus proxy not used
    double significance = 0.01;
    std::string grid_note;  // reference grid used by the matrices
    std::vector<std::string> notes;
};

// Builds summaries, pairwise matrices, the nonparametric test battery
// (Kruskal-Wallis across architecture tags, Friedman within each multi-model
// tag with Bonferroni over that family), and the correctness size effect.
// Records without correctness fall back to the consensus proxy when at least
// three models are present. `tags` maps model_id to architecture tag (from
// run metadata); missing models get tag "unknown".
ComparisonReport make_report(std::vector<MpsRecord> records,
                             const std::map<std::string, std::string>& tags,
                             double significance = 0.01);

std::string render_summary_csv(const ComparisonReport& report);
std::string render_summary_markdown(const ComparisonReport& report);
std::string render_matrix_csv(const PairwiseMatrix& matrix);
std::string render_matrix_markdown(const PairwiseMatrix& matrix);
std::string render_stats_json(const ComparisonReport& report);
std::string render_report_markdown(const ComparisonReport& report);

// Kernel-density violin per model (Gaussian kernel, Silverman bandwidth,
// zero-variance models drawn as a horizontal tick), colored by architecture
// tag. Models with fewer than two usable records are skipped with a warning
// pushed to `warnings`.
std::string plot_violin(const std::vector<MpsRecord>& records,
                        const std::map<std::string, std::string>& tags,
                        std::vector<std::string>* warnings = nullptr);

// compare subcommand body: writes report.md, summary.csv, dice.csv,
// hausdorff.csv, stats.json and violins.svg into out_dir.
void write_comparison(const ComparisonReport& report,
                      const std::vector<MpsRecord>& records,
                      const std::map<std::string, std::string>& tags,
                      const std::filesystem::path& out_dir);

}  // namespace mpskit
