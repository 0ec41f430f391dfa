#include "mpskit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mpskit/errors.hpp"

namespace mpskit {

using nlohmann::json;

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string fmt17(double v) { return fmt("%.17g", v); }
std::string fmt3(double v) { return fmt("%.3f", v); }
std::string fmt4g(double v) { return fmt("%.4g", v); }

std::string opt17(const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); }
std::string opt3(const std::optional<double>& v) { return v ? fmt3(*v) : std::string("-"); }

std::string tag_of(const std::map<std::string, std::string>& tags, const std::string& model) {
    const auto it = tags.find(model);
    return it == tags.end() ? std::string("unknown") : it->second;
}

double mean_of(const std::vector<double>& values) {
    double total = 0.0;
    for (double v : values) total += v;
    return total / static_cast<double>(values.size());
}

double quantile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

}  // namespace

ComparisonReport make_report(std::vector<MpsRecord> records,
                             const std::map<std::string, std::string>& tags,
                             double significance) {
    if (records.empty()) throw DataError("no records to compare");
    ComparisonReport report;
    report.significance = significance;

    std::set<std::string> model_ids;
    bool any_correctness = false;
    for (const MpsRecord& r : records) {
        model_ids.insert(r.model_id);
        if (r.correct.has_value()) any_correctness = true;
    }
    if (!any_correctness) {
        if (model_ids.size() >= 3) {
            report.consensus_abstentions = apply_consensus(records);
            report.notes.push_back(
                "no ground truth available; correctness uses the strict-majority consensus "
                "proxy (" +
                std::to_string(report.consensus_abstentions) + " image(s) without a majority)");
        } else {
            report.notes.push_back(
                "no ground truth and fewer than three models; correctness statistics "
                "are unavailable");
        }
    }

    int total_degenerate = 0;
    for (const std::string& model : model_ids) {
        ModelSummary summary;
        summary.model_id = model;
        summary.architecture_tag = tag_of(tags, model);
        std::vector<double> areas_all, areas_labeled, areas_correct, areas_incorrect;
        for (const MpsRecord& r : records) {
            if (r.model_id != model) continue;
            ++summary.record_count;
            if (r.correct.has_value()) {
                ++summary.labeled_count;
                if (*r.correct) ++summary.correct_count;
                else ++summary.incorrect_count;
            }
            if (r.degenerate) {
                ++summary.degenerate_count;
                ++total_degenerate;
                continue;  // degenerate masks carry no usable area
            }
            areas_all.push_back(r.area_ratio);
            if (r.correct.has_value()) {
                areas_labeled.push_back(r.area_ratio);
                (*r.correct ? areas_correct : areas_incorrect).push_back(r.area_ratio);
            }
        }
        if (!areas_all.empty()) summary.area_overall = mean_of(areas_all);
        if (!areas_labeled.empty()) summary.area_labeled = mean_of(areas_labeled);
        if (!areas_correct.empty()) summary.area_correct = mean_of(areas_correct);
        if (!areas_incorrect.empty()) summary.area_incorrect = mean_of(areas_incorrect);
        if (summary.labeled_count > 0) {
            summary.accuracy = static_cast<double>(summary.correct_count) /
                               static_cast<double>(summary.labeled_count);
        }
        report.models.push_back(std::move(summary));
    }
    if (total_degenerate > 0) {
        report.notes.push_back(std::to_string(total_degenerate) +
                               " degenerate record(s) excluded from area statistics");
    }

    if (model_ids.size() >= 2) {
        try {
            report.dice_matrix = pairwise_matrix(records, MaskMetric::dice);
            report.hausdorff_matrix = pairwise_matrix(records, MaskMetric::hausdorff);
            report.grid_note = "pairwise matrices resampled to a " +
                               std::to_string(report.dice_matrix->grid_height) + "x" +
                               std::to_string(report.dice_matrix->grid_width) +
                               " reference grid over " +
                               std::to_string(report.dice_matrix->image_count) +
                               " shared image(s)";
        } catch (const DataError& e) {
            report.notes.push_back(std::string("pairwise matrices skipped: ") + e.what());
        }
    } else {
        report.notes.push_back("pairwise matrices need at least two models");
    }

    // Area comparison across architecture tags.
    {
        std::map<std::string, std::vector<double>> by_tag;
        for (const MpsRecord& r : records) {
            if (r.degenerate) continue;
            by_tag[tag_of(tags, r.model_id)].push_back(r.area_ratio);
        }
        GroupedSample sample;
        bool small_groups = false;
        for (auto& [tag, values] : by_tag) {
            if (values.empty()) continue;
            if (values.size() < 5) small_groups = true;
            sample.groups.push_back(Group{tag, std::move(values)});
        }
        if (sample.groups.size() >= 2) {
            try {
                StatEntry entry;
                entry.test = "kruskal_wallis_area_across_architectures";
                entry.result = kruskal_wallis(sample);
                entry.threshold = significance;
                entry.significant = entry.result.p_value < significance;
                report.stats.push_back(std::move(entry));
                if (small_groups) {
                    report.notes.push_back(
                        "at least one architecture group has fewer than five areas; the "
                        "chi-squared approximation is coarse at that size");
                }
            } catch (const DataError& e) {
                report.notes.push_back(std::string("Kruskal-Wallis skipped: ") + e.what());
            }
        } else {
            report.notes.push_back(
                "Kruskal-Wallis skipped: needs non-degenerate areas from at least two "
                "architecture tags");
        }
    }

    // Within-tag comparison, blocked by image, over tags holding several models.
    {
        std::map<std::string, std::vector<std::string>> models_by_tag;
        for (const std::string& model : model_ids) {
            models_by_tag[tag_of(tags, model)].push_back(model);
        }
        std::map<std::string, std::map<std::string, double>> area_by_model_image;
        for (const MpsRecord& r : records) {
            if (r.degenerate) continue;
            area_by_model_image[r.model_id][r.image_id] = r.area_ratio;
        }
        std::vector<StatEntry> friedman_entries;
        for (const auto& [tag, models] : models_by_tag) {
            if (models.size() < 2) continue;
            std::set<std::string> common;
            bool first = true;
            for (const std::string& model : models) {
                std::set<std::string> images;
                for (const auto& [image, area] : area_by_model_image[model]) {
                    (void)area;
                    images.insert(image);
                }
                if (first) {
                    common = std::move(images);
                    first = false;
                } else {
                    std::set<std::string> kept;
                    std::set_intersection(common.begin(), common.end(), images.begin(),
                                          images.end(), std::inserter(kept, kept.begin()));
                    common = std::move(kept);
                }
            }
            if (common.size() < 2) {
                report.notes.push_back("Friedman skipped for tag '" + tag +
                                       "': fewer than two images shared by every model");
                continue;
            }
            BlockMatrix blocks;
            blocks.treatments = static_cast<int>(models.size());
            for (const std::string& image : common) {
                ++blocks.blocks;
                for (const std::string& model : models) {
                    blocks.values.push_back(area_by_model_image[model][image]);
                }
            }
            StatEntry entry;
            entry.test = "friedman_area_within_" + tag;
            entry.result = friedman(blocks);
            entry.threshold = significance;
            friedman_entries.push_back(std::move(entry));
        }
        if (!friedman_entries.empty()) {
            std::vector<double> raw;
            raw.reserve(friedman_entries.size());
            for (const StatEntry& e : friedman_entries) raw.push_back(e.result.p_value);
            const std::vector<double> corrected = bonferroni(raw);
            for (std::size_t i = 0; i < friedman_entries.size(); ++i) {
                friedman_entries[i].corrected_p = corrected[i];
                friedman_entries[i].significant = corrected[i] < significance;
                report.stats.push_back(std::move(friedman_entries[i]));
            }
        }
    }

    try {
        report.effect = fit_size_model(records);
        report.notes.push_back(
            "size effect treats model indicators as fixed effects; per-image random "
            "effects are not modeled");
    } catch (const DataError& e) {
        report.effect_note = e.what();
    }

    try {
        report.top_models = select_top_models(records, tags);
        std::vector<std::string> winners;
        winners.reserve(report.top_models.size());
        for (const auto& [tag, model] : report.top_models) {
            (void)tag;
            winners.push_back(model);
        }
        const auto [all_correct, all_incorrect] = intersect_by_fidelity(records, winners);
        report.all_correct_images = all_correct.size();
        report.all_incorrect_images = all_incorrect.size();
    } catch (const DataError& e) {
        report.notes.push_back(std::string("model selection skipped: ") + e.what());
    }

    return report;
}

std::string render_summary_csv(const ComparisonReport& report) {
    std::string out = "model_id,area,correct,incorrect,mean,accuracy\n";
    for (const ModelSummary& m : report.models) {
        out += m.model_id;
        out += ',';
        out += opt17(m.area_labeled);
        out += ',';
        out += opt17(m.area_correct);
        out += ',';
        out += opt17(m.area_incorrect);
        out += ',';
        out += opt17(m.area_overall);
        out += ',';
        out += opt17(m.accuracy);
        out += '\n';
    }
    return out;
}

std::string render_summary_markdown(const ComparisonReport& report) {
    std::string out = "| Model | Area | Correct | Incorrect | Mean | Accuracy |\n";
    out += "| --- | --- | --- | --- | --- | --- |\n";
    for (const ModelSummary& m : report.models) {
        out += "| " + m.model_id + " | " + opt3(m.area_labeled) + " | " + opt3(m.area_correct) +
               " | " + opt3(m.area_incorrect) + " | " + opt3(m.area_overall) + " | " +
               opt3(m.accuracy) + " |\n";
    }
    return out;
}

std::string render_matrix_csv(const PairwiseMatrix& matrix) {
    std::string out = "model_id";
    for (const std::string& model : matrix.model_ids) out += "," + model;
    out += '\n';
    const std::size_t n = matrix.model_ids.size();
    for (std::size_t i = 0; i < n; ++i) {
        out += matrix.model_ids[i];
        for (std::size_t j = 0; j < n; ++j) out += "," + fmt17(matrix.at(i, j));
        out += '\n';
    }
    return out;
}

std::string render_matrix_markdown(const PairwiseMatrix& matrix) {
    std::string out = "| |";
    for (const std::string& model : matrix.model_ids) out += " " + model + " |";
    out += "\n|";
    for (std::size_t j = 0; j <= matrix.model_ids.size(); ++j) out += " --- |";
    out += '\n';
    const std::size_t n = matrix.model_ids.size();
    for (std::size_t i = 0; i < n; ++i) {
        out += "| " + matrix.model_ids[i] + " |";
        for (std::size_t j = 0; j < n; ++j) out += " " + fmt3(matrix.at(i, j)) + " |";
        out += '\n';
    }
    return out;
}

std::string render_stats_json(const ComparisonReport& report) {
    json tests = json::array();
    for (const StatEntry& entry : report.stats) {
        json t{{"test", entry.test},
               {"statistic", entry.result.statistic},
               {"df", entry.result.df},
               {"p_value", entry.result.p_value},
               {"tie_corrected", entry.result.tie_corrected},
               {"corrected_p", nullptr},
               {"threshold", entry.threshold},
               {"significant", entry.significant}};
        if (entry.corrected_p) t["corrected_p"] = *entry.corrected_p;
        tests.push_back(std::move(t));
    }
    json doc{{"significance", report.significance},
             {"tests", std::move(tests)},
             {"effect", nullptr},
             {"top_models", report.top_models},
             {"all_correct_images", report.all_correct_images},
             {"all_incorrect_images", report.all_incorrect_images},
             {"consensus_abstentions", report.consensus_abstentions},
             {"grid", report.grid_note},
             {"notes", report.notes}};
    if (report.effect) {
        doc["effect"] = {{"coefficient", report.effect->coefficient},
                         {"std_error", report.effect->std_error},
                         {"p_value", report.effect->p_value}};
    }
    if (report.effect_note) doc["effect_note"] = *report.effect_note;
    return doc.dump(2) + "\n";
}

std::string render_report_markdown(const ComparisonReport& report) {
    std::string out = "# Minimal sufficient pixel set comparison\n\n";
    int total_records = 0;
    for (const ModelSummary& m : report.models) total_records += m.record_count;
    out += std::to_string(report.models.size()) + " model(s), " + std::to_string(total_records) +
           " record(s), significance threshold " + fmt4g(report.significance) + ".\n\n";

    out += "## Mask area by model\n\n";
    out += render_summary_markdown(report);
    out += "\nArea, Correct and Incorrect average over records with known correctness; "
           "Mean averages every non-degenerate record.\n";

    if (report.dice_matrix) {
        out += "\n## Pairwise mask similarity\n\n" + report.grid_note + ".\n";
        out += "\n### Dice overlap\n\n" + render_matrix_markdown(*report.dice_matrix);
        if (report.hausdorff_matrix) {
            out += "\n### Hausdorff distance\n\n" + render_matrix_markdown(*report.hausdorff_matrix);
        }
    }

    out += "\n## Hypothesis tests\n\n";
    if (report.stats.empty()) {
        out += "No test had enough data to run.\n";
    } else {
        for (const StatEntry& entry : report.stats) {
            out += "- `" + entry.test + "`: statistic " + fmt4g(entry.result.statistic) + ", df " +
                   std::to_string(entry.result.df) + ", p " + fmt4g(entry.result.p_value);
            if (entry.corrected_p) out += ", corrected p " + fmt4g(*entry.corrected_p);
            if (entry.result.tie_corrected) out += ", tie-corrected";
            out += entry.significant ? "; significant\n" : "; not significant\n";
        }
    }

    out += "\n## Incorrect-classification size effect\n\n";
    if (report.effect) {
        out += "Incorrectly classified images shift the mask area ratio by " +
               fmt4g(report.effect->coefficient) + " (standard error " +
               fmt4g(report.effect->std_error) + ", p " + fmt4g(report.effect->p_value) +
               ") after per-model offsets.\n";
    } else {
        out += "Not estimated: " +
               (report.effect_note ? *report.effect_note : std::string("unknown reason")) + ".\n";
    }

    if (!report.top_models.empty()) {
        out += "\n## Best model per architecture\n\n";
        for (const auto& [tag, model] : report.top_models) {
            out += "- " + tag + ": " + model + "\n";
        }
        out += "\nImages every selected model explains correctly: " +
               std::to_string(report.all_correct_images) + "; incorrectly: " +
               std::to_string(report.all_incorrect_images) + ".\n";
    }

    if (!report.notes.empty()) {
        out += "\n## Notes\n\n";
        for (const std::string& note : report.notes) out += "- " + note + "\n";
    }
    return out;
}

namespace {

struct ViolinLayout {
    static constexpr double kSlot = 140.0;
    static constexpr double kLeft = 70.0;
    static constexpr double kTop = 48.0;
    static constexpr double kPlotHeight = 360.0;
    static constexpr double kBottom = 70.0;
};

const char* kPalette[] = {"#4C72B0", "#DD8452", "#55A164", "#C44E52",
                          "#8172B3", "#937860", "#DA8BC3", "#8C8C8C"};

std::string xml_escape(const std::string& raw) {
    std::string out;
    for (char c : raw) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string plot_violin(const std::vector<MpsRecord>& records,
                        const std::map<std::string, std::string>& tags,
                        std::vector<std::string>* warnings) {
    std::map<std::string, std::vector<double>> by_model;
    for (const MpsRecord& r : records) {
        if (r.degenerate) continue;
        by_model[r.model_id].push_back(r.area_ratio);
    }
    std::vector<std::pair<std::string, std::vector<double>>> usable;
    for (auto& [model, values] : by_model) {
        if (values.size() < 2) {
            if (warnings) {
                warnings->push_back("model '" + model +
                                    "' skipped in violin plot: fewer than two usable records");
            }
            continue;
        }
        std::sort(values.begin(), values.end());
        usable.emplace_back(model, std::move(values));
    }

    std::map<std::string, std::string> tag_colors;
    {
        std::set<std::string> seen_tags;
        for (const auto& [model, values] : usable) {
            (void)values;
            seen_tags.insert(tag_of(tags, model));
        }
        std::size_t i = 0;
        for (const std::string& tag : seen_tags) {
            tag_colors[tag] = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
            ++i;
        }
    }

    const double plot_width = std::max<std::size_t>(usable.size(), 1) * ViolinLayout::kSlot;
    const double width = ViolinLayout::kLeft + plot_width + 150.0;  // room for the legend
    const double height = ViolinLayout::kTop + ViolinLayout::kPlotHeight + ViolinLayout::kBottom;

    double hi = 0.0;
    for (const auto& [model, values] : usable) {
        (void)model;
        hi = std::max(hi, values.back());
    }
    if (hi <= 0.0) hi = 1.0;
    hi *= 1.08;
    const auto y_of = [&](double v) {
        return ViolinLayout::kTop + ViolinLayout::kPlotHeight * (1.0 - v / hi);
    };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(width) +
                      "\" height=\"" + svg_num(height) + "\" viewBox=\"0 0 " + svg_num(width) +
                      " " + svg_num(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    svg += "<text x=\"" + svg_num(ViolinLayout::kLeft) + "\" y=\"24\" font-family=\"sans-serif\" "
           "font-size=\"15\" fill=\"#222\">Minimal sufficient pixel set area by model</text>\n";

    // Axes and ticks.
    const double axis_bottom = ViolinLayout::kTop + ViolinLayout::kPlotHeight;
    svg += "<line x1=\"" + svg_num(ViolinLayout::kLeft) + "\" y1=\"" +
           svg_num(ViolinLayout::kTop) + "\" x2=\"" + svg_num(ViolinLayout::kLeft) + "\" y2=\"" +
           svg_num(axis_bottom) + "\" stroke=\"#444\"/>\n";
    svg += "<line x1=\"" + svg_num(ViolinLayout::kLeft) + "\" y1=\"" + svg_num(axis_bottom) +
           "\" x2=\"" + svg_num(ViolinLayout::kLeft + plot_width) + "\" y2=\"" +
           svg_num(axis_bottom) + "\" stroke=\"#444\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = hi * t / 4.0;
        const double y = y_of(v);
        svg += "<line x1=\"" + svg_num(ViolinLayout::kLeft - 5) + "\" y1=\"" + svg_num(y) +
               "\" x2=\"" + svg_num(ViolinLayout::kLeft) + "\" y2=\"" + svg_num(y) +
               "\" stroke=\"#444\"/>\n";
        svg += "<text x=\"" + svg_num(ViolinLayout::kLeft - 9) + "\" y=\"" + svg_num(y + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\" "
               "text-anchor=\"end\">" +
               fmt3(v) + "</text>\n";
    }
    svg += "<text transform=\"translate(16," + svg_num(ViolinLayout::kTop + ViolinLayout::kPlotHeight / 2) +
           ") rotate(-90)\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#444\" "
           "text-anchor=\"middle\">area ratio</text>\n";

    for (std::size_t m = 0; m < usable.size(); ++m) {
        const auto& [model, values] = usable[m];
        const std::string color = tag_colors[tag_of(tags, model)];
        const double cx = ViolinLayout::kLeft + (static_cast<double>(m) + 0.5) * ViolinLayout::kSlot;
        const double n = static_cast<double>(values.size());
        const double mean = mean_of(values);
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        const double sd = values.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
        const double iqr = quantile(values, 0.75) - quantile(values, 0.25);

        double bandwidth = 0.0;
        {
            std::vector<double> candidates;
            if (sd > 0.0) candidates.push_back(sd);
            if (iqr > 0.0) candidates.push_back(iqr / 1.34);
            if (!candidates.empty()) {
                bandwidth = 0.9 * *std::min_element(candidates.begin(), candidates.end()) *
                            std::pow(n, -0.2);
            }
        }

        svg += "<g class=\"violin\" data-model=\"" + xml_escape(model) + "\">\n";
        if (bandwidth <= 0.0) {
            // All areas identical: a density would collapse, draw a tick.
            const double y = y_of(values.front());
            svg += "<line x1=\"" + svg_num(cx - ViolinLayout::kSlot * 0.3) + "\" y1=\"" +
                   svg_num(y) + "\" x2=\"" + svg_num(cx + ViolinLayout::kSlot * 0.3) +
                   "\" y2=\"" + svg_num(y) + "\" stroke=\"" + color +
                   "\" stroke-width=\"3\"/>\n";
        } else {
            const double lo_v = std::max(0.0, values.front() - 3.0 * bandwidth);
            const double hi_v = values.back() + 3.0 * bandwidth;
            constexpr int kSamples = 101;
            std::vector<double> ys(kSamples), density(kSamples);
            double max_density = 0.0;
            for (int i = 0; i < kSamples; ++i) {
                const double v = lo_v + (hi_v - lo_v) * i / (kSamples - 1);
                ys[i] = v;
                double d = 0.0;
                for (double sample : values) {
                    const double z = (v - sample) / bandwidth;
                    d += std::exp(-0.5 * z * z);
                }
                d /= n * bandwidth * std::sqrt(2.0 * 3.14159265358979323846);
                density[i] = d;
                max_density = std::max(max_density, d);
            }
            const double half_max = ViolinLayout::kSlot * 0.38;
            std::string path = "M";
            for (int i = 0; i < kSamples; ++i) {
                const double half = density[i] / max_density * half_max;
                path += (i == 0 ? std::string() : std::string(" L")) + " " +
                        svg_num(cx + half) + " " + svg_num(y_of(ys[i]));
            }
            for (int i = kSamples - 1; i >= 0; --i) {
                const double half = density[i] / max_density * half_max;
                path += " L " + svg_num(cx - half) + " " + svg_num(y_of(ys[i]));
            }
            path += " Z";
            svg += "<path d=\"" + path + "\" fill=\"" + color +
                   "\" fill-opacity=\"0.55\" stroke=\"" + color + "\"/>\n";
            const double median_y = y_of(quantile(values, 0.5));
            svg += "<line x1=\"" + svg_num(cx - half_max * 0.5) + "\" y1=\"" + svg_num(median_y) +
                   "\" x2=\"" + svg_num(cx + half_max * 0.5) + "\" y2=\"" + svg_num(median_y) +
                   "\" stroke=\"#ffffff\" stroke-width=\"2\"/>\n";
        }
        svg += "<text x=\"" + svg_num(cx) + "\" y=\"" + svg_num(axis_bottom + 20) +
               "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\" "
               "text-anchor=\"middle\">" +
               xml_escape(model) + "</text>\n";
        svg += "</g>\n";
    }

    {
        double ly = ViolinLayout::kTop;
        const double lx = ViolinLayout::kLeft + plot_width + 20.0;
        for (const auto& [tag, color] : tag_colors) {
            svg += "<rect x=\"" + svg_num(lx) + "\" y=\"" + svg_num(ly) +
                   "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
            svg += "<text x=\"" + svg_num(lx + 18) + "\" y=\"" + svg_num(ly + 10) +
                   "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">" +
                   xml_escape(tag) + "</text>\n";
            ly += 18.0;
        }
    }
    if (usable.empty()) {
        svg += "<text x=\"" + svg_num(width / 2) + "\" y=\"" +
               svg_num(ViolinLayout::kTop + ViolinLayout::kPlotHeight / 2) +
               "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#666\" "
               "text-anchor=\"middle\">no model has enough records to draw</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void write_comparison(const ComparisonReport& report, const std::vector<MpsRecord>& records,
                      const std::map<std::string, std::string>& tags,
                      const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto write = [&](const char* name, const std::string& text) {
        std::ofstream out(out_dir / name, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write '" + (out_dir / name).string() + "'");
        out << text;
    };
    write("report.md", render_report_markdown(report));
    write("summary.csv", render_summary_csv(report));
    if (report.dice_matrix) write("dice.csv", render_matrix_csv(*report.dice_matrix));
    if (report.hausdorff_matrix) {
        write("hausdorff.csv", render_matrix_csv(*report.hausdorff_matrix));
    }
    write("stats.json", render_stats_json(report));
    write("violins.svg", plot_violin(records, tags, nullptr));
}

}  // namespace mpskit
