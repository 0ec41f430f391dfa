#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "mpskit/errors.hpp"
#include "mpskit/pipeline.hpp"
#include "mpskit/report.hpp"
#include "mpskit/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;

std::map<std::string, std::string> tags_near_records(const std::filesystem::path& records_dir) {
    std::map<std::string, std::string> tags;
    const auto meta = mpskit::load_run_meta(records_dir);
    if (meta) {
        for (const mpskit::ModelInfo& m : meta->models) tags[m.model_id] = m.architecture_tag;
    }
    return tags;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"black-box minimal sufficient pixel set extraction and model comparison"};
    app.set_version_flag("--version", mpskit::version_string());
    app.require_subcommand(1);

    std::string config_path;
    int workers = 1;
    bool force = false;
    CLI::App* extract = app.add_subcommand("extract", "run the search over a model/image grid");
    extract->add_option("--config", config_path, "run configuration JSON")->required();
    extract->add_option("--workers", workers, "parallel extraction jobs")->default_val(1);
    extract->add_flag("--force", force, "recompute records that already exist");

    std::string records_dir;
    std::string out_dir;
    std::string labels_path;
    double significance = 0.01;
    CLI::App* compare = app.add_subcommand("compare", "full comparison report for stored records");
    compare->add_option("--records", records_dir, "run output or records directory")->required();
    compare->add_option("--out", out_dir, "report output directory")->required();
    compare->add_option("--labels", labels_path, "image_id,class_index CSV");
    compare->add_option("--significance", significance, "test threshold")->default_val(0.01);

    CLI::App* stats = app.add_subcommand("stats", "hypothesis test battery as JSON on stdout");
    stats->add_option("--records", records_dir, "run output or records directory")->required();
    stats->add_option("--labels", labels_path, "image_id,class_index CSV");
    stats->add_option("--significance", significance, "test threshold")->default_val(0.01);

    std::string format = "md";
    CLI::App* report = app.add_subcommand("report", "summary tables on stdout");
    report->add_option("--records", records_dir, "run output or records directory")->required();
    report->add_option("--format", format, "csv or md")
        ->check(CLI::IsMember({"csv", "md"}))
        ->default_val("md");

    CLI::App* plot = app.add_subcommand("plot", "area distribution violins as SVG");
    plot->add_option("--records", records_dir, "run output or records directory")->required();
    plot->add_option("--out", out_dir, "output SVG path")->required();

    CLI::App* check = app.add_subcommand("check", "re-derive stored records and verify the aggregate");
    check->add_option("--records", records_dir, "run output or records directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (extract->parsed()) {
            const mpskit::RunConfig config = mpskit::load_run_config(config_path);
            mpskit::ExtractOptions options;
            options.workers = workers;
            options.force = force;
            const mpskit::ExtractSummary summary =
                mpskit::run_extraction(config, options, &std::cerr);
            std::cout << "extracted " << summary.jobs_run << " record(s), resumed "
                      << summary.jobs_skipped << ", models " << summary.models_loaded
                      << " loaded / " << summary.models_failed << " failed\n";
            return kExitOk;
        }

        if (check->parsed()) {
            const mpskit::CheckSummary summary =
                mpskit::check_run_consistency(records_dir, &std::cerr);
            std::cout << "checked " << summary.records_checked << " record(s)"
                      << (summary.aggregate_checked ? ", aggregate consistent" : "") << "\n";
            return kExitOk;
        }

        std::vector<mpskit::MpsRecord> records = mpskit::load_records(records_dir);
        std::map<std::string, std::string> tags = tags_near_records(records_dir);
        if (!labels_path.empty()) {
            const int matched = mpskit::apply_labels(records, mpskit::load_labels_csv(labels_path));
            std::cerr << "labels matched " << matched << " of " << records.size()
                      << " record(s)\n";
        }

        if (compare->parsed()) {
            const mpskit::ComparisonReport rep =
                mpskit::make_report(records, tags, significance);
            mpskit::write_comparison(rep, records, tags, out_dir);
            std::cout << "report written to " << out_dir << "\n";
        } else if (stats->parsed()) {
            const mpskit::ComparisonReport rep =
                mpskit::make_report(records, tags, significance);
            std::cout << mpskit::render_stats_json(rep);
        } else if (report->parsed()) {
            const mpskit::ComparisonReport rep = mpskit::make_report(records, tags);
            std::cout << (format == "csv" ? mpskit::render_summary_csv(rep)
                                          : mpskit::render_report_markdown(rep));
        } else if (plot->parsed()) {
            std::vector<std::string> warnings;
            const std::string svg = mpskit::plot_violin(records, tags, &warnings);
            for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
            std::filesystem::path out_path(out_dir);
            if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
            std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
            if (!out) throw mpskit::DataError("cannot write '" + out_path.string() + "'");
            out << svg;
            std::cout << "violin plot written to " << out_dir << "\n";
        }
        return kExitOk;
    } catch (const mpskit::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const mpskit::BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const mpskit::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}
