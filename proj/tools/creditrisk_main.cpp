// Command-line front end: feature-engineering `prepare`, synthetic data
// `synth`, the classifier x resampler grid `run`, and `report` re-rendering
// of stored results.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "creditrisk/csv.hpp"
#include "creditrisk/errors.hpp"
#include "creditrisk/harness.hpp"
#include "creditrisk/prepare.hpp"
#include "creditrisk/synthetic.hpp"

namespace {

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw creditrisk::ConfigError("cannot open config file '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw creditrisk::ConfigError("config file '" + path + "': " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw creditrisk::ParseError("cannot open '" + path + "' for writing");
    out << content;
}

int run_prepare_command(const std::string& input, const std::string& config_path,
                        const std::string& output, const std::string& correlations,
                        const std::string& summary_path) {
    creditrisk::PipelineConfig config;
    if (!config_path.empty()) {
        config = creditrisk::pipeline_config_from_json(load_json_file(config_path));
    }
    const creditrisk::RawTable raw = creditrisk::read_csv_file(input);
    const creditrisk::PrepareResult result = creditrisk::run_prepare(raw, config);

    creditrisk::write_csv_file(output, creditrisk::dataset_to_table(result.dataset));
    creditrisk::write_csv_file(correlations,
                               creditrisk::correlations_to_table(result.correlations));
    write_text_file(summary_path, result.summary.to_json().dump(2) + "\n");

    const auto& s = result.summary;
    std::printf("prepared %zu rows x %zu features -> %s\n", s.rows_final, s.n_features_final,
                output.c_str());
    std::printf("default: %.1f%%  fully paid: %.1f%%  imbalance ratio: %.2f\n",
                s.default_percent, s.fully_paid_percent, s.imbalance_ratio);
    for (const auto& message : s.messages) {
        std::fprintf(stderr, "note: %s\n", message.c_str());
    }
    return 0;
}

int run_synth_command(std::size_t n, double ratio, std::size_t features, double separation,
                      std::uint64_t seed, const std::string& out) {
    creditrisk::SyntheticSpec spec;
    spec.n_samples = n;
    spec.imbalance_ratio = ratio;
    spec.n_features = features;
    spec.class_separation = separation;
    spec.seed = seed;
    const creditrisk::Dataset dataset = creditrisk::generate_synthetic(spec);
    creditrisk::write_csv_file(out, creditrisk::dataset_to_table(dataset));
    const auto counts = creditrisk::class_counts(dataset);
    std::printf("wrote %zu rows (%zu majority / %zu minority) to %s\n", dataset.n_rows(),
                counts.n_majority, counts.n_minority, out.c_str());
    return 0;
}

int run_grid_command(const std::string& config_path, const std::string& data_path,
                     const std::string& out_dir, std::size_t threads, long long seed_override) {
    creditrisk::ExperimentConfig config;
    if (!config_path.empty()) {
        config = creditrisk::experiment_config_from_json(load_json_file(config_path));
    }
    if (seed_override >= 0) config.master_seed = static_cast<std::uint64_t>(seed_override);

    const creditrisk::Dataset dataset =
        creditrisk::dataset_from_table(creditrisk::read_csv_file(data_path));
    const creditrisk::GridOutput output = creditrisk::run_grid(config, dataset, threads);

    std::filesystem::create_directories(out_dir);
    const auto path = [&out_dir](const char* name) {
        return (std::filesystem::path(out_dir) / name).string();
    };
    write_text_file(path("results.json"),
                    creditrisk::results_to_json(output, config).dump(2) + "\n");
    write_text_file(path("results.csv"), creditrisk::render_csv(output.rows));
    write_text_file(path("table.txt"), creditrisk::render_text(output.rows));
    write_text_file(path("resample_audit.jsonl"), creditrisk::audit_to_jsonl(output.audit));

    std::fputs(creditrisk::render_text(output.rows).c_str(), stdout);
    std::printf("results written to %s\n", out_dir.c_str());
    return 0;
}

int run_report_command(const std::string& results_path, const std::string& format,
                       const std::string& out) {
    std::ifstream in(results_path);
    if (!in) throw creditrisk::ParseError("cannot open results file '" + results_path + "'");
    nlohmann::json stored;
    try {
        stored = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw creditrisk::ParseError("results file '" + results_path + "': " + e.what());
    }
    const auto rows = creditrisk::result_rows_from_json(stored);
    const std::string rendered = creditrisk::render_report(rows, format);
    if (out.empty()) {
        std::fputs(rendered.c_str(), stdout);
    } else {
        write_text_file(out, rendered);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Credit-risk prediction on imbalanced lending data: feature engineering, "
                 "resampling, classification, and imbalance-aware evaluation"};
    app.require_subcommand(1);

    auto* prepare = app.add_subcommand(
        "prepare", "Run the feature-engineering pipeline on a raw loan CSV");
    std::string prepare_input;
    std::string prepare_config;
    std::string prepare_output = "prepared.csv";
    std::string prepare_correlations = "correlations.csv";
    std::string prepare_summary = "prepare_summary.json";
    prepare->add_option("--input", prepare_input, "Raw loan CSV")->required();
    prepare->add_option("--config", prepare_config, "Pipeline config (JSON)");
    prepare->add_option("--output", prepare_output, "Processed dataset CSV");
    prepare->add_option("--correlations", prepare_correlations, "Correlation report CSV");
    prepare->add_option("--summary", prepare_summary, "Summary JSON");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic imbalanced dataset CSV");
    std::size_t synth_n = 0;
    double synth_ratio = 1.0;
    std::size_t synth_features = 10;
    double synth_sep = 1.0;
    std::uint64_t synth_seed = 0;
    std::string synth_out;
    synth->add_option("--n", synth_n, "Total sample count")->required();
    synth->add_option("--ratio", synth_ratio, "Imbalance ratio (majority/minority)");
    synth->add_option("--features", synth_features, "Feature dimension");
    synth->add_option("--sep", synth_sep, "Class mean separation in within-class sd units");
    synth->add_option("--seed", synth_seed, "Generator seed");
    synth->add_option("--out", synth_out, "Output CSV")->required();

    auto* run = app.add_subcommand("run", "Run the classifier x resampler experiment grid");
    std::string run_config;
    std::string run_data;
    std::string run_out = "results";
    std::size_t run_threads = 1;
    long long run_seed = -1;
    run->add_option("--config", run_config, "Experiment config (JSON)");
    run->add_option("--data", run_data, "Prepared dataset CSV (features + label)")->required();
    run->add_option("--out", run_out, "Output directory");
    run->add_option("--threads", run_threads, "Parallel worker bound");
    run->add_option("--seed", run_seed, "Master seed override");

    auto* report = app.add_subcommand("report", "Re-render stored results.json");
    std::string report_results;
    std::string report_format = "text";
    std::string report_out;
    report->add_option("--results", report_results, "results.json path")->required();
    report->add_option("--format", report_format, "csv, text, or json");
    report->add_option("--out", report_out, "Output file (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        if (prepare->parsed()) {
            return run_prepare_command(prepare_input, prepare_config, prepare_output,
                                       prepare_correlations, prepare_summary);
        }
        if (synth->parsed()) {
            return run_synth_command(synth_n, synth_ratio, synth_features, synth_sep,
                                     synth_seed, synth_out);
        }
        if (run->parsed()) {
            return run_grid_command(run_config, run_data, run_out, run_threads, run_seed);
        }
        if (report->parsed()) {
            return run_report_command(report_results, report_format, report_out);
        }
    } catch (const creditrisk::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const creditrisk::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
