#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "creditrisk/classifiers.hpp"
#include "creditrisk/dataset.hpp"
#include "creditrisk/errors.hpp"
#include "creditrisk/metrics.hpp"
#include "creditrisk/pipeline.hpp"
#include "creditrisk/resampling.hpp"
#include "creditrisk/rng.hpp"

namespace creditrisk {

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
    std::vector<ClassifierKind> classifiers = {ClassifierKind::kLogistic,
                                               ClassifierKind::kLda,
                                               ClassifierKind::kForest};
    std::vector<ResampleMethod> resamplers = {
        ResampleMethod::kNone, ResampleMethod::kRus, ResampleMethod::kRos,
        ResampleMethod::kSmote, ResampleMethod::kAdasyn, ResampleMethod::kIht,
        ResampleMethod::kSmoteTomek, ResampleMethod::kSmoteEnn};
    std::size_t repetitions = 20;
    double train_fraction = 0.7;
    std::uint64_t master_seed = 1;
    double threshold = 0.5;
    ClassifierConfig classifier_config;
    ResamplePlan resample_defaults; // method and seed overridden per cell
};

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    static const std::vector<std::string> known = {
        "classifiers", "resamplers", "repetitions", "train_fraction", "master_seed",
        "threshold", "logistic", "lda", "forest", "resampling"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
            throw ConfigError("unknown experiment config key '" + it.key() + "'");
        }
    }
    ExperimentConfig config;
    if (j.contains("classifiers")) {
        config.classifiers.clear();
        for (const auto& name : j.at("classifiers")) {
            config.classifiers.push_back(classifier_from_string(name.get<std::string>()));
        }
    }
    if (j.contains("resamplers")) {
        config.resamplers.clear();
        for (const auto& name : j.at("resamplers")) {
            config.resamplers.push_back(resampler_from_string(name.get<std::string>()));
        }
    }
    if (config.classifiers.empty() || config.resamplers.empty()) {
        throw ConfigError("at least one classifier and one resampler are required");
    }
    if (j.contains("repetitions")) config.repetitions = j.at("repetitions").get<std::size_t>();
    if (config.repetitions == 0) throw ConfigError("repetitions must be >= 1");
    if (j.contains("train_fraction")) config.train_fraction = j.at("train_fraction");
    if (j.contains("master_seed")) config.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("threshold")) config.threshold = j.at("threshold");
    if (j.contains("logistic")) {
        const auto& l = j.at("logistic");
        if (l.contains("max_iter")) config.classifier_config.logistic.max_iter = l.at("max_iter");
        if (l.contains("tol")) config.classifier_config.logistic.tol = l.at("tol");
        if (l.contains("l2")) config.classifier_config.logistic.l2 = l.at("l2");
    }
    if (j.contains("lda") && j.at("lda").contains("lambda")) {
        config.classifier_config.lda_lambda = j.at("lda").at("lambda");
    }
    if (j.contains("forest")) {
        const auto& f = j.at("forest");
        if (f.contains("n_trees")) config.classifier_config.forest.n_trees = f.at("n_trees");
        if (f.contains("max_features")) {
            config.classifier_config.forest.max_features = f.at("max_features");
        }
        if (f.contains("min_leaf")) config.classifier_config.forest.min_leaf = f.at("min_leaf");
        if (f.contains("max_depth")) config.classifier_config.forest.max_depth = f.at("max_depth");
    }
    if (j.contains("resampling")) {
        const auto& r = j.at("resampling");
        if (r.contains("k_smote")) config.resample_defaults.k_smote = r.at("k_smote");
        if (r.contains("k_enn")) config.resample_defaults.k_enn = r.at("k_enn");
        if (r.contains("beta")) config.resample_defaults.beta = r.at("beta");
        if (r.contains("adasyn_strict")) {
            config.resample_defaults.adasyn_strict = r.at("adasyn_strict");
        }
        if (r.contains("iht_estimator")) {
            const std::string name = r.at("iht_estimator");
            if (name == "logistic") config.resample_defaults.iht_estimator = IhtEstimator::kLogistic;
            else if (name == "forest") config.resample_defaults.iht_estimator = IhtEstimator::kForest;
            else throw ConfigError("iht_estimator must be 'logistic' or 'forest'");
        }
        if (r.contains("iht_cv_folds")) {
            config.resample_defaults.iht_cv_folds = r.at("iht_cv_folds");
        }
    }
    return config;
}

// Every default materialized, so stored results are self-describing.
inline nlohmann::ordered_json experiment_config_to_json(const ExperimentConfig& config) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json classifiers = nlohmann::ordered_json::array();
    for (auto kind : config.classifiers) classifiers.push_back(to_string(kind));
    j["classifiers"] = std::move(classifiers);
    nlohmann::ordered_json resamplers = nlohmann::ordered_json::array();
    for (auto method : config.resamplers) resamplers.push_back(to_string(method));
    j["resamplers"] = std::move(resamplers);
    j["repetitions"] = config.repetitions;
    j["train_fraction"] = config.train_fraction;
    j["master_seed"] = config.master_seed;
    j["threshold"] = config.threshold;
    j["logistic"] = {{"max_iter", config.classifier_config.logistic.max_iter},
                     {"tol", config.classifier_config.logistic.tol},
                     {"l2", config.classifier_config.logistic.l2}};
    j["lda"] = {{"lambda", config.classifier_config.lda_lambda}};
    j["forest"] = {{"n_trees", config.classifier_config.forest.n_trees},
                   {"max_features", config.classifier_config.forest.max_features},
                   {"min_leaf", config.classifier_config.forest.min_leaf},
                   {"max_depth", config.classifier_config.forest.max_depth}};
    j["resampling"] = {
        {"k_smote", config.resample_defaults.k_smote},
        {"k_enn", config.resample_defaults.k_enn},
        {"beta", config.resample_defaults.beta},
        {"adasyn_strict", config.resample_defaults.adasyn_strict},
        {"iht_estimator",
         config.resample_defaults.iht_estimator == IhtEstimator::kForest ? "forest" : "logistic"},
        {"iht_cv_folds", config.resample_defaults.iht_cv_folds}};
    return j;
}

inline std::string config_fingerprint(const ExperimentConfig& config) {
    const std::string canonical = experiment_config_to_json(config).dump();
    std::uint64_t hash = 0xcbf29ce484222325ULL; // FNV-1a
    for (unsigned char c : canonical) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx",
                  static_cast<unsigned long long>(hash));
    return buffer;
}

// ---------------------------------------------------------------------------
// Seed derivation (pure; collision-free across the grid)

inline std::uint64_t repetition_split_seed(std::uint64_t master, std::size_t rep) {
    return derive_seed(master, {0x5B117ULL, rep});
}

inline std::uint64_t cell_resample_seed(std::uint64_t master, std::size_t rep,
                                        std::size_t combination) {
    return derive_seed(master, {0xBA1A2CEULL, rep, combination});
}

inline std::uint64_t cell_train_seed(std::uint64_t master, std::size_t rep,
                                     std::size_t combination) {
    return derive_seed(master, {0x7BA12ULL, rep, combination});
}

// ---------------------------------------------------------------------------
// Grid execution

struct GridCombination {
    ClassifierKind classifier;
    ResampleMethod resampler;
};

inline std::vector<GridCombination> grid_combinations(const ExperimentConfig& config) {
    std::vector<GridCombination> combos;
    combos.reserve(config.classifiers.size() * config.resamplers.size());
    for (auto classifier : config.classifiers) {
        for (auto resampler : config.resamplers) combos.push_back({classifier, resampler});
    }
    return combos;
}

struct CellOutcome {
    std::optional<MetricsReport> metrics; // nullopt: metrics undefined on this split
    ResampleReport resample_report;
};

// One grid cell: resample the train split only, fit, score the untouched
// test split. Undefined metrics (degenerate test behavior) are recorded, not
// imputed; any other component error is re-thrown tagged with the cell.
inline CellOutcome run_cell(const Dataset& train, const Dataset& test,
                            const GridCombination& combo, const ExperimentConfig& config,
                            std::uint64_t resample_seed, std::uint64_t train_seed) {
    ResamplePlan plan = config.resample_defaults;
    plan.method = combo.resampler;
    plan.seed = resample_seed;
    CellOutcome outcome;
    ResampleResult resampled = resample(train, plan);
    outcome.resample_report = std::move(resampled.report);
    const AnyModel model =
        train_classifier(combo.classifier, resampled.data, config.classifier_config, train_seed);
    const std::vector<double> scores = predict_proba_all(model, test);
    try {
        outcome.metrics = evaluate_scores(test.labels(), scores, config.threshold);
    } catch (const UndefinedMetric&) {
        outcome.metrics.reset();
    } catch (const OneClassOnly&) {
        outcome.metrics.reset();
    }
    return outcome;
}

struct ResultRow {
    std::string classifier;
    std::string resampler;
    MetricsReport metrics;     // mean over the defined repetitions
    MetricsReport metrics_std; // sample standard deviation per metric
    std::size_t repetitions_used = 0;
    std::size_t undefined_runs = 0;
    std::string config_fingerprint;
};

struct AuditEntry {
    std::size_t repetition = 0;
    std::string classifier;
    std::string resampler;
    ResampleReport report;
};

struct GridOutput {
    std::vector<ResultRow> rows; // sorted by mean G-mean, descending
    std::vector<AuditEntry> audit;
};

namespace detail {

inline void accumulate(MetricsReport& sum, const MetricsReport& value) {
    sum.accuracy += value.accuracy;
    sum.auc += value.auc;
    sum.sensitivity += value.sensitivity;
    sum.specificity += value.specificity;
    sum.fp_rate += value.fp_rate;
    sum.g_mean += value.g_mean;
}

template <typename Fn>
inline void for_each_metric(MetricsReport& report, Fn&& fn) {
    fn(report.accuracy);
    fn(report.auc);
    fn(report.sensitivity);
    fn(report.specificity);
    fn(report.fp_rate);
    fn(report.g_mean);
}

} // namespace detail

// Mean and sample standard deviation over the defined repetitions, reduced
// in repetition order so results do not depend on completion order.
inline std::pair<ResultRow, std::size_t> aggregate_cells(
    const std::vector<std::optional<MetricsReport>>& per_repetition) {
    ResultRow row;
    std::vector<const MetricsReport*> defined;
    for (const auto& metrics : per_repetition) {
        if (metrics) defined.push_back(&*metrics);
    }
    row.repetitions_used = defined.size();
    row.undefined_runs = per_repetition.size() - defined.size();
    if (defined.empty()) return {row, 0};

    MetricsReport mean;
    for (const auto* metrics : defined) detail::accumulate(mean, *metrics);
    detail::for_each_metric(mean, [&defined](double& v) {
        v /= static_cast<double>(defined.size());
    });
    row.metrics = mean;

    if (defined.size() >= 2) {
        MetricsReport variance;
        auto add_sq = [](double& acc, double diff) { acc += diff * diff; };
        for (const auto* metrics : defined) {
            add_sq(variance.accuracy, metrics->accuracy - mean.accuracy);
            add_sq(variance.auc, metrics->auc - mean.auc);
            add_sq(variance.sensitivity, metrics->sensitivity - mean.sensitivity);
            add_sq(variance.specificity, metrics->specificity - mean.specificity);
            add_sq(variance.fp_rate, metrics->fp_rate - mean.fp_rate);
            add_sq(variance.g_mean, metrics->g_mean - mean.g_mean);
        }
        detail::for_each_metric(variance, [&defined](double& v) {
            v = std::sqrt(v / static_cast<double>(defined.size() - 1));
        });
        row.metrics_std = variance;
    }
    return {row, defined.size()};
}

// The experiment driver: per repetition, one fresh stratified split
// shared by every (classifier, resampler) pair; only the training side is
// ever resampled. Cells are independent given their derived seeds, so the
// thread count never changes the result.
inline GridOutput run_grid(const ExperimentConfig& config, const Dataset& dataset,
                           std::size_t threads = 1) {
    const auto combos = grid_combinations(config);
    const std::size_t reps = config.repetitions;

    std::vector<SplitIndices> splits(reps);
    std::vector<Dataset> train_sets(reps);
    std::vector<Dataset> test_sets(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        splits[r] = stratified_split_indices(dataset.labels(), config.train_fraction,
                                             repetition_split_seed(config.master_seed, r));
        train_sets[r] = select_rows(dataset, splits[r].train);
        test_sets[r] = select_rows(dataset, splits[r].test);
    }

    std::vector<std::vector<std::optional<CellOutcome>>> outcomes(
        combos.size(), std::vector<std::optional<CellOutcome>>(reps));

    const std::size_t total_cells = combos.size() * reps;
    std::atomic<std::size_t> next_cell{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t cell = next_cell.fetch_add(1);
            if (cell >= total_cells) return;
            {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (failure) return;
            }
            const std::size_t combo_idx = cell / reps;
            const std::size_t rep = cell % reps;
            const auto& combo = combos[combo_idx];
            try {
                outcomes[combo_idx][rep] = run_cell(
                    train_sets[rep], test_sets[rep], combo, config,
                    cell_resample_seed(config.master_seed, rep, combo_idx),
                    cell_train_seed(config.master_seed, rep, combo_idx));
            } catch (const Error& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) {
                    failure = std::make_exception_ptr(
                        Error(e.kind(), std::string("[classifier=") +
                                            to_string(combo.classifier) +
                                            " resampler=" + to_string(combo.resampler) +
                                            " repetition=" + std::to_string(rep) + "] " +
                                            e.what()));
                }
                return;
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& thread : pool) thread.join();
    }
    if (failure) std::rethrow_exception(failure);

    GridOutput output;
    const std::string fingerprint = config_fingerprint(config);
    for (std::size_t c = 0; c < combos.size(); ++c) {
        std::vector<std::optional<MetricsReport>> per_repetition(reps);
        for (std::size_t r = 0; r < reps; ++r) {
            per_repetition[r] = outcomes[c][r]->metrics;
            output.audit.push_back({r, to_string(combos[c].classifier),
                                    to_string(combos[c].resampler),
                                    outcomes[c][r]->resample_report});
        }
        auto [row, used] = aggregate_cells(per_repetition);
        row.classifier = to_string(combos[c].classifier);
        row.resampler = to_string(combos[c].resampler);
        row.config_fingerprint = fingerprint;
        output.rows.push_back(std::move(row));
    }
    std::stable_sort(output.rows.begin(), output.rows.end(),
                     [](const ResultRow& a, const ResultRow& b) {
                         if (a.metrics.g_mean != b.metrics.g_mean) {
                             return a.metrics.g_mean > b.metrics.g_mean;
                         }
                         if (a.classifier != b.classifier) return a.classifier < b.classifier;
                         return a.resampler < b.resampler;
                     });
    return output;
}

// ---------------------------------------------------------------------------
// Rendering

// Report row names: "RF-RUS", "LDA-SMOTE", full classifier names for
// the non-sampled baselines.
inline std::string display_name(const std::string& classifier, const std::string& resampler) {
    auto classifier_short = [&classifier]() -> std::string {
        if (classifier == "logistic") return "LR";
        if (classifier == "lda") return "LDA";
        if (classifier == "forest") return "RF";
        return classifier;
    };
    if (resampler == "none") {
        if (classifier == "logistic") return "Logistic Regression";
        if (classifier == "lda") return "Linear Discriminant Analysis";
        if (classifier == "forest") return "Random Forest";
        return classifier;
    }
    auto resampler_short = [&resampler]() -> std::string {
        if (resampler == "rus") return "RUS";
        if (resampler == "ros") return "ROS";
        if (resampler == "smote") return "SMOTE";
        if (resampler == "adasyn") return "ADASYN";
        if (resampler == "iht") return "IHT";
        if (resampler == "smote_tomek") return "SMOTE-Tomek";
        if (resampler == "smote_enn") return "SMOTE-ENN";
        return resampler;
    };
    return classifier_short() + "-" + resampler_short();
}

inline std::string render_csv(const std::vector<ResultRow>& rows) {
    std::string out(metrics_csv_header());
    out.push_back('\n');
    for (const auto& row : rows) {
        out += metrics_csv_row(display_name(row.classifier, row.resampler), row.metrics);
        out.push_back('\n');
    }
    return out;
}

inline std::string render_text(const std::vector<ResultRow>& rows) {
    char line[256];
    std::string out;
    std::snprintf(line, sizeof(line), "%-28s %9s %9s %12s %12s %9s %9s\n", "Classifier",
                  "Accuracy", "AUC", "Sensitivity", "Specificity", "FP-Rate", "G-mean");
    out += line;
    out += std::string(92, '-');
    out.push_back('\n');
    for (const auto& row : rows) {
        std::snprintf(line, sizeof(line), "%-28s %9.3f %9.3f %12.3f %12.3f %9.3f %9.3f\n",
                      display_name(row.classifier, row.resampler).c_str(),
                      row.metrics.accuracy, row.metrics.auc, row.metrics.sensitivity,
                      row.metrics.specificity, row.metrics.fp_rate, row.metrics.g_mean);
        out += line;
    }
    return out;
}

inline nlohmann::ordered_json metrics_to_json(const MetricsReport& metrics) {
    nlohmann::ordered_json j;
    j["accuracy"] = metrics.accuracy;
    j["auc"] = metrics.auc;
    j["sensitivity"] = metrics.sensitivity;
    j["specificity"] = metrics.specificity;
    j["fp_rate"] = metrics.fp_rate;
    j["g_mean"] = metrics.g_mean;
    return j;
}

// Full-precision source of truth for `report`; deterministic key order and
// shortest-round-trip numbers make byte comparison meaningful.
inline nlohmann::ordered_json results_to_json(const GridOutput& output,
                                              const ExperimentConfig& config) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["fingerprint"] = config_fingerprint(config);
    j["config"] = experiment_config_to_json(config);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : output.rows) {
        nlohmann::ordered_json r;
        r["classifier"] = row.classifier;
        r["resampler"] = row.resampler;
        r["display_name"] = display_name(row.classifier, row.resampler);
        r["repetitions_used"] = row.repetitions_used;
        r["undefined_runs"] = row.undefined_runs;
        r["metrics"] = metrics_to_json(row.metrics);
        r["metrics_std"] = metrics_to_json(row.metrics_std);
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j;
}

inline std::vector<ResultRow> result_rows_from_json(const nlohmann::json& j) {
    std::vector<ResultRow> rows;
    const std::string fingerprint = j.value("fingerprint", "");
    for (const auto& r : j.at("rows")) {
        ResultRow row;
        row.classifier = r.at("classifier");
        row.resampler = r.at("resampler");
        row.repetitions_used = r.at("repetitions_used").get<std::size_t>();
        row.undefined_runs = r.at("undefined_runs").get<std::size_t>();
        auto read_metrics = [](const nlohmann::json& m) {
            MetricsReport metrics;
            metrics.accuracy = m.at("accuracy");
            metrics.auc = m.at("auc");
            metrics.sensitivity = m.at("sensitivity");
            metrics.specificity = m.at("specificity");
            metrics.fp_rate = m.at("fp_rate");
            metrics.g_mean = m.at("g_mean");
            return metrics;
        };
        row.metrics = read_metrics(r.at("metrics"));
        row.metrics_std = read_metrics(r.at("metrics_std"));
        row.config_fingerprint = fingerprint;
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string render_report(const std::vector<ResultRow>& rows, const std::string& format,
                                 const ExperimentConfig* config = nullptr) {
    if (rows.empty()) throw EmptyResult("no result rows to render");
    if (format == "csv") return render_csv(rows);
    if (format == "text") return render_text(rows);
    if (format == "json") {
        GridOutput output;
        output.rows = rows;
        if (config) return results_to_json(output, *config).dump(2) + "\n";
        nlohmann::ordered_json j;
        j["fingerprint"] = rows.front().config_fingerprint;
        nlohmann::ordered_json out_rows = nlohmann::ordered_json::array();
        for (const auto& row : rows) {
            nlohmann::ordered_json r;
            r["classifier"] = row.classifier;
            r["resampler"] = row.resampler;
            r["display_name"] = display_name(row.classifier, row.resampler);
            r["repetitions_used"] = row.repetitions_used;
            r["undefined_runs"] = row.undefined_runs;
            r["metrics"] = metrics_to_json(row.metrics);
            r["metrics_std"] = metrics_to_json(row.metrics_std);
            out_rows.push_back(std::move(r));
        }
        j["rows"] = std::move(out_rows);
        return j.dump(2) + "\n";
    }
    throw ConfigError("unknown report format '" + format + "' (expected csv, text, json)");
}

inline std::string audit_to_jsonl(const std::vector<AuditEntry>& audit) {
    std::string out;
    for (const auto& entry : audit) {
        nlohmann::ordered_json j;
        j["repetition"] = entry.repetition;
        j["classifier"] = entry.classifier;
        j["resampler"] = entry.resampler;
        j["resample"] = entry.report.to_json();
        out += j.dump();
        out.push_back('\n');
    }
    return out;
}

} // namespace creditrisk
