#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "creditrisk/csv.hpp"
#include "creditrisk/dataset.hpp"
#include "creditrisk/errors.hpp"
#include "creditrisk/pipeline.hpp"

namespace creditrisk {

using ordered_json = nlohmann::ordered_json;

struct PrepareSummary {
    std::size_t rows_raw = 0;
    std::size_t rows_labeled = 0;
    std::size_t rows_final = 0;
    std::size_t n_removed_in_progress = 0;
    std::size_t n_removed_unrecognized = 0;
    std::size_t n_default = 0;
    std::size_t n_fully_paid = 0;
    double default_percent = 0.0;
    double fully_paid_percent = 0.0;
    double imbalance_ratio = 0.0;
    std::size_t n_features_final = 0;
    std::map<std::string, MinMaxParams> normalization;
    std::vector<std::string> messages;

    ordered_json to_json() const {
        ordered_json j;
        j["rows_raw"] = rows_raw;
        j["rows_labeled"] = rows_labeled;
        j["rows_final"] = rows_final;
        j["removed_in_progress"] = n_removed_in_progress;
        j["removed_unrecognized"] = n_removed_unrecognized;
        j["n_default"] = n_default;
        j["n_fully_paid"] = n_fully_paid;
        j["default_percent"] = default_percent;
        j["fully_paid_percent"] = fully_paid_percent;
        j["imbalance_ratio"] = imbalance_ratio;
        j["n_features_final"] = n_features_final;
        ordered_json norm = ordered_json::object();
        for (const auto& [name, params] : normalization) {
            norm[name] = {{"x_min", params.x_min}, {"x_max", params.x_max}};
        }
        j["normalization"] = norm;
        j["messages"] = messages;
        return j;
    }
};

struct PrepareResult {
    Dataset dataset;
    std::vector<CorrelationRow> correlations;
    PrepareSummary summary;
};

namespace detail {

// Working representation between the raw-table stages and the final Dataset:
// numeric columns, still-categorical text columns, labels, all row-aligned.
struct PipelineFrame {
    std::vector<std::string> num_names;
    std::vector<std::vector<double>> num_cols;
    std::vector<std::string> cat_names;
    std::vector<std::vector<std::string>> cat_cols;
    std::vector<ClassLabel> labels;

    std::size_t n_rows() const { return labels.size(); }

    std::optional<std::size_t> find_numeric(const std::string& name) const {
        for (std::size_t i = 0; i < num_names.size(); ++i) {
            if (num_names[i] == name) return i;
        }
        return std::nullopt;
    }

    void keep_rows(const std::vector<std::size_t>& keep) {
        auto filter_double = [&keep](std::vector<double>& col) {
            std::vector<double> next;
            next.reserve(keep.size());
            for (std::size_t r : keep) next.push_back(col[r]);
            col = std::move(next);
        };
        auto filter_text = [&keep](std::vector<std::string>& col) {
            std::vector<std::string> next;
            next.reserve(keep.size());
            for (std::size_t r : keep) next.push_back(col[r]);
            col = std::move(next);
        };
        for (auto& col : num_cols) filter_double(col);
        for (auto& col : cat_cols) filter_text(col);
        std::vector<ClassLabel> next_labels;
        next_labels.reserve(keep.size());
        for (std::size_t r : keep) next_labels.push_back(labels[r]);
        labels = std::move(next_labels);
    }
};

} // namespace detail

// The full feature-engineering pipeline in its fixed order:
// filter/label -> drop leakage -> drop missing -> derive ratios ->
// remove outliers -> log transform -> one-hot -> split -> min-max fit on the
// train part, applied everywhere. The log transform must precede
// normalization: min-max outputs contain zeros, which the log cannot accept.
inline PrepareResult run_prepare(const RawTable& raw, const PipelineConfig& config) {
    PrepareResult result;
    auto& summary = result.summary;
    auto& log = summary.messages;
    summary.rows_raw = raw.n_rows();

    // Status filtering and labeling.
    FilterResult filtered = filter_and_label(raw, config);
    summary.rows_labeled = filtered.table.n_rows();
    summary.n_removed_in_progress = filtered.n_removed_in_progress;
    summary.n_removed_unrecognized = filtered.n_removed_unrecognized;
    if (filtered.n_removed_unrecognized > 0) {
        log.push_back("removed " + std::to_string(filtered.n_removed_unrecognized) +
                      " rows with unrecognized loan status");
    }

    // Leakage columns.
    const RawTable no_leaks = drop_leakage(filtered.table, config.leakage, &log);

    // Missing values: sparse columns first, then incomplete rows.
    DropMissingResult dense = drop_missing(no_leaks, config.missing_column_threshold);
    for (const auto& name : dense.dropped_columns) {
        log.push_back("dropped column '" + name + "': missing fraction exceeds " +
                      format_double(config.missing_column_threshold));
    }
    if (dense.kept_rows.size() < no_leaks.n_rows()) {
        log.push_back("dropped " + std::to_string(no_leaks.n_rows() - dense.kept_rows.size()) +
                      " rows with missing cells");
    }

    detail::PipelineFrame frame;
    frame.labels.reserve(dense.kept_rows.size());
    for (std::size_t r : dense.kept_rows) frame.labels.push_back(filtered.labels[r]);

    // Column typing: configured categoricals stay text; everything else must
    // parse as numeric or is dropped.
    auto is_categorical = [&config](const std::string& name) {
        return std::find(config.categorical_columns.begin(), config.categorical_columns.end(),
                         name) != config.categorical_columns.end();
    };
    for (std::size_t c = 0; c < dense.table.columns.size(); ++c) {
        const std::string& name = dense.table.columns[c];
        if (is_categorical(name)) {
            std::vector<std::string> cells;
            cells.reserve(dense.table.n_rows());
            for (const auto& row : dense.table.rows) cells.push_back(row[c]);
            frame.cat_names.push_back(name);
            frame.cat_cols.push_back(std::move(cells));
            continue;
        }
        std::vector<double> values;
        values.reserve(dense.table.n_rows());
        bool numeric = true;
        for (const auto& row : dense.table.rows) {
            const auto parsed = parse_double(row[c]);
            if (!parsed || !std::isfinite(*parsed)) {
                numeric = false;
                break;
            }
            values.push_back(*parsed);
        }
        if (numeric) {
            frame.num_names.push_back(name);
            frame.num_cols.push_back(std::move(values));
        } else {
            log.push_back("dropped column '" + name + "': non-numeric values");
        }
    }
    if (frame.num_cols.empty() && frame.cat_cols.empty()) {
        throw EmptyResult("no usable feature columns remain");
    }

    // Derived ratio features.
    if (config.derive_ratio_features) {
        const auto income_idx = frame.find_numeric(config.annual_income_column);
        const auto dti_idx = frame.find_numeric(config.dti_column);
        const auto installment_idx = frame.find_numeric(config.installment_column);
        const auto revol_idx = frame.find_numeric(config.revolving_balance_column);
        if (income_idx && dti_idx && installment_idx && revol_idx) {
            std::vector<std::size_t> keep;
            for (std::size_t r = 0; r < frame.n_rows(); ++r) {
                if (frame.num_cols[*income_idx][r] > 0.0 &&
                    frame.num_cols[*installment_idx][r] > 0.0) {
                    keep.push_back(r);
                }
            }
            if (keep.empty()) throw EmptyResult("no rows with positive income and installment");
            if (keep.size() < frame.n_rows()) {
                log.push_back("dropped " + std::to_string(frame.n_rows() - keep.size()) +
                              " rows with non-positive income or installment");
            }
            frame.keep_rows(keep);
            std::vector<double> income_to_payment(frame.n_rows());
            std::vector<double> revolving_to_income(frame.n_rows());
            std::vector<double> new_dti(frame.n_rows());
            for (std::size_t r = 0; r < frame.n_rows(); ++r) {
                DerivedFeatureInputs inputs;
                inputs.annual_income = frame.num_cols[*income_idx][r];
                inputs.dti = frame.num_cols[*dti_idx][r];
                inputs.installment = frame.num_cols[*installment_idx][r];
                inputs.revolving_balance = frame.num_cols[*revol_idx][r];
                const DerivedRatios ratios = derive_ratios(inputs, config.dti_is_percent);
                income_to_payment[r] = ratios.income_to_payment;
                revolving_to_income[r] = ratios.revolving_to_income;
                new_dti[r] = ratios.new_dti;
            }
            frame.num_names.push_back(kIncomeToPaymentColumn);
            frame.num_cols.push_back(std::move(income_to_payment));
            frame.num_names.push_back(kRevolvingToIncomeColumn);
            frame.num_cols.push_back(std::move(revolving_to_income));
            frame.num_names.push_back(kNewDtiColumn);
            frame.num_cols.push_back(std::move(new_dti));
        } else {
            log.push_back("ratio features skipped: source columns not all present");
        }
    }

    // Outlier removal over the numeric columns, single pass.
    if (config.remove_outlier_rows && !frame.num_cols.empty()) {
        std::vector<std::pair<double, double>> bounds;
        bounds.reserve(frame.num_cols.size());
        for (const auto& col : frame.num_cols) {
            bounds.push_back(iqr_bounds(compute_stats(col)));
        }
        std::vector<std::size_t> keep;
        for (std::size_t r = 0; r < frame.n_rows(); ++r) {
            bool inside = true;
            for (std::size_t c = 0; c < frame.num_cols.size(); ++c) {
                const double v = frame.num_cols[c][r];
                if (v < bounds[c].first || v > bounds[c].second) {
                    inside = false;
                    break;
                }
            }
            if (inside) keep.push_back(r);
        }
        if (keep.empty()) throw EmptyResult("outlier removal would discard every row");
        if (keep.size() < frame.n_rows()) {
            log.push_back("dropped " + std::to_string(frame.n_rows() - keep.size()) +
                          " outlier rows (IQR acceptance range)");
        }
        frame.keep_rows(keep);
    }

    // Log transform.
    {
        std::vector<std::size_t> log_cols;
        for (const auto& name : config.log_transform_columns) {
            const auto idx = frame.find_numeric(name);
            if (idx) log_cols.push_back(*idx);
            else log.push_back("log-transform column '" + name + "' not present; skipped");
        }
        if (!log_cols.empty()) {
            std::vector<std::size_t> keep;
            for (std::size_t r = 0; r < frame.n_rows(); ++r) {
                bool positive = true;
                for (std::size_t c : log_cols) {
                    if (frame.num_cols[c][r] <= 0.0) {
                        positive = false;
                        break;
                    }
                }
                if (positive) keep.push_back(r);
            }
            if (keep.empty()) throw NonPositiveValue("log transform would drop every row");
            if (keep.size() < frame.n_rows()) {
                log.push_back("dropped " + std::to_string(frame.n_rows() - keep.size()) +
                              " rows with non-positive values in log-transform columns");
            }
            frame.keep_rows(keep);
            for (std::size_t c : log_cols) {
                for (double& v : frame.num_cols[c]) v = std::log(v);
            }
        }
    }

    // One-hot expansion of the categorical columns.
    std::vector<std::string> indicator_names;
    std::vector<std::vector<double>> indicator_cols;
    for (std::size_t c = 0; c < frame.cat_cols.size(); ++c) {
        const OneHotEncoding encoding = one_hot_fit(frame.cat_cols[c], frame.cat_names[c]);
        log.push_back("one-hot '" + frame.cat_names[c] + "': " +
                      std::to_string(encoding.categories.size()) + " categories");
        for (std::size_t k = 0; k < encoding.categories.size(); ++k) {
            std::vector<double> indicator(frame.n_rows(), 0.0);
            for (std::size_t r = 0; r < frame.n_rows(); ++r) {
                const auto hot = encoding.category_index(frame.cat_cols[c][r]);
                if (hot && *hot == k) indicator[r] = 1.0;
            }
            indicator_names.push_back(encoding.indicator_name(k));
            indicator_cols.push_back(std::move(indicator));
        }
    }

    // Assemble the pre-normalization dataset.
    std::vector<ColumnInfo> schema_columns;
    std::vector<const std::vector<double>*> all_cols;
    for (std::size_t c = 0; c < frame.num_cols.size(); ++c) {
        schema_columns.push_back({frame.num_names[c], ColumnKind::kNumeric});
        all_cols.push_back(&frame.num_cols[c]);
    }
    for (std::size_t c = 0; c < indicator_cols.size(); ++c) {
        schema_columns.push_back({indicator_names[c], ColumnKind::kBinaryIndicator});
        all_cols.push_back(&indicator_cols[c]);
    }
    if (all_cols.empty()) throw EmptyResult("no feature columns remain after engineering");

    // Split for leak-free normalization fitting. If the labels are too
    // degenerate to split, fall back to fitting on all rows.
    std::vector<std::size_t> fit_rows(frame.n_rows());
    for (std::size_t r = 0; r < frame.n_rows(); ++r) fit_rows[r] = r;
    try {
        const SplitIndices split =
            stratified_split_indices(frame.labels, config.train_fraction, config.split_seed);
        fit_rows = split.train;
    } catch (const Error& e) {
        log.push_back(std::string("normalization fit uses all rows (") + e.what() + ")");
    }

    // Min-max per column, fit on the train part only; constant train columns
    // are dropped.
    std::vector<std::size_t> kept_cols;
    std::vector<std::vector<double>> final_cols;
    for (std::size_t c = 0; c < all_cols.size(); ++c) {
        std::vector<double> train_values;
        train_values.reserve(fit_rows.size());
        for (std::size_t r : fit_rows) train_values.push_back((*all_cols[c])[r]);
        MinMaxParams params;
        try {
            params = minmax_fit(train_values);
        } catch (const ConstantColumn&) {
            log.push_back("dropped column '" + schema_columns[c].name +
                          "': constant on the training part");
            continue;
        }
        std::vector<double> transformed(frame.n_rows());
        for (std::size_t r = 0; r < frame.n_rows(); ++r) {
            transformed[r] = minmax_apply(params, (*all_cols[c])[r]);
        }
        summary.normalization[schema_columns[c].name] = params;
        kept_cols.push_back(c);
        final_cols.push_back(std::move(transformed));
    }
    if (final_cols.empty()) throw EmptyResult("every feature column was constant");

    std::vector<ColumnInfo> final_schema;
    final_schema.reserve(kept_cols.size());
    for (std::size_t c : kept_cols) final_schema.push_back(schema_columns[c]);
    std::vector<double> values;
    values.reserve(frame.n_rows() * final_cols.size());
    for (std::size_t r = 0; r < frame.n_rows(); ++r) {
        for (const auto& col : final_cols) values.push_back(col[r]);
    }
    result.dataset = Dataset(FeatureSchema(std::move(final_schema), "label"),
                             std::move(values), std::vector<ClassLabel>(frame.labels));
    result.correlations = correlation_with_target(result.dataset);

    summary.rows_final = result.dataset.n_rows();
    summary.n_features_final = result.dataset.n_features();
    for (ClassLabel label : result.dataset.labels()) {
        if (label == ClassLabel::kFullyPaid) ++summary.n_fully_paid;
        else ++summary.n_default;
    }
    const double total = static_cast<double>(summary.n_default + summary.n_fully_paid);
    if (total > 0) {
        summary.default_percent = 100.0 * static_cast<double>(summary.n_default) / total;
        summary.fully_paid_percent = 100.0 * static_cast<double>(summary.n_fully_paid) / total;
    }
    if (summary.n_default > 0 && summary.n_fully_paid > 0) {
        const auto counts = class_counts(result.dataset);
        summary.imbalance_ratio = counts.imbalance_ratio;
    } else {
        log.push_back("only one class present in the final dataset");
    }
    return result;
}

// ---------------------------------------------------------------------------
// Prepared-dataset CSV round trip (features + final `label` column)

inline RawTable dataset_to_table(const Dataset& dataset) {
    RawTable table;
    for (const auto& column : dataset.schema().columns()) table.columns.push_back(column.name);
    table.columns.push_back(dataset.schema().target_name());
    table.rows.reserve(dataset.n_rows());
    for (std::size_t r = 0; r < dataset.n_rows(); ++r) {
        std::vector<std::string> row;
        row.reserve(dataset.n_features() + 1);
        for (std::size_t c = 0; c < dataset.n_features(); ++c) {
            row.push_back(format_double(dataset.value(r, c)));
        }
        row.push_back(std::to_string(to_int(dataset.labels()[r])));
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline Dataset dataset_from_table(const RawTable& table,
                                  const std::string& label_column = "label") {
    const auto label_idx = table.column_index(label_column);
    if (!label_idx) {
        throw UnknownColumn("prepared data needs a '" + label_column + "' column");
    }
    std::vector<ClassLabel> labels;
    labels.reserve(table.n_rows());
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        const auto parsed = parse_double(table.rows[r][*label_idx]);
        if (!parsed || (*parsed != 0.0 && *parsed != 1.0)) {
            throw ParseError("row " + std::to_string(r + 2) + ": label must be 0 or 1");
        }
        labels.push_back(label_from_int(static_cast<int>(*parsed)));
    }
    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c != *label_idx) feature_cols.push_back(c);
    }
    std::vector<double> values;
    values.reserve(table.n_rows() * feature_cols.size());
    std::vector<bool> is_indicator(feature_cols.size(), true);
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        for (std::size_t j = 0; j < feature_cols.size(); ++j) {
            const auto parsed = parse_double(table.rows[r][feature_cols[j]]);
            if (!parsed || !std::isfinite(*parsed)) {
                throw ParseError("row " + std::to_string(r + 2) + ", column '" +
                                 table.columns[feature_cols[j]] + "': not a finite number");
            }
            values.push_back(*parsed);
            if (*parsed != 0.0 && *parsed != 1.0) is_indicator[j] = false;
        }
    }
    std::vector<ColumnInfo> columns;
    columns.reserve(feature_cols.size());
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
        columns.push_back({table.columns[feature_cols[j]],
                           is_indicator[j] ? ColumnKind::kBinaryIndicator : ColumnKind::kNumeric});
    }
    return Dataset(FeatureSchema(std::move(columns), label_column), std::move(values),
                   std::move(labels));
}

inline RawTable correlations_to_table(const std::vector<CorrelationRow>& rows) {
    RawTable table;
    table.columns = {"attribute", "correlation"};
    for (const auto& row : rows) {
        table.rows.push_back({row.attribute, format_double(row.correlation)});
    }
    return table;
}

// ---------------------------------------------------------------------------
// PipelineConfig JSON

inline void pipeline_config_check_keys(const nlohmann::json& j) {
    static const std::vector<std::string> known = {
        "status_column", "fully_paid_statuses", "default_statuses", "in_progress_statuses",
        "leakage_columns", "extra_leakage", "missing_column_threshold", "annual_income_column",
        "dti_column", "installment_column", "revolving_balance_column", "dti_is_percent",
        "derive_ratio_features", "categorical_columns", "log_transform_columns",
        "remove_outlier_rows", "train_fraction", "split_seed"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
            throw ConfigError("unknown pipeline config key '" + it.key() + "'");
        }
    }
}

inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
    pipeline_config_check_keys(j);
    PipelineConfig config;
    auto get_strings = [&j](const char* key, std::vector<std::string>& dest) {
        if (j.contains(key)) dest = j.at(key).get<std::vector<std::string>>();
    };
    if (j.contains("status_column")) config.status_column = j.at("status_column");
    get_strings("fully_paid_statuses", config.fully_paid_statuses);
    get_strings("default_statuses", config.default_statuses);
    get_strings("in_progress_statuses", config.in_progress_statuses);
    get_strings("leakage_columns", config.leakage.columns);
    if (j.contains("extra_leakage")) {
        for (const auto& name : j.at("extra_leakage")) {
            config.leakage.columns.push_back(name.get<std::string>());
        }
    }
    if (j.contains("missing_column_threshold")) {
        config.missing_column_threshold = j.at("missing_column_threshold");
    }
    if (j.contains("annual_income_column")) config.annual_income_column = j.at("annual_income_column");
    if (j.contains("dti_column")) config.dti_column = j.at("dti_column");
    if (j.contains("installment_column")) config.installment_column = j.at("installment_column");
    if (j.contains("revolving_balance_column")) {
        config.revolving_balance_column = j.at("revolving_balance_column");
    }
    if (j.contains("dti_is_percent")) config.dti_is_percent = j.at("dti_is_percent");
    if (j.contains("derive_ratio_features")) config.derive_ratio_features = j.at("derive_ratio_features");
    get_strings("categorical_columns", config.categorical_columns);
    get_strings("log_transform_columns", config.log_transform_columns);
    if (j.contains("remove_outlier_rows")) config.remove_outlier_rows = j.at("remove_outlier_rows");
    if (j.contains("train_fraction")) config.train_fraction = j.at("train_fraction");
    if (j.contains("split_seed")) config.split_seed = j.at("split_seed").get<std::uint64_t>();
    return config;
}

inline ordered_json pipeline_config_to_json(const PipelineConfig& config) {
    ordered_json j;
    j["status_column"] = config.status_column;
    j["fully_paid_statuses"] = config.fully_paid_statuses;
    j["default_statuses"] = config.default_statuses;
    j["in_progress_statuses"] = config.in_progress_statuses;
    j["leakage_columns"] = config.leakage.columns;
    j["missing_column_threshold"] = config.missing_column_threshold;
    j["annual_income_column"] = config.annual_income_column;
    j["dti_column"] = config.dti_column;
    j["installment_column"] = config.installment_column;
    j["revolving_balance_column"] = config.revolving_balance_column;
    j["dti_is_percent"] = config.dti_is_percent;
    j["derive_ratio_features"] = config.derive_ratio_features;
    j["categorical_columns"] = config.categorical_columns;
    j["log_transform_columns"] = config.log_transform_columns;
    j["remove_outlier_rows"] = config.remove_outlier_rows;
    j["train_fraction"] = config.train_fraction;
    j["split_seed"] = config.split_seed;
    return j;
}

} // namespace creditrisk
