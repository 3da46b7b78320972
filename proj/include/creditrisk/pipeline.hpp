#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "creditrisk/csv.hpp"
#include "creditrisk/dataset.hpp"
#include "creditrisk/errors.hpp"
#include "creditrisk/rng.hpp"

namespace creditrisk {

// ---------------------------------------------------------------------------
// Configuration

struct LeakageList {
    std::vector<std::string> columns;

    // The 13 outcome-dependent Lending Club columns dropped by default:
    // LC grade, interest rate, issue date, outstanding principal, total
    // payment, total received principal, total received interest, total late
    // fees received, recoveries, post-charge-off collection fee, last payment
    // date, last payment amount, funded amount.
    static LeakageList lending_club_defaults() {
        return LeakageList{{
            "grade",
            "int_rate",
            "issue_d",
            "out_prncp",
            "total_pymnt",
            "total_rec_prncp",
            "total_rec_int",
            "total_rec_late_fee",
            "recoveries",
            "collection_recovery_fee",
            "last_pymnt_d",
            "last_pymnt_amnt",
            "funded_amnt",
        }};
    }
};

struct PipelineConfig {
    std::string status_column = "loan_status";
    std::vector<std::string> fully_paid_statuses = {"Fully Paid"};
    std::vector<std::string> default_statuses = {"Charged Off", "Default"};
    // Loans still running: removed, not labeled.
    std::vector<std::string> in_progress_statuses = {
        "Current", "In Grace Period", "Late (16-30 days)", "Late (31-120 days)", "Issued"};

    LeakageList leakage = LeakageList::lending_club_defaults();
    double missing_column_threshold = 0.30;

    std::string annual_income_column = "annual_inc";
    std::string dti_column = "dti";
    std::string installment_column = "installment";
    std::string revolving_balance_column = "revol_bal";
    // Lending Club publishes DTI as a percent; Eq-style ratio math needs a
    // fraction, so raw DTI is divided by 100 when this is set.
    bool dti_is_percent = true;
    bool derive_ratio_features = true;

    std::vector<std::string> categorical_columns = {
        "term", "home_ownership", "verification_status", "purpose"};
    std::vector<std::string> log_transform_columns = {
        "annual_inc", "income_to_payment", "revolving_to_income"};

    bool remove_outlier_rows = true;

    double train_fraction = 0.7;
    std::uint64_t split_seed = 1;
};

inline constexpr const char* kIncomeToPaymentColumn = "income_to_payment";
inline constexpr const char* kRevolvingToIncomeColumn = "revolving_to_income";
inline constexpr const char* kNewDtiColumn = "new_dti";

// ---------------------------------------------------------------------------
// Raw-table stages

struct FilterResult {
    RawTable table; // status column removed
    std::vector<ClassLabel> labels;
    std::size_t n_removed_in_progress = 0;
    std::size_t n_removed_unrecognized = 0;
};

inline FilterResult filter_and_label(const RawTable& raw, const PipelineConfig& config) {
    const auto status_idx = raw.column_index(config.status_column);
    if (!status_idx) {
        throw UnknownColumn("status column '" + config.status_column + "' not found");
    }
    auto contains = [](const std::vector<std::string>& list, const std::string& value) {
        return std::find(list.begin(), list.end(), value) != list.end();
    };

    FilterResult result;
    for (std::size_t c = 0; c < raw.columns.size(); ++c) {
        if (c != *status_idx) result.table.columns.push_back(raw.columns[c]);
    }
    for (const auto& row : raw.rows) {
        const std::string& status = row[*status_idx];
        std::optional<ClassLabel> label;
        if (contains(config.fully_paid_statuses, status)) {
            label = ClassLabel::kFullyPaid;
        } else if (contains(config.default_statuses, status)) {
            label = ClassLabel::kDefault;
        } else if (contains(config.in_progress_statuses, status)) {
            ++result.n_removed_in_progress;
        } else {
            ++result.n_removed_unrecognized;
        }
        if (!label) continue;
        std::vector<std::string> kept;
        kept.reserve(row.size() - 1);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c != *status_idx) kept.push_back(row[c]);
        }
        result.table.rows.push_back(std::move(kept));
        result.labels.push_back(*label);
    }
    if (result.table.rows.empty()) {
        throw NoTerminalLoans("no rows with a terminal loan status remain");
    }
    return result;
}

inline RawTable drop_leakage(const RawTable& raw, const LeakageList& leaks,
                             std::vector<std::string>* log = nullptr) {
    std::set<std::size_t> drop;
    for (const auto& name : leaks.columns) {
        const auto idx = raw.column_index(name);
        if (idx) {
            drop.insert(*idx);
        } else if (log) {
            log->push_back("leakage column '" + name + "' not present; ignored");
        }
    }
    RawTable out;
    for (std::size_t c = 0; c < raw.columns.size(); ++c) {
        if (!drop.count(c)) out.columns.push_back(raw.columns[c]);
    }
    out.rows.reserve(raw.rows.size());
    for (const auto& row : raw.rows) {
        std::vector<std::string> kept;
        kept.reserve(out.columns.size());
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (!drop.count(c)) kept.push_back(row[c]);
        }
        out.rows.push_back(std::move(kept));
    }
    return out;
}

struct DropMissingResult {
    RawTable table;
    std::vector<std::size_t> kept_rows; // indices into the input table
    std::vector<std::string> dropped_columns;
};

// Columns whose missing fraction exceeds the threshold go first; dropping
// rows first on a wide sparse table would annihilate the data.
inline DropMissingResult drop_missing(const RawTable& raw, double column_threshold = 0.30) {
    DropMissingResult result;
    const std::size_t n_rows = raw.n_rows();
    std::vector<std::size_t> keep_cols;
    for (std::size_t c = 0; c < raw.columns.size(); ++c) {
        std::size_t missing = 0;
        for (const auto& row : raw.rows) {
            if (is_missing_cell(row[c])) ++missing;
        }
        const double fraction =
            n_rows == 0 ? 0.0 : static_cast<double>(missing) / static_cast<double>(n_rows);
        if (fraction > column_threshold) {
            result.dropped_columns.push_back(raw.columns[c]);
        } else {
            keep_cols.push_back(c);
        }
    }
    for (std::size_t c : keep_cols) result.table.columns.push_back(raw.columns[c]);
    for (std::size_t r = 0; r < n_rows; ++r) {
        bool complete = true;
        for (std::size_t c : keep_cols) {
            if (is_missing_cell(raw.rows[r][c])) {
                complete = false;
                break;
            }
        }
        if (!complete) continue;
        std::vector<std::string> kept;
        kept.reserve(keep_cols.size());
        for (std::size_t c : keep_cols) kept.push_back(raw.rows[r][c]);
        result.table.rows.push_back(std::move(kept));
        result.kept_rows.push_back(r);
    }
    if (result.table.rows.empty() || result.table.columns.empty()) {
        throw EmptyResult("no data survives missing-value removal");
    }
    return result;
}

// ---------------------------------------------------------------------------
// Numeric transforms

inline std::pair<double, double> iqr_bounds(const ColumnStats& stats) {
    const double spread = 1.5 * (stats.q3 - stats.q1);
    return {stats.q1 - spread, stats.q3 + spread};
}

// Keep indices of rows where every listed column lies inside its closed IQR
// acceptance range. Bounds come from the data as given: one pass, no
// iteration.
inline std::vector<std::size_t> outlier_filter_indices(const Dataset& dataset,
                                                       std::span<const std::size_t> columns) {
    std::vector<std::pair<double, double>> bounds;
    bounds.reserve(columns.size());
    for (std::size_t c : columns) {
        if (c >= dataset.n_features()) {
            throw UnknownColumn("outlier column index " + std::to_string(c) + " out of range");
        }
        bounds.push_back(iqr_bounds(compute_stats(dataset.column(c))));
    }
    std::vector<std::size_t> keep;
    keep.reserve(dataset.n_rows());
    for (std::size_t r = 0; r < dataset.n_rows(); ++r) {
        bool inside = true;
        for (std::size_t j = 0; j < columns.size(); ++j) {
            const double v = dataset.value(r, columns[j]);
            if (v < bounds[j].first || v > bounds[j].second) {
                inside = false;
                break;
            }
        }
        if (inside) keep.push_back(r);
    }
    if (keep.empty()) throw EmptyResult("outlier removal would discard every row");
    return keep;
}

inline Dataset remove_outliers(const Dataset& dataset,
                               const std::vector<std::string>& columns) {
    std::vector<std::size_t> column_indices;
    column_indices.reserve(columns.size());
    for (const auto& name : columns) {
        const auto idx = dataset.schema().find(name);
        if (!idx) throw UnknownColumn("no column named '" + name + "'");
        column_indices.push_back(*idx);
    }
    return select_rows(dataset, outlier_filter_indices(dataset, column_indices));
}

struct MinMaxParams {
    double x_min = 0.0;
    double x_max = 1.0;
};

inline MinMaxParams minmax_fit(std::span<const double> train_values) {
    if (train_values.empty()) throw EmptyResult("minmax_fit on an empty column");
    const auto [lo, hi] = std::minmax_element(train_values.begin(), train_values.end());
    if (*lo == *hi) {
        throw ConstantColumn("column is constant (" + format_double(*lo) +
                             "); min-max scale undefined");
    }
    return {*lo, *hi};
}

// Test-time values may land outside [0, 1]; they are not clipped, because
// the parameters come from training data only.
inline double minmax_apply(const MinMaxParams& params, double value) {
    return (value - params.x_min) / (params.x_max - params.x_min);
}

inline std::vector<double> minmax_fit_transform(std::span<const double> train_values,
                                                MinMaxParams* params_out = nullptr) {
    const MinMaxParams params = minmax_fit(train_values);
    if (params_out) *params_out = params;
    std::vector<double> out(train_values.size());
    for (std::size_t i = 0; i < train_values.size(); ++i) {
        out[i] = minmax_apply(params, train_values[i]);
    }
    return out;
}

struct LogTransformResult {
    Dataset dataset;
    std::size_t n_rows_dropped = 0;
};

// Natural log on the listed columns. Rows holding non-positive values in any
// of them are dropped (with a count), consistent with the cleaning stage.
inline LogTransformResult log_transform(const Dataset& dataset,
                                        const std::vector<std::string>& columns) {
    std::vector<std::size_t> column_indices;
    for (const auto& name : columns) {
        const auto idx = dataset.schema().find(name);
        if (!idx) throw UnknownColumn("no column named '" + name + "'");
        column_indices.push_back(*idx);
    }
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < dataset.n_rows(); ++r) {
        bool positive = true;
        for (std::size_t c : column_indices) {
            if (dataset.value(r, c) <= 0.0) {
                positive = false;
                break;
            }
        }
        if (positive) keep.push_back(r);
    }
    if (keep.empty()) {
        throw NonPositiveValue("log transform would drop every row");
    }
    const Dataset filtered = select_rows(dataset, keep);
    std::vector<double> values(filtered.values());
    const std::size_t d = filtered.n_features();
    for (std::size_t r = 0; r < filtered.n_rows(); ++r) {
        for (std::size_t c : column_indices) {
            values[r * d + c] = std::log(values[r * d + c]);
        }
    }
    LogTransformResult result{Dataset(filtered.schema(), std::move(values),
                                      std::vector<ClassLabel>(filtered.labels())),
                              dataset.n_rows() - keep.size()};
    return result;
}

// ---------------------------------------------------------------------------
// One-hot encoding

struct OneHotEncoding {
    std::string column;
    std::vector<std::string> categories; // sorted, learned at fit time

    std::string indicator_name(std::size_t i) const { return column + "_" + categories[i]; }

    // Index of the hot indicator, or nullopt for an unseen category
    // (encoded as an all-zeros indicator row).
    std::optional<std::size_t> category_index(std::string_view cell) const {
        const auto it = std::lower_bound(categories.begin(), categories.end(), cell);
        if (it != categories.end() && *it == cell) {
            return static_cast<std::size_t>(it - categories.begin());
        }
        return std::nullopt;
    }
};

inline OneHotEncoding one_hot_fit(std::span<const std::string> cells,
                                  const std::string& column_name) {
    std::set<std::string> distinct(cells.begin(), cells.end());
    OneHotEncoding encoding;
    encoding.column = column_name;
    encoding.categories.assign(distinct.begin(), distinct.end());
    return encoding;
}

// ---------------------------------------------------------------------------
// Derived ratio features

struct DerivedFeatureInputs {
    double dti = 0.0; // raw Lending Club DTI (percent unless configured otherwise)
    double annual_income = 0.0;
    double installment = 0.0;
    double revolving_balance = 0.0;
};

struct DerivedRatios {
    double income_to_payment = 0.0;
    double revolving_to_income = 0.0;
    double new_dti = 0.0;
};

inline DerivedRatios derive_ratios(const DerivedFeatureInputs& inputs,
                                   bool dti_is_percent = true) {
    if (inputs.annual_income <= 0.0) {
        throw NonPositiveIncome("annual income must be positive, got " +
                                format_double(inputs.annual_income));
    }
    if (inputs.installment <= 0.0) {
        throw NonPositiveInstallment("installment must be positive, got " +
                                     format_double(inputs.installment));
    }
    const double monthly_income = inputs.annual_income / 12.0;
    const double dti_fraction = dti_is_percent ? inputs.dti / 100.0 : inputs.dti;
    const double new_monthly_repayment = dti_fraction * monthly_income + inputs.installment;
    DerivedRatios ratios;
    ratios.income_to_payment = monthly_income / inputs.installment;
    ratios.revolving_to_income = inputs.revolving_balance / monthly_income;
    ratios.new_dti = new_monthly_repayment / monthly_income;
    return ratios;
}

// ---------------------------------------------------------------------------
// Correlation ranking

struct CorrelationRow {
    std::string attribute;
    double correlation = 0.0;
};

// Pearson correlation of each column against the 0/1 label (point-biserial),
// ranked by |correlation| descending. Constant columns report 0.
inline std::vector<CorrelationRow> correlation_with_target(const Dataset& dataset) {
    const std::size_t n = dataset.n_rows();
    std::vector<CorrelationRow> rows;
    if (n == 0) return rows;
    double label_mean = 0.0;
    for (ClassLabel label : dataset.labels()) label_mean += to_int(label);
    label_mean /= static_cast<double>(n);
    double label_ss = 0.0;
    for (ClassLabel label : dataset.labels()) {
        const double d = to_int(label) - label_mean;
        label_ss += d * d;
    }
    for (std::size_t c = 0; c < dataset.n_features(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += dataset.value(r, c);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        double cross = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double dx = dataset.value(r, c) - mean;
            ss += dx * dx;
            cross += dx * (to_int(dataset.labels()[r]) - label_mean);
        }
        double corr = 0.0;
        const double denom = std::sqrt(ss * label_ss);
        if (denom > 0.0) corr = cross / denom;
        rows.push_back({dataset.schema().at(c).name, corr});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const CorrelationRow& a, const CorrelationRow& b) {
        return std::abs(a.correlation) > std::abs(b.correlation);
    });
    return rows;
}

// ---------------------------------------------------------------------------
// Train/test split

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Stratified: each class is partitioned independently at train_fraction so
// the test set keeps the full data's imbalance. Per-class train counts are
// rounded then clamped to [1, n_c - 1], so both sides always hold both
// classes.
inline SplitIndices stratified_split_indices(std::span<const ClassLabel> labels,
                                             double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train_fraction must lie strictly between 0 and 1");
    }
    std::vector<std::size_t> class0;
    std::vector<std::size_t> class1;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] == ClassLabel::kFullyPaid ? class1 : class0).push_back(i);
    }
    if (class0.size() < 2 || class1.size() < 2) {
        throw TooFewSamples("stratified split needs at least 2 samples per class");
    }

    Rng rng(derive_seed(seed, {0x517A7ULL}));
    SplitIndices split;
    for (auto* group : {&class1, &class0}) {
        rng.shuffle(*group);
        const auto n_c = group->size();
        auto n_train = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(n_c)));
        n_train = std::clamp<std::size_t>(n_train, 1, n_c - 1);
        split.train.insert(split.train.end(), group->begin(), group->begin() + n_train);
        split.test.insert(split.test.end(), group->begin() + n_train, group->end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

inline std::pair<Dataset, Dataset> train_test_split(const Dataset& dataset,
                                                    double train_fraction,
                                                    std::uint64_t seed) {
    const SplitIndices split =
        stratified_split_indices(dataset.labels(), train_fraction, seed);
    return {select_rows(dataset, split.train), select_rows(dataset, split.test)};
}

} // namespace creditrisk
