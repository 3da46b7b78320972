#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "creditrisk/errors.hpp"

namespace creditrisk {

// Binary loan outcome. Class 1 (fully paid) is the positive class for every
// metric definition; class 0 (default) is the minority class in the data
// this pipeline targets.
enum class ClassLabel : std::uint8_t {
    kDefault = 0,
    kFullyPaid = 1,
};

inline int to_int(ClassLabel label) { return static_cast<int>(label); }

inline ClassLabel label_from_int(int value) {
    if (value == 0) return ClassLabel::kDefault;
    if (value == 1) return ClassLabel::kFullyPaid;
    throw ParseError("class label must be 0 or 1, got " + std::to_string(value));
}

enum class ColumnKind {
    kNumeric,
    kBinaryIndicator,
};

struct ColumnInfo {
    std::string name;
    ColumnKind kind = ColumnKind::kNumeric;
};

class FeatureSchema {
public:
    FeatureSchema() = default;

    FeatureSchema(std::vector<ColumnInfo> columns, std::string target_name)
        : columns_(std::move(columns)), target_name_(std::move(target_name)) {
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            for (std::size_t j = i + 1; j < columns_.size(); ++j) {
                if (columns_[i].name == columns_[j].name) {
                    throw ParseError("duplicate column name '" + columns_[i].name + "'");
                }
            }
        }
    }

    std::size_t size() const { return columns_.size(); }
    const std::vector<ColumnInfo>& columns() const { return columns_; }
    const ColumnInfo& at(std::size_t i) const { return columns_[i]; }
    const std::string& target_name() const { return target_name_; }

    std::optional<std::size_t> find(std::string_view name) const {
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (columns_[i].name == name) return i;
        }
        return std::nullopt;
    }

private:
    std::vector<ColumnInfo> columns_;
    std::string target_name_ = "label";
};

// Immutable numeric feature matrix plus labels. Labels are stored apart from
// the features so no downstream consumer can ever treat the target as an
// input column. Row identity is preserved: row i of select_rows output is a
// bitwise copy of the requested source row.
class Dataset {
public:
    Dataset() = default;

    Dataset(FeatureSchema schema, std::vector<double> values, std::vector<ClassLabel> labels)
        : schema_(std::move(schema)),
          values_(std::move(values)),
          labels_(std::move(labels)) {
        n_features_ = schema_.size();
        if (n_features_ == 0) {
            n_rows_ = labels_.size();
            if (!values_.empty()) throw ParseError("values present but schema has no columns");
        } else {
            if (values_.size() % n_features_ != 0) {
                throw ParseError("value count is not a multiple of the feature count");
            }
            n_rows_ = values_.size() / n_features_;
        }
        if (n_rows_ != labels_.size()) {
            throw LengthMismatch("dataset has " + std::to_string(n_rows_) + " rows but " +
                                 std::to_string(labels_.size()) + " labels");
        }
        for (double v : values_) {
            if (!std::isfinite(v)) throw ParseError("non-finite feature value in dataset");
        }
    }

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_features() const { return n_features_; }
    const FeatureSchema& schema() const { return schema_; }
    const std::vector<ClassLabel>& labels() const { return labels_; }
    const std::vector<double>& values() const { return values_; }

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * n_features_, n_features_};
    }

    double value(std::size_t row, std::size_t col) const {
        return values_[row * n_features_ + col];
    }

    std::vector<double> column(std::size_t col) const {
        std::vector<double> out(n_rows_);
        for (std::size_t i = 0; i < n_rows_; ++i) out[i] = value(i, col);
        return out;
    }

private:
    FeatureSchema schema_;
    std::vector<double> values_;
    std::vector<ClassLabel> labels_;
    std::size_t n_rows_ = 0;
    std::size_t n_features_ = 0;
};

struct ClassCounts {
    std::size_t n_majority = 0;
    std::size_t n_minority = 0;
    double imbalance_ratio = 0.0;
    ClassLabel majority_label = ClassLabel::kFullyPaid;
    ClassLabel minority_label = ClassLabel::kDefault;
};

inline ClassCounts class_counts(std::span<const ClassLabel> labels) {
    std::size_t n1 = 0;
    for (ClassLabel label : labels) {
        if (label == ClassLabel::kFullyPaid) ++n1;
    }
    const std::size_t n0 = labels.size() - n1;
    if (n0 == 0 || n1 == 0) {
        throw EmptyClass("both classes must be present (counts: default=" +
                         std::to_string(n0) + ", fully_paid=" + std::to_string(n1) + ")");
    }
    ClassCounts counts;
    // Ties assign class 1 (fully paid) as majority, matching the domain.
    if (n1 >= n0) {
        counts.n_majority = n1;
        counts.n_minority = n0;
        counts.majority_label = ClassLabel::kFullyPaid;
        counts.minority_label = ClassLabel::kDefault;
    } else {
        counts.n_majority = n0;
        counts.n_minority = n1;
        counts.majority_label = ClassLabel::kDefault;
        counts.minority_label = ClassLabel::kFullyPaid;
    }
    counts.imbalance_ratio =
        static_cast<double>(counts.n_majority) / static_cast<double>(counts.n_minority);
    return counts;
}

inline ClassCounts class_counts(const Dataset& dataset) {
    if (dataset.n_rows() == 0) throw EmptyResult("class_counts on an empty dataset");
    return class_counts(std::span<const ClassLabel>(dataset.labels()));
}

struct ColumnStats {
    double q1 = 0.0;
    double q3 = 0.0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

// Quartiles use linear interpolation between closest ranks
// (position = (n-1)*p, the usual "type 7" convention). Statistics are
// computed from a sorted copy, so any permutation of the same values yields
// bit-identical results.
inline ColumnStats compute_stats(std::span<const double> values) {
    if (values.empty()) throw EmptyResult("compute_stats on an empty column");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    auto quantile = [&sorted](double p) {
        const double pos = static_cast<double>(sorted.size() - 1) * p;
        const auto lo = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(lo);
        if (lo + 1 >= sorted.size()) return sorted[lo];
        return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
    };

    ColumnStats stats;
    stats.min = sorted.front();
    stats.max = sorted.back();
    stats.q1 = quantile(0.25);
    stats.q3 = quantile(0.75);
    stats.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
                 static_cast<double>(sorted.size());
    return stats;
}

inline ColumnStats column_stats(const Dataset& dataset, std::string_view column) {
    const auto idx = dataset.schema().find(column);
    if (!idx) throw UnknownColumn("no column named '" + std::string(column) + "'");
    const auto values = dataset.column(*idx);
    return compute_stats(values);
}

// New dataset whose row i is source row indices[i]; duplicates allowed.
inline Dataset select_rows(const Dataset& dataset, std::span<const std::size_t> indices) {
    const std::size_t d = dataset.n_features();
    std::vector<double> values;
    values.reserve(indices.size() * d);
    std::vector<ClassLabel> labels;
    labels.reserve(indices.size());
    for (std::size_t idx : indices) {
        if (idx >= dataset.n_rows()) {
            throw IndexOutOfRange("row index " + std::to_string(idx) + " out of range (" +
                                  std::to_string(dataset.n_rows()) + " rows)");
        }
        const auto row = dataset.row(idx);
        values.insert(values.end(), row.begin(), row.end());
        labels.push_back(dataset.labels()[idx]);
    }
    return Dataset(dataset.schema(), std::move(values), std::move(labels));
}

inline Dataset select_rows(const Dataset& dataset, const std::vector<std::size_t>& indices) {
    return select_rows(dataset, std::span<const std::size_t>(indices));
}

} // namespace creditrisk
