#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "creditrisk/dataset.hpp"
#include "creditrisk/rng.hpp"

namespace test_helpers {

// Dataset from explicit rows; features named f0..f{d-1}.
inline creditrisk::Dataset make_dataset(const std::vector<std::vector<double>>& rows,
                                        const std::vector<int>& labels) {
    const std::size_t d = rows.empty() ? 0 : rows[0].size();
    std::vector<creditrisk::ColumnInfo> columns;
    for (std::size_t j = 0; j < d; ++j) {
        columns.push_back({"f" + std::to_string(j), creditrisk::ColumnKind::kNumeric});
    }
    std::vector<double> values;
    values.reserve(rows.size() * d);
    for (const auto& row : rows) {
        values.insert(values.end(), row.begin(), row.end());
    }
    std::vector<creditrisk::ClassLabel> class_labels;
    class_labels.reserve(labels.size());
    for (int label : labels) class_labels.push_back(creditrisk::label_from_int(label));
    return creditrisk::Dataset(creditrisk::FeatureSchema(std::move(columns), "label"),
                               std::move(values), std::move(class_labels));
}

// Single-column dataset, handy for column_stats / transform tests.
inline creditrisk::Dataset make_column_dataset(const std::vector<double>& values,
                                               const std::string& name = "x") {
    std::vector<creditrisk::ColumnInfo> columns{{name, creditrisk::ColumnKind::kNumeric}};
    std::vector<creditrisk::ClassLabel> labels(values.size(),
                                               creditrisk::ClassLabel::kFullyPaid);
    if (!labels.empty()) labels[0] = creditrisk::ClassLabel::kDefault;
    return creditrisk::Dataset(creditrisk::FeatureSchema(std::move(columns), "label"),
                               std::vector<double>(values), std::move(labels));
}

// Random dataset with both classes present.
inline creditrisk::Dataset random_dataset(creditrisk::Rng& rng, std::size_t n, std::size_t d) {
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) rows[i][j] = rng.next_normal();
        labels[i] = rng.next_double() < 0.5 ? 0 : 1;
    }
    labels[0] = 0;
    if (n > 1) labels[1] = 1;
    return make_dataset(rows, labels);
}

} // namespace test_helpers
