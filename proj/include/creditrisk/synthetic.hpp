#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "creditrisk/dataset.hpp"
#include "creditrisk/errors.hpp"
#include "creditrisk/rng.hpp"

namespace creditrisk {

// Two isotropic unit-variance Gaussian clouds whose means sit
// class_separation standard deviations apart along the all-ones direction.
// Labels: 1 = majority (fully paid), 0 = minority (default). Stands in for
// the proprietary loan data at desk scale.
struct SyntheticSpec {
    std::size_t n_samples = 0;
    double imbalance_ratio = 1.0;
    std::size_t n_features = 10;
    double class_separation = 1.0;
    std::uint64_t seed = 0;
};

inline Dataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_samples < 2) throw InvalidSpec("n_samples must be at least 2");
    if (spec.n_features < 1) throw InvalidSpec("n_features must be at least 1");
    if (spec.imbalance_ratio < 1.0) throw InvalidSpec("imbalance_ratio must be >= 1");
    if (spec.class_separation < 0.0) throw InvalidSpec("class_separation must be >= 0");

    const auto n_minority = static_cast<std::size_t>(std::llround(
        static_cast<double>(spec.n_samples) / (1.0 + spec.imbalance_ratio)));
    if (n_minority == 0 || n_minority >= spec.n_samples) {
        throw InvalidSpec("n_samples and imbalance_ratio leave an empty class");
    }
    const std::size_t n_majority = spec.n_samples - n_minority;

    // Each mean sits at +-(separation/2) / sqrt(d) per coordinate, so the
    // Euclidean distance between the means is exactly class_separation.
    const double offset =
        spec.class_separation / 2.0 / std::sqrt(static_cast<double>(spec.n_features));

    Rng rng(derive_seed(spec.seed, {0x5F47ULL}));
    std::vector<double> values;
    values.reserve(spec.n_samples * spec.n_features);
    std::vector<ClassLabel> labels;
    labels.reserve(spec.n_samples);
    for (std::size_t i = 0; i < n_majority; ++i) {
        for (std::size_t j = 0; j < spec.n_features; ++j) {
            values.push_back(offset + rng.next_normal());
        }
        labels.push_back(ClassLabel::kFullyPaid);
    }
    for (std::size_t i = 0; i < n_minority; ++i) {
        for (std::size_t j = 0; j < spec.n_features; ++j) {
            values.push_back(-offset + rng.next_normal());
        }
        labels.push_back(ClassLabel::kDefault);
    }

    std::vector<ColumnInfo> columns;
    columns.reserve(spec.n_features);
    for (std::size_t j = 0; j < spec.n_features; ++j) {
        columns.push_back({"f" + std::to_string(j), ColumnKind::kNumeric});
    }
    return Dataset(FeatureSchema(std::move(columns), "label"), std::move(values),
                   std::move(labels));
}

} // namespace creditrisk
