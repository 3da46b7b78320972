#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "creditrisk/dataset.hpp"
#include "creditrisk/errors.hpp"
#include "creditrisk/forest.hpp"
#include "creditrisk/logistic.hpp"
#include "creditrisk/neighbors.hpp"
#include "creditrisk/rng.hpp"

namespace creditrisk {

enum class ResampleMethod {
    kNone,
    kRus,
    kRos,
    kSmote,
    kAdasyn,
    kIht,
    kSmoteTomek,
    kSmoteEnn,
};

inline const char* to_string(ResampleMethod method) {
    switch (method) {
        case ResampleMethod::kNone: return "none";
        case ResampleMethod::kRus: return "rus";
        case ResampleMethod::kRos: return "ros";
        case ResampleMethod::kSmote: return "smote";
        case ResampleMethod::kAdasyn: return "adasyn";
        case ResampleMethod::kIht: return "iht";
        case ResampleMethod::kSmoteTomek: return "smote_tomek";
        case ResampleMethod::kSmoteEnn: return "smote_enn";
    }
    return "unknown";
}

inline ResampleMethod resampler_from_string(const std::string& name) {
    if (name == "none") return ResampleMethod::kNone;
    if (name == "rus") return ResampleMethod::kRus;
    if (name == "ros") return ResampleMethod::kRos;
    if (name == "smote") return ResampleMethod::kSmote;
    if (name == "adasyn") return ResampleMethod::kAdasyn;
    if (name == "iht") return ResampleMethod::kIht;
    if (name == "smote_tomek") return ResampleMethod::kSmoteTomek;
    if (name == "smote_enn") return ResampleMethod::kSmoteEnn;
    throw ConfigError("unknown resampler '" + name + "'");
}

enum class IhtEstimator {
    kLogistic,
    kForest,
};

struct ResamplePlan {
    ResampleMethod method = ResampleMethod::kNone;
    std::size_t k_smote = 5;
    std::size_t k_enn = 3;
    double beta = 1.0; // ADASYN balance level in (0, 1]
    bool adasyn_strict = false; // hit the synthetic budget G exactly
    IhtEstimator iht_estimator = IhtEstimator::kForest;
    std::size_t iht_cv_folds = 5;
    std::uint64_t seed = 0;
};

struct ResampleReport {
    std::string method;
    ClassCounts before;
    // Counts after resampling, classified by the *input* majority/minority
    // assignment (hybrid editing can shrink either side).
    std::size_t after_majority = 0;
    std::size_t after_minority = 0;
    std::size_t n_synthetic = 0;
    std::size_t n_removed = 0;
    std::vector<std::string> warnings;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["method"] = method;
        j["before"] = {{"majority", before.n_majority},
                       {"minority", before.n_minority},
                       {"imbalance_ratio", before.imbalance_ratio}};
        j["after"] = {{"majority", after_majority}, {"minority", after_minority}};
        j["n_synthetic"] = n_synthetic;
        j["n_removed"] = n_removed;
        j["warnings"] = warnings;
        return j;
    }
};

struct ResampleResult {
    Dataset data;
    ResampleReport report;
};

inline std::vector<std::size_t> make_identity(std::size_t n) {
    std::vector<std::size_t> identity(n);
    std::iota(identity.begin(), identity.end(), std::size_t{0});
    return identity;
}

namespace detail {

struct ClassIndexSplit {
    std::vector<std::size_t> majority;
    std::vector<std::size_t> minority;
    ClassCounts counts;
};

inline ClassIndexSplit split_by_class(const Dataset& data) {
    ClassIndexSplit split;
    split.counts = class_counts(data);
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        (data.labels()[i] == split.counts.majority_label ? split.majority : split.minority)
            .push_back(i);
    }
    return split;
}

inline void fill_after_counts(ResampleReport& report, const Dataset& data) {
    std::size_t majority = 0;
    for (ClassLabel label : data.labels()) {
        if (label == report.before.majority_label) ++majority;
    }
    report.after_majority = majority;
    report.after_minority = data.n_rows() - majority;
}

// k nearest minority neighbors of every minority point (self excluded),
// shared by SMOTE and ADASYN interpolation.
struct MinorityNeighborhood {
    NeighborIndex index;
    std::vector<std::vector<std::size_t>> neighbors; // positions in the minority list

    MinorityNeighborhood(const Dataset& data, const std::vector<std::size_t>& minority,
                         std::size_t k)
        : index(make_points(data, minority), data.n_features()) {
        neighbors.resize(minority.size());
        for (std::size_t m = 0; m < minority.size(); ++m) {
            const auto hits = index.query(index.point(m), k, m);
            neighbors[m].reserve(k);
            for (const auto& hit : hits) neighbors[m].push_back(hit.index);
        }
    }

    static std::vector<double> make_points(const Dataset& data,
                                           const std::vector<std::size_t>& minority) {
        std::vector<double> points;
        points.reserve(minority.size() * data.n_features());
        for (std::size_t idx : minority) {
            const auto row = data.row(idx);
            points.insert(points.end(), row.begin(), row.end());
        }
        return points;
    }
};

inline Dataset append_synthetic(const Dataset& data, const std::vector<double>& synth_values,
                                std::size_t n_synth, ClassLabel synth_label) {
    std::vector<double> values(data.values());
    values.insert(values.end(), synth_values.begin(), synth_values.end());
    std::vector<ClassLabel> labels(data.labels());
    labels.insert(labels.end(), n_synth, synth_label);
    return Dataset(data.schema(), std::move(values), std::move(labels));
}

} // namespace detail

// Random under-sampling: majority rows are down-sampled uniformly without
// replacement to the minority count; output order is shuffled by the seed.
inline ResampleResult rus(const Dataset& train, std::uint64_t seed) {
    auto split = detail::split_by_class(train);
    ResampleReport report;
    report.method = "rus";
    report.before = split.counts;

    Rng rng(derive_seed(seed, {0x2052ULL}));
    rng.shuffle(split.majority);
    split.majority.resize(split.counts.n_minority);
    std::vector<std::size_t> keep = split.minority;
    keep.insert(keep.end(), split.majority.begin(), split.majority.end());
    rng.shuffle(keep);

    report.n_removed = split.counts.n_majority - split.counts.n_minority;
    ResampleResult result{select_rows(train, keep), std::move(report)};
    detail::fill_after_counts(result.report, result.data);
    return result;
}

// Random over-sampling: minority rows duplicated uniformly with replacement
// until the counts match.
inline ResampleResult ros(const Dataset& train, std::uint64_t seed) {
    auto split = detail::split_by_class(train);
    ResampleReport report;
    report.method = "ros";
    report.before = split.counts;

    Rng rng(derive_seed(seed, {0x205BULL}));
    std::vector<std::size_t> keep(train.n_rows());
    std::iota(keep.begin(), keep.end(), std::size_t{0});
    const std::size_t need = split.counts.n_majority - split.counts.n_minority;
    for (std::size_t i = 0; i < need; ++i) {
        keep.push_back(split.minority[rng.uniform_index(split.minority.size())]);
    }
    report.n_synthetic = need;
    ResampleResult result{select_rows(train, keep), std::move(report)};
    detail::fill_after_counts(result.report, result.data);
    return result;
}

namespace detail {

// Core SMOTE generation: returns the input rows plus `need` synthetic
// minority rows, each interpolated between a base minority point (chosen
// round-robin) and one of its k nearest minority neighbors.
inline Dataset smote_generate(const Dataset& train, const ClassIndexSplit& split,
                              std::size_t k, std::size_t need, Rng& rng) {
    const std::size_t d = train.n_features();
    const MinorityNeighborhood hood(train, split.minority, k);
    std::vector<double> synth;
    synth.reserve(need * d);
    for (std::size_t t = 0; t < need; ++t) {
        const std::size_t base = t % split.minority.size();
        const auto base_row = hood.index.point(base);
        const std::size_t pick = hood.neighbors[base][rng.uniform_index(k)];
        const auto neighbor_row = hood.index.point(pick);
        const double u = rng.next_double();
        for (std::size_t j = 0; j < d; ++j) {
            synth.push_back(base_row[j] + u * (neighbor_row[j] - base_row[j]));
        }
    }
    return append_synthetic(train, synth, need, split.counts.minority_label);
}

} // namespace detail

// SMOTE: synthetic minority points on segments between minority neighbors.
// A minority class smaller than k+1 falls back to ROS with a warning.
inline ResampleResult smote(const Dataset& train, std::size_t k, std::uint64_t seed) {
    auto split = detail::split_by_class(train);
    if (split.counts.n_minority < k + 1) {
        ResampleResult result = ros(train, seed);
        result.report.method = "smote";
        result.report.warnings.push_back(
            "minority count " + std::to_string(split.counts.n_minority) +
            " is below k+1=" + std::to_string(k + 1) + "; fell back to ros");
        return result;
    }
    ResampleReport report;
    report.method = "smote";
    report.before = split.counts;
    const std::size_t need = split.counts.n_majority - split.counts.n_minority;
    Rng rng(derive_seed(seed, {0x53D7EULL}));
    report.n_synthetic = need;
    ResampleResult result{detail::smote_generate(train, split, k, need, rng),
                          std::move(report)};
    detail::fill_after_counts(result.report, result.data);
    return result;
}

// ADASYN: per-point synthetic budget proportional to the fraction of
// majority neighbors (over all classes) around each minority point.
inline ResampleResult adasyn(const Dataset& train, std::size_t k, double beta,
                             bool strict, std::uint64_t seed) {
    auto split = detail::split_by_class(train);
    if (split.counts.n_minority < k + 1) {
        throw MinorityTooSmall("ADASYN needs a minority of at least k+1=" +
                               std::to_string(k + 1) + ", got " +
                               std::to_string(split.counts.n_minority));
    }
    ResampleReport report;
    report.method = "adasyn";
    report.before = split.counts;

    const std::size_t budget = static_cast<std::size_t>(
        std::floor(beta * static_cast<double>(split.counts.n_majority -
                                              split.counts.n_minority)));
    if (budget == 0) {
        ResampleResult result{select_rows(train, make_identity(train.n_rows())),
                              std::move(report)};
        detail::fill_after_counts(result.report, result.data);
        return result;
    }

    // Hardness ratio r_i over ALL points: majority members among the k
    // nearest neighbors of each minority point.
    const NeighborIndex all_index(std::vector<double>(train.values()), train.n_features());
    std::vector<double> ratio(split.minority.size(), 0.0);
    double ratio_sum = 0.0;
    for (std::size_t m = 0; m < split.minority.size(); ++m) {
        const auto hits = all_index.query(train.row(split.minority[m]), k, split.minority[m]);
        std::size_t majority_neighbors = 0;
        for (const auto& hit : hits) {
            if (train.labels()[hit.index] == split.counts.majority_label) ++majority_neighbors;
        }
        ratio[m] = static_cast<double>(majority_neighbors) / static_cast<double>(k);
        ratio_sum += ratio[m];
    }

    if (ratio_sum == 0.0) {
        // No minority point borders the majority class; the density rule
        // generates nothing, so fall back to plain SMOTE.
        ResampleResult result = smote(train, k, seed);
        result.report.method = "adasyn";
        result.report.warnings.push_back(
            "all minority neighborhoods are pure; fell back to smote");
        return result;
    }

    std::vector<std::size_t> per_point(split.minority.size(), 0);
    std::size_t total = 0;
    for (std::size_t m = 0; m < split.minority.size(); ++m) {
        per_point[m] = static_cast<std::size_t>(
            std::floor(ratio[m] / ratio_sum * static_cast<double>(budget) + 0.5));
        total += per_point[m];
    }
    if (strict && total != budget) {
        std::vector<std::size_t> order(split.minority.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&ratio](std::size_t a, std::size_t b) {
            if (ratio[a] != ratio[b]) return ratio[a] > ratio[b];
            return a < b;
        });
        std::size_t at = 0;
        while (total < budget) {
            ++per_point[order[at % order.size()]];
            ++total;
            ++at;
        }
        while (total > budget) {
            const std::size_t m = order[at % order.size()];
            if (per_point[m] > 0) {
                --per_point[m];
                --total;
            }
            ++at;
        }
    }
    report.n_synthetic = total;

    const detail::MinorityNeighborhood hood(train, split.minority, k);
    Rng rng(derive_seed(seed, {0xADA5ULL}));
    const std::size_t d = train.n_features();
    std::vector<double> synth;
    synth.reserve(total * d);
    for (std::size_t m = 0; m < split.minority.size(); ++m) {
        const auto base_row = hood.index.point(m);
        for (std::size_t g = 0; g < per_point[m]; ++g) {
            const std::size_t pick = hood.neighbors[m][rng.uniform_index(k)];
            const auto neighbor_row = hood.index.point(pick);
            const double u = rng.next_double();
            for (std::size_t j = 0; j < d; ++j) {
                synth.push_back(base_row[j] + u * (neighbor_row[j] - base_row[j]));
            }
        }
    }
    ResampleResult result{
        detail::append_synthetic(train, synth, total, split.counts.minority_label),
        std::move(report)};
    detail::fill_after_counts(result.report, result.data);
    return result;
}

// Instance hardness threshold: remove the majority samples whose own class
// is hardest to predict under out-of-fold cross-validated probabilities,
// keeping exactly as many (easiest) majority rows as there are minority
// rows. Estimator internals are fixed here: forest = 50 trees / min_leaf 5,
// logistic = 100 IRLS iterations with l2 = 1e-6.
inline ResampleResult iht(const Dataset& train, const ResamplePlan& plan) {
    auto split = detail::split_by_class(train);
    ResampleReport report;
    report.method = "iht";
    report.before = split.counts;

    const std::size_t folds = std::max<std::size_t>(2, plan.iht_cv_folds);
    Rng rng(derive_seed(plan.seed, {0x1A7ULL}));

    // Stratified fold assignment: shuffle each class, deal round-robin.
    std::vector<std::size_t> fold_of(train.n_rows(), 0);
    for (auto* group : {&split.majority, &split.minority}) {
        std::vector<std::size_t> shuffled(*group);
        rng.shuffle(shuffled);
        for (std::size_t i = 0; i < shuffled.size(); ++i) fold_of[shuffled[i]] = i % folds;
    }

    std::vector<double> true_class_probability(train.n_rows(), 0.0);
    for (std::size_t fold = 0; fold < folds; ++fold) {
        std::vector<std::size_t> fit_rows;
        std::vector<std::size_t> holdout_rows;
        for (std::size_t i = 0; i < train.n_rows(); ++i) {
            (fold_of[i] == fold ? holdout_rows : fit_rows).push_back(i);
        }
        if (holdout_rows.empty()) continue;
        const Dataset fit_data = select_rows(train, fit_rows);

        bool single_class = true;
        for (std::size_t i = 1; i < fit_data.n_rows(); ++i) {
            if (fit_data.labels()[i] != fit_data.labels()[0]) {
                single_class = false;
                break;
            }
        }
        if (single_class) {
            // Degenerate complement: score by its (one-class) prevalence.
            const double p1 = fit_data.n_rows() == 0
                                  ? 0.5
                                  : static_cast<double>(to_int(fit_data.labels()[0]));
            for (std::size_t i : holdout_rows) {
                true_class_probability[i] =
                    train.labels()[i] == ClassLabel::kFullyPaid ? p1 : 1.0 - p1;
            }
            continue;
        }

        std::function<double(std::span<const double>)> score_class1;
        LogisticModel logit;
        ForestModel woods;
        if (plan.iht_estimator == IhtEstimator::kLogistic) {
            logit = train_logistic(fit_data, LogisticConfig{100, 1e-6, 1e-6});
            score_class1 = [&logit](std::span<const double> row) {
                return logit.predict_proba(row);
            };
        } else {
            ForestConfig config;
            config.n_trees = 50;
            config.min_leaf = 5;
            config.seed = derive_seed(plan.seed, {0x1A7F0ULL, fold});
            woods = train_forest(fit_data, config);
            score_class1 = [&woods](std::span<const double> row) {
                return woods.predict_proba(row);
            };
        }
        for (std::size_t i : holdout_rows) {
            const double p1 = score_class1(train.row(i));
            true_class_probability[i] =
                train.labels()[i] == ClassLabel::kFullyPaid ? p1 : 1.0 - p1;
        }
    }

    // Keep the n_minority easiest majority rows; ties break on row index.
    std::vector<std::size_t> majority_sorted(split.majority);
    std::sort(majority_sorted.begin(), majority_sorted.end(),
              [&true_class_probability](std::size_t a, std::size_t b) {
                  if (true_class_probability[a] != true_class_probability[b]) {
                      return true_class_probability[a] > true_class_probability[b];
                  }
                  return a < b;
              });
    majority_sorted.resize(split.counts.n_minority);
    std::vector<std::size_t> keep(split.minority);
    keep.insert(keep.end(), majority_sorted.begin(), majority_sorted.end());
    std::sort(keep.begin(), keep.end());

    report.n_removed = split.counts.n_majority - split.counts.n_minority;
    ResampleResult result{select_rows(train, keep), std::move(report)};
    detail::fill_after_counts(result.report, result.data);
    return result;
}

// Tomek links: pairs (i, j), i < j, of opposite-class points that are each
// other's 1-nearest neighbor under the deterministic tie-break.
inline std::vector<std::pair<std::size_t, std::size_t>> tomek_links(const Dataset& data) {
    std::vector<std::pair<std::size_t, std::size_t>> links;
    if (data.n_rows() < 2) return links;
    const NeighborIndex index(std::vector<double>(data.values()), data.n_features());
    const auto nearest = index.all_nearest();
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        const std::size_t j = nearest[i];
        if (i < j && nearest[j] == i && data.labels()[i] != data.labels()[j]) {
            links.emplace_back(i, j);
        }
    }
    return links;
}

// SMOTE then a single Tomek-link sweep removing both members of every link.
inline ResampleResult smote_tomek(const Dataset& train, const ResamplePlan& plan) {
    ResampleResult over = smote(train, plan.k_smote, plan.seed);
    over.report.method = "smote_tomek";
    const auto links = tomek_links(over.data);
    std::set<std::size_t> drop;
    for (const auto& [i, j] : links) {
        drop.insert(i);
        drop.insert(j);
    }
    std::vector<std::size_t> keep;
    keep.reserve(over.data.n_rows() - drop.size());
    for (std::size_t i = 0; i < over.data.n_rows(); ++i) {
        if (!drop.count(i)) keep.push_back(i);
    }
    if (keep.empty()) throw EmptyResult("every row participates in a Tomek link");
    over.report.n_removed += drop.size();
    ResampleResult result{select_rows(over.data, keep), std::move(over.report)};
    detail::fill_after_counts(result.report, result.data);
    return result;
}

// SMOTE then edited nearest neighbors over both classes: every sample whose
// label disagrees with the strict majority of its k_enn nearest neighbors is
// removed. Neighborhoods come from the pre-removal point set (single pass);
// ties retain the sample. The output need not be 1:1.
inline ResampleResult smote_enn(const Dataset& train, const ResamplePlan& plan) {
    ResampleResult over = smote(train, plan.k_smote, plan.seed);
    over.report.method = "smote_enn";
    const std::size_t n = over.data.n_rows();
    std::size_t k = plan.k_enn;
    if (k + 1 > n) {
        k = n - 1;
        over.report.warnings.push_back("k_enn reduced to " + std::to_string(k) +
                                       " (only " + std::to_string(n) + " rows)");
    }
    const NeighborIndex index(std::vector<double>(over.data.values()),
                              over.data.n_features());
    std::vector<std::size_t> keep;
    keep.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto hits = index.query(over.data.row(i), k, i);
        std::size_t votes1 = 0;
        for (const auto& hit : hits) {
            votes1 += static_cast<std::size_t>(to_int(over.data.labels()[hit.index]));
        }
        const std::size_t votes0 = k - votes1;
        std::optional<ClassLabel> neighborhood_label;
        if (2 * votes1 > k) neighborhood_label = ClassLabel::kFullyPaid;
        else if (2 * votes0 > k) neighborhood_label = ClassLabel::kDefault;
        if (neighborhood_label && *neighborhood_label != over.data.labels()[i]) continue;
        keep.push_back(i);
    }
    if (keep.empty()) throw EmptyResult("edited nearest neighbors removed every row");
    over.report.n_removed += n - keep.size();
    ResampleResult result{select_rows(over.data, keep), std::move(over.report)};
    detail::fill_after_counts(result.report, result.data);
    return result;
}

inline void validate(const ResamplePlan& plan) {
    if (plan.k_smote < 1) throw ConfigError("k_smote must be >= 1");
    if (plan.k_enn < 1) throw ConfigError("k_enn must be >= 1");
    if (!(plan.beta > 0.0 && plan.beta <= 1.0)) {
        throw ConfigError("beta must lie in (0, 1]");
    }
}

// Dispatch on the plan; `none` passes the training data through unchanged.
inline ResampleResult resample(const Dataset& train, const ResamplePlan& plan) {
    validate(plan);
    switch (plan.method) {
        case ResampleMethod::kNone: {
            ResampleReport report;
            report.method = "none";
            report.before = class_counts(train);
            report.after_majority = report.before.n_majority;
            report.after_minority = report.before.n_minority;
            return {select_rows(train, make_identity(train.n_rows())), std::move(report)};
        }
        case ResampleMethod::kRus: return rus(train, plan.seed);
        case ResampleMethod::kRos: return ros(train, plan.seed);
        case ResampleMethod::kSmote: return smote(train, plan.k_smote, plan.seed);
        case ResampleMethod::kAdasyn:
            return adasyn(train, plan.k_smote, plan.beta, plan.adasyn_strict, plan.seed);
        case ResampleMethod::kIht: return iht(train, plan);
        case ResampleMethod::kSmoteTomek: return smote_tomek(train, plan);
        case ResampleMethod::kSmoteEnn: return smote_enn(train, plan);
    }
    throw ConfigError("invalid resample method");
}

} // namespace creditrisk
