#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "creditrisk/dataset.hpp"
#include "creditrisk/errors.hpp"
#include "creditrisk/rng.hpp"

namespace creditrisk {

struct ForestConfig {
    std::size_t n_trees = 100;
    std::size_t max_features = 0; // 0 -> ceil(sqrt(d))
    std::size_t min_leaf = 1;
    std::size_t max_depth = 0; // 0 -> grow to purity
    std::uint64_t seed = 0;
};

// Axis-aligned CART tree, Gini impurity, stored as a flat node array.
struct DecisionTree {
    struct Node {
        std::int32_t feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        std::uint32_t left = 0;
        std::uint32_t right = 0;
        std::int8_t leaf_label = 0;
    };
    std::vector<Node> nodes;

    int predict(std::span<const double> row) const {
        std::size_t at = 0;
        while (nodes[at].feature >= 0) {
            const auto& node = nodes[at];
            at = row[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left
                                                                              : node.right;
        }
        return nodes[at].leaf_label;
    }
};

struct ForestModel {
    std::vector<DecisionTree> trees;
    std::size_t n_features = 0;
    ForestConfig config;

    // Fraction of trees voting class 1; granularity 1/n_trees.
    double predict_proba(std::span<const double> row) const {
        if (row.size() != n_features) {
            throw DimensionMismatch("row has " + std::to_string(row.size()) +
                                    " features, model expects " + std::to_string(n_features));
        }
        std::size_t votes = 0;
        for (const auto& tree : trees) votes += static_cast<std::size_t>(tree.predict(row));
        return static_cast<double>(votes) / static_cast<double>(trees.size());
    }
};

namespace detail {

struct TreeBuilder {
    const Dataset& data;
    std::size_t max_features;
    std::size_t min_leaf;
    std::size_t max_depth;
    Rng& rng;
    DecisionTree tree;

    std::vector<std::size_t> feature_pool;
    std::vector<std::pair<double, std::uint8_t>> sorted_buffer; // (value, label)

    TreeBuilder(const Dataset& data_, std::size_t max_features_, std::size_t min_leaf_,
                std::size_t max_depth_, Rng& rng_)
        : data(data_), max_features(max_features_), min_leaf(min_leaf_), max_depth(max_depth_),
          rng(rng_) {
        feature_pool.resize(data.n_features());
        for (std::size_t j = 0; j < feature_pool.size(); ++j) feature_pool[j] = j;
    }

    static double gini(std::size_t n0, std::size_t n1) {
        const double total = static_cast<double>(n0 + n1);
        if (total == 0.0) return 0.0;
        const double p0 = static_cast<double>(n0) / total;
        const double p1 = static_cast<double>(n1) / total;
        return 1.0 - p0 * p0 - p1 * p1;
    }

    std::uint32_t build(std::vector<std::size_t>& samples, std::size_t depth) {
        std::size_t n1 = 0;
        for (std::size_t idx : samples) n1 += static_cast<std::size_t>(to_int(data.labels()[idx]));
        const std::size_t n0 = samples.size() - n1;

        const bool pure = n0 == 0 || n1 == 0;
        const bool depth_capped = max_depth > 0 && depth >= max_depth;
        if (!pure && !depth_capped && samples.size() >= 2 * min_leaf) {
            if (auto split = find_best_split(samples, n0, n1)) {
                const auto [feature, threshold] = *split;
                std::vector<std::size_t> left;
                std::vector<std::size_t> right;
                left.reserve(samples.size());
                right.reserve(samples.size());
                for (std::size_t idx : samples) {
                    (data.value(idx, feature) < threshold ? left : right).push_back(idx);
                }
                samples.clear();
                samples.shrink_to_fit();
                const auto node_at = static_cast<std::uint32_t>(tree.nodes.size());
                tree.nodes.emplace_back();
                tree.nodes[node_at].feature = static_cast<std::int32_t>(feature);
                tree.nodes[node_at].threshold = threshold;
                const std::uint32_t left_at = build(left, depth + 1);
                const std::uint32_t right_at = build(right, depth + 1);
                tree.nodes[node_at].left = left_at;
                tree.nodes[node_at].right = right_at;
                return node_at;
            }
        }

        const auto node_at = static_cast<std::uint32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[node_at].feature = -1;
        // Majority label; ties go to class 1, matching the >= threshold rule.
        tree.nodes[node_at].leaf_label = n1 >= n0 ? 1 : 0;
        return node_at;
    }

    // Best Gini-decrease split over max_features randomly drawn features.
    // Candidates are scanned in draw order and strictly better decreases
    // win, so the result is a pure function of the RNG stream.
    std::optional<std::pair<std::size_t, double>> find_best_split(
        const std::vector<std::size_t>& samples, std::size_t n0, std::size_t n1) {
        const double parent_gini = gini(n0, n1);
        const double total = static_cast<double>(samples.size());

        // Partial Fisher-Yates: the first max_features entries become the
        // candidate features.
        for (std::size_t j = 0; j < max_features; ++j) {
            const std::size_t swap_at = j + rng.uniform_index(feature_pool.size() - j);
            std::swap(feature_pool[j], feature_pool[swap_at]);
        }

        double best_decrease = 0.0;
        std::size_t best_feature = 0;
        double best_threshold = 0.0;
        bool found = false;

        for (std::size_t f = 0; f < max_features; ++f) {
            const std::size_t feature = feature_pool[f];
            sorted_buffer.clear();
            for (std::size_t idx : samples) {
                sorted_buffer.emplace_back(data.value(idx, feature),
                                           static_cast<std::uint8_t>(to_int(data.labels()[idx])));
            }
            std::sort(sorted_buffer.begin(), sorted_buffer.end());

            std::size_t left_n0 = 0;
            std::size_t left_n1 = 0;
            for (std::size_t i = 0; i + 1 < sorted_buffer.size(); ++i) {
                if (sorted_buffer[i].second == 0) ++left_n0;
                else ++left_n1;
                if (sorted_buffer[i].first == sorted_buffer[i + 1].first) continue;
                const std::size_t left_n = left_n0 + left_n1;
                const std::size_t right_n = sorted_buffer.size() - left_n;
                if (left_n < min_leaf || right_n < min_leaf) continue;
                const double decrease =
                    parent_gini -
                    (static_cast<double>(left_n) / total) * gini(left_n0, left_n1) -
                    (static_cast<double>(right_n) / total) *
                        gini(n0 - left_n0, n1 - left_n1);
                if (decrease > best_decrease) {
                    best_decrease = decrease;
                    best_feature = feature;
                    best_threshold =
                        sorted_buffer[i].first +
                        (sorted_buffer[i + 1].first - sorted_buffer[i].first) / 2.0;
                    found = true;
                }
            }
        }
        if (!found) return std::nullopt;
        return std::make_pair(best_feature, best_threshold);
    }
};

} // namespace detail

// Bagged CART forest: each tree sees a bootstrap resample of the rows and
// each split considers max_features random features. Per-tree RNG streams
// are derived from (seed, tree index), so the model is a pure function of
// (dataset, config).
inline ForestModel train_forest(const Dataset& data, const ForestConfig& config = {}) {
    if (data.n_rows() == 0) throw EmptyResult("cannot train a forest on an empty dataset");
    if (data.n_features() == 0) throw DegenerateData("forest needs at least one feature");

    ForestModel model;
    model.n_features = data.n_features();
    model.config = config;
    if (model.config.n_trees == 0) model.config.n_trees = 1;
    if (model.config.max_features == 0 || model.config.max_features > data.n_features()) {
        model.config.max_features = static_cast<std::size_t>(
            std::ceil(std::sqrt(static_cast<double>(data.n_features()))));
    }
    if (model.config.min_leaf == 0) model.config.min_leaf = 1;

    model.trees.resize(model.config.n_trees);
    for (std::size_t t = 0; t < model.config.n_trees; ++t) {
        Rng rng(derive_seed(config.seed, {0xF0E57ULL, t}));
        std::vector<std::size_t> bootstrap(data.n_rows());
        for (auto& idx : bootstrap) idx = rng.uniform_index(data.n_rows());
        detail::TreeBuilder builder(data, model.config.max_features, model.config.min_leaf,
                                    model.config.max_depth, rng);
        builder.tree.nodes.reserve(64);
        builder.build(bootstrap, 0);
        model.trees[t] = std::move(builder.tree);
    }
    return model;
}

} // namespace creditrisk
