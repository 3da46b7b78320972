#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "creditrisk/dataset.hpp"
#include "creditrisk/errors.hpp"
#include "creditrisk/forest.hpp"
#include "creditrisk/lda.hpp"
#include "creditrisk/logistic.hpp"

namespace creditrisk {

enum class ClassifierKind {
    kLogistic,
    kLda,
    kForest,
};

inline const char* to_string(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::kLogistic: return "logistic";
        case ClassifierKind::kLda: return "lda";
        case ClassifierKind::kForest: return "forest";
    }
    return "unknown";
}

inline ClassifierKind classifier_from_string(const std::string& name) {
    if (name == "logistic") return ClassifierKind::kLogistic;
    if (name == "lda") return ClassifierKind::kLda;
    if (name == "forest") return ClassifierKind::kForest;
    throw ConfigError("unknown classifier '" + name + "' (expected logistic, lda, forest)");
}

struct ClassifierConfig {
    LogisticConfig logistic;
    double lda_lambda = 1e-6;
    ForestConfig forest;
};

using AnyModel = std::variant<LogisticModel, LdaModel, ForestModel>;

// The per-call seed feeds only the stochastic trainer (the forest);
// logistic regression and LDA are deterministic fits.
inline AnyModel train_classifier(ClassifierKind kind, const Dataset& train,
                                 const ClassifierConfig& config, std::uint64_t seed) {
    switch (kind) {
        case ClassifierKind::kLogistic:
            return train_logistic(train, config.logistic);
        case ClassifierKind::kLda:
            return train_lda(train, config.lda_lambda);
        case ClassifierKind::kForest: {
            ForestConfig forest_config = config.forest;
            forest_config.seed = seed;
            return train_forest(train, forest_config);
        }
    }
    throw ConfigError("invalid classifier kind");
}

inline double predict_proba(const AnyModel& model, std::span<const double> row) {
    return std::visit([row](const auto& m) { return m.predict_proba(row); }, model);
}

struct Prediction {
    double score = 0.0;
    ClassLabel label = ClassLabel::kDefault;
};

// label = 1 iff score >= threshold.
inline Prediction predict(const AnyModel& model, std::span<const double> row,
                          double threshold = 0.5) {
    Prediction prediction;
    prediction.score = predict_proba(model, row);
    prediction.label = prediction.score >= threshold ? ClassLabel::kFullyPaid
                                                     : ClassLabel::kDefault;
    return prediction;
}

inline std::vector<double> predict_proba_all(const AnyModel& model, const Dataset& data) {
    std::vector<double> scores(data.n_rows());
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        scores[i] = predict_proba(model, data.row(i));
    }
    return scores;
}

// Self-describing audit dump; no cross-version compatibility promise.
inline nlohmann::ordered_json model_to_json(const AnyModel& model) {
    nlohmann::ordered_json j;
    if (const auto* logistic = std::get_if<LogisticModel>(&model)) {
        j["kind"] = "logistic";
        j["beta0"] = logistic->beta0;
        j["beta"] = logistic->beta;
        j["iterations"] = logistic->iterations;
        j["final_grad_norm"] = logistic->final_grad_norm;
        j["converged"] = logistic->converged;
    } else if (const auto* lda = std::get_if<LdaModel>(&model)) {
        j["kind"] = "lda";
        j["mean0"] = lda->mean0;
        j["mean1"] = lda->mean1;
        j["pooled_covariance"] = lda->pooled_covariance;
        j["prior0"] = lda->prior0;
        j["prior1"] = lda->prior1;
        j["lambda"] = lda->lambda;
        j["weights"] = lda->weights;
        j["bias"] = lda->bias;
    } else if (const auto* forest = std::get_if<ForestModel>(&model)) {
        j["kind"] = "forest";
        j["n_trees"] = forest->trees.size();
        j["n_features"] = forest->n_features;
        j["max_features"] = forest->config.max_features;
        nlohmann::ordered_json trees = nlohmann::ordered_json::array();
        for (const auto& tree : forest->trees) {
            nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
            for (const auto& node : tree.nodes) {
                nodes.push_back({{"feature", node.feature},
                                 {"threshold", node.threshold},
                                 {"left", node.left},
                                 {"right", node.right},
                                 {"leaf_label", node.leaf_label}});
            }
            trees.push_back(std::move(nodes));
        }
        j["trees"] = std::move(trees);
    }
    return j;
}

} // namespace creditrisk
