#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "creditrisk/dataset.hpp"
#include "creditrisk/errors.hpp"
#include "creditrisk/linalg.hpp"
#include "creditrisk/logistic.hpp" // sigmoid

namespace creditrisk {

// Gaussian linear discriminant with a shared (pooled) within-class
// covariance and empirical priors. The class-1 posterior reduces to
// sigmoid(w . x + b) with w = Sigma^-1 (mu1 - mu0).
struct LdaModel {
    std::vector<double> mean0;
    std::vector<double> mean1;
    std::vector<double> pooled_covariance; // d x d, row-major, before regularization
    double prior0 = 0.5;
    double prior1 = 0.5;
    double lambda = 0.0; // regularization actually applied

    std::vector<double> weights; // Sigma^-1 (mu1 - mu0)
    double bias = 0.0;

    double predict_proba(std::span<const double> row) const {
        if (row.size() != weights.size()) {
            throw DimensionMismatch("row has " + std::to_string(row.size()) +
                                    " features, model expects " + std::to_string(weights.size()));
        }
        double z = bias;
        for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * row[j];
        return sigmoid(z);
    }
};

inline LdaModel train_lda(const Dataset& data, double lambda = 1e-6) {
    const std::size_t d = data.n_features();
    const std::size_t n = data.n_rows();
    std::size_t n1 = 0;
    for (ClassLabel label : data.labels()) {
        if (label == ClassLabel::kFullyPaid) ++n1;
    }
    const std::size_t n0 = n - n1;
    if (n0 < 2 || n1 < 2) throw DegenerateData("LDA needs at least 2 samples per class");

    LdaModel model;
    model.mean0.assign(d, 0.0);
    model.mean1.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto& mean = data.labels()[i] == ClassLabel::kFullyPaid ? model.mean1 : model.mean0;
        const auto row = data.row(i);
        for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
    }
    for (std::size_t j = 0; j < d; ++j) {
        model.mean0[j] /= static_cast<double>(n0);
        model.mean1[j] /= static_cast<double>(n1);
    }

    // Pooled within-class scatter, unbiased by n - 2.
    model.pooled_covariance.assign(d * d, 0.0);
    std::vector<double> centered(d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = data.row(i);
        const auto& mean =
            data.labels()[i] == ClassLabel::kFullyPaid ? model.mean1 : model.mean0;
        for (std::size_t j = 0; j < d; ++j) centered[j] = row[j] - mean[j];
        for (std::size_t j = 0; j < d; ++j) {
            for (std::size_t k = j; k < d; ++k) {
                model.pooled_covariance[j * d + k] += centered[j] * centered[k];
            }
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = j; k < d; ++k) {
            model.pooled_covariance[j * d + k] /= static_cast<double>(n - 2);
            model.pooled_covariance[k * d + j] = model.pooled_covariance[j * d + k];
        }
    }

    model.prior0 = static_cast<double>(n0) / static_cast<double>(n);
    model.prior1 = static_cast<double>(n1) / static_cast<double>(n);

    // Regularize Sigma + lambda I; escalate lambda x10 up to 1e-2 if the
    // factorization fails (constant or collinear columns).
    std::vector<double> mean_diff(d);
    for (std::size_t j = 0; j < d; ++j) mean_diff[j] = model.mean1[j] - model.mean0[j];
    std::vector<double> regularized(d * d);
    double current_lambda = lambda > 0.0 ? lambda : 1e-6;
    bool solved = false;
    while (true) {
        regularized = model.pooled_covariance;
        for (std::size_t j = 0; j < d; ++j) regularized[j * d + j] += current_lambda;
        if (detail::solve_spd(regularized, mean_diff, d, model.weights)) {
            solved = true;
            break;
        }
        if (current_lambda >= 1e-2) break;
        current_lambda *= 10.0;
    }
    if (!solved) {
        throw SingularCovariance("pooled covariance singular even at lambda=1e-2");
    }
    model.lambda = current_lambda;

    double midpoint_term = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        midpoint_term += (model.mean1[j] + model.mean0[j]) * model.weights[j];
    }
    model.bias = -0.5 * midpoint_term + std::log(model.prior1 / model.prior0);
    return model;
}

} // namespace creditrisk
