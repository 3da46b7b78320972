#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "creditrisk/dataset.hpp"
#include "creditrisk/errors.hpp"
#include "creditrisk/linalg.hpp"

namespace creditrisk {

inline double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

struct LogisticConfig {
    std::size_t max_iter = 200;
    double tol = 1e-6; // gradient max-norm
    double l2 = 0.0;   // ridge on the coefficients; the intercept is never penalized
};

// Binary logistic regression: log-odds of class 1 are beta0 + x . beta.
struct LogisticModel {
    double beta0 = 0.0;
    std::vector<double> beta;
    std::size_t iterations = 0;
    double final_grad_norm = 0.0;
    bool converged = false;

    double linear_score(std::span<const double> row) const {
        if (row.size() != beta.size()) {
            throw DimensionMismatch("row has " + std::to_string(row.size()) +
                                    " features, model expects " + std::to_string(beta.size()));
        }
        double z = beta0;
        for (std::size_t j = 0; j < beta.size(); ++j) z += beta[j] * row[j];
        return z;
    }

    double predict_proba(std::span<const double> row) const {
        return sigmoid(linear_score(row));
    }
};

// Log-likelihood of the labels under (beta0, beta), minus the L2 penalty.
// log(1 + e^z) is evaluated as max(z, 0) + log1p(e^-|z|) to stay finite for
// any score.
inline double logistic_log_likelihood(const Dataset& data, double beta0,
                                      std::span<const double> beta, double l2 = 0.0) {
    double ll = 0.0;
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        const auto row = data.row(i);
        double z = beta0;
        for (std::size_t j = 0; j < beta.size(); ++j) z += beta[j] * row[j];
        const double y = static_cast<double>(to_int(data.labels()[i]));
        const double log1pexp = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
        ll += y * z - log1pexp;
    }
    for (double b : beta) ll -= 0.5 * l2 * b * b;
    return ll;
}

// Gradient of the penalized log-likelihood; element 0 is d/d beta0.
inline std::vector<double> logistic_gradient(const Dataset& data, double beta0,
                                             std::span<const double> beta, double l2 = 0.0) {
    std::vector<double> grad(beta.size() + 1, 0.0);
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        const auto row = data.row(i);
        double z = beta0;
        for (std::size_t j = 0; j < beta.size(); ++j) z += beta[j] * row[j];
        const double residual = static_cast<double>(to_int(data.labels()[i])) - sigmoid(z);
        grad[0] += residual;
        for (std::size_t j = 0; j < beta.size(); ++j) grad[j + 1] += residual * row[j];
    }
    for (std::size_t j = 0; j < beta.size(); ++j) grad[j + 1] -= l2 * beta[j];
    return grad;
}

// Maximum-likelihood fit by Newton steps (IRLS) with step halving. Hitting
// max_iter is reported through the model metadata, not an error: separable
// data legitimately never reaches a zero gradient.
inline LogisticModel train_logistic(const Dataset& data, const LogisticConfig& config = {}) {
    bool has0 = false;
    bool has1 = false;
    for (ClassLabel label : data.labels()) {
        (label == ClassLabel::kFullyPaid ? has1 : has0) = true;
    }
    if (!has0 || !has1) throw DegenerateData("logistic regression needs both classes");

    const std::size_t d = data.n_features();
    const std::size_t p = d + 1;
    LogisticModel model;
    model.beta.assign(d, 0.0);

    std::vector<double> hessian(p * p);
    std::vector<double> step;
    double ll = logistic_log_likelihood(data, model.beta0, model.beta, config.l2);

    for (std::size_t iter = 0; iter < config.max_iter; ++iter) {
        const auto grad = logistic_gradient(data, model.beta0, model.beta, config.l2);
        double grad_norm = 0.0;
        for (double g : grad) grad_norm = std::max(grad_norm, std::abs(g));
        model.iterations = iter;
        model.final_grad_norm = grad_norm;
        if (grad_norm < config.tol) {
            model.converged = true;
            return model;
        }

        // Hessian of the negative penalized LL: X^T W X + l2 (coefficients
        // only) + a small ridge so separable data stays solvable.
        std::fill(hessian.begin(), hessian.end(), 0.0);
        for (std::size_t i = 0; i < data.n_rows(); ++i) {
            const auto row = data.row(i);
            double z = model.beta0;
            for (std::size_t j = 0; j < d; ++j) z += model.beta[j] * row[j];
            const double pr = sigmoid(z);
            const double w = pr * (1.0 - pr);
            hessian[0] += w;
            for (std::size_t j = 0; j < d; ++j) {
                hessian[0 * p + (j + 1)] += w * row[j];
                for (std::size_t k = j; k < d; ++k) {
                    hessian[(j + 1) * p + (k + 1)] += w * row[j] * row[k];
                }
            }
        }
        for (std::size_t j = 1; j < p; ++j) hessian[j * p + 0] = hessian[0 * p + j];
        for (std::size_t j = 1; j < p; ++j) {
            for (std::size_t k = j + 1; k < p; ++k) hessian[k * p + j] = hessian[j * p + k];
        }
        for (std::size_t j = 1; j < p; ++j) hessian[j * p + j] += config.l2;
        for (std::size_t j = 0; j < p; ++j) hessian[j * p + j] += 1e-10;

        if (!detail::solve_spd(hessian, grad, p, step)) {
            throw DegenerateData("logistic Hessian is not positive definite");
        }

        // Step halving keeps the penalized LL non-decreasing.
        double scale = 1.0;
        bool improved = false;
        for (int halving = 0; halving < 30; ++halving) {
            const double b0 = model.beta0 + scale * step[0];
            std::vector<double> b(model.beta);
            for (std::size_t j = 0; j < d; ++j) b[j] += scale * step[j + 1];
            const double candidate = logistic_log_likelihood(data, b0, b, config.l2);
            if (candidate >= ll || !std::isfinite(ll)) {
                model.beta0 = b0;
                model.beta = std::move(b);
                ll = candidate;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if (!improved) {
            // No ascent direction left at this precision.
            return model;
        }
    }
    const auto grad = logistic_gradient(data, model.beta0, model.beta, config.l2);
    double grad_norm = 0.0;
    for (double g : grad) grad_norm = std::max(grad_norm, std::abs(g));
    model.iterations = config.max_iter;
    model.final_grad_norm = grad_norm;
    model.converged = grad_norm < config.tol;
    return model;
}

} // namespace creditrisk
