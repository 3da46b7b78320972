#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "creditrisk/dataset.hpp"
#include "creditrisk/errors.hpp"

namespace creditrisk {

// Positive class is 1 (fully paid) throughout.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
};

inline ConfusionMatrix confusion(std::span<const ClassLabel> y_true,
                                 std::span<const ClassLabel> y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw LengthMismatch("y_true has " + std::to_string(y_true.size()) +
                             " entries, y_pred has " + std::to_string(y_pred.size()));
    }
    if (y_true.empty()) throw LengthMismatch("confusion on empty input");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const bool actual = y_true[i] == ClassLabel::kFullyPaid;
        const bool predicted = y_pred[i] == ClassLabel::kFullyPaid;
        if (actual && predicted) ++cm.tp;
        else if (actual && !predicted) ++cm.fn;
        else if (!actual && predicted) ++cm.fp;
        else ++cm.tn;
    }
    return cm;
}

inline double sensitivity(const ConfusionMatrix& cm) {
    if (cm.tp + cm.fn == 0) {
        throw UndefinedMetric("sensitivity undefined: no positive samples in y_true");
    }
    return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
}

inline double specificity(const ConfusionMatrix& cm) {
    if (cm.tn + cm.fp == 0) {
        throw UndefinedMetric("specificity undefined: no negative samples in y_true");
    }
    return static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp);
}

inline double g_mean(double sensitivity_value, double specificity_value) {
    return std::sqrt(sensitivity_value * specificity_value);
}

inline double g_mean(const ConfusionMatrix& cm) {
    return g_mean(sensitivity(cm), specificity(cm));
}

struct BasicRates {
    double accuracy = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double fp_rate = 0.0;
};

inline BasicRates basic_rates(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw LengthMismatch("basic_rates on an empty confusion matrix");
    BasicRates rates;
    rates.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    rates.sensitivity = sensitivity(cm);
    rates.specificity = specificity(cm);
    rates.fp_rate = static_cast<double>(cm.fp) / static_cast<double>(cm.fp + cm.tn);
    return rates;
}

struct RocCurve {
    // (fpr, tpr) points from the threshold sweep; starts (0,0), ends (1,1).
    std::vector<std::pair<double, double>> points;
};

struct RocResult {
    RocCurve curve;
    double auc = 0.0;
};

// Exact ROC from the distinct observed scores, swept descending; tied scores
// collapse into one curve point, which makes the trapezoidal AUC equal to
// the Mann-Whitney statistic with ties counted 1/2.
inline RocResult roc_auc(std::span<const double> scores,
                         std::span<const ClassLabel> y_true) {
    if (scores.size() != y_true.size()) {
        throw LengthMismatch("scores and y_true differ in length");
    }
    std::size_t n_pos = 0;
    for (ClassLabel label : y_true) {
        if (label == ClassLabel::kFullyPaid) ++n_pos;
    }
    const std::size_t n_neg = y_true.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw OneClassOnly("ROC requires both classes in y_true");
    }
    for (double s : scores) {
        if (!std::isfinite(s)) throw ParseError("non-finite score passed to roc_auc");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    RocResult result;
    result.curve.points.emplace_back(0.0, 0.0);
    double auc = 0.0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    double prev_fpr = 0.0;
    double prev_tpr = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double score = scores[order[i]];
        while (i < order.size() && scores[order[i]] == score) {
            if (y_true[order[i]] == ClassLabel::kFullyPaid) ++tp;
            else ++fp;
            ++i;
        }
        const double tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double fpr = static_cast<double>(fp) / static_cast<double>(n_neg);
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        result.curve.points.emplace_back(fpr, tpr);
        prev_fpr = fpr;
        prev_tpr = tpr;
    }
    result.auc = auc;
    return result;
}

// The report measures for one evaluated run.
struct MetricsReport {
    double accuracy = 0.0;
    double auc = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double fp_rate = 0.0;
    double g_mean = 0.0;
};

inline MetricsReport evaluate_scores(std::span<const ClassLabel> y_true,
                                     std::span<const double> scores,
                                     double threshold = 0.5) {
    if (y_true.size() != scores.size()) {
        throw LengthMismatch("y_true and scores differ in length");
    }
    std::vector<ClassLabel> predicted(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        predicted[i] = scores[i] >= threshold ? ClassLabel::kFullyPaid : ClassLabel::kDefault;
    }
    const ConfusionMatrix cm = confusion(y_true, predicted);
    const BasicRates rates = basic_rates(cm);
    MetricsReport report;
    report.accuracy = rates.accuracy;
    report.sensitivity = rates.sensitivity;
    report.specificity = rates.specificity;
    report.fp_rate = rates.fp_rate;
    report.g_mean = g_mean(rates.sensitivity, rates.specificity);
    report.auc = roc_auc(scores, y_true).auc;
    return report;
}

// One CSV data row in the report column order, 3-decimal presentation.
inline std::string metrics_csv_row(const std::string& classifier_name,
                                   const MetricsReport& report) {
    char buffer[160];
    std::snprintf(buffer, sizeof(buffer), "%.3f,%.3f,%.3f,%.3f,%.3f,%.3f",
                  report.accuracy, report.auc, report.sensitivity,
                  report.specificity, report.fp_rate, report.g_mean);
    return classifier_name + "," + buffer;
}

inline const char* metrics_csv_header() {
    return "Classifier,Accuracy,AUC,Sensitivity,Specificity,FP-Rate,G-mean";
}

} // namespace creditrisk
