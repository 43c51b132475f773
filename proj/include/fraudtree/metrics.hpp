#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace fraudtree {

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;
};

struct MetricsReport {
    ConfusionCounts confusion;
    double accuracy = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::optional<double> auc_roc;  // absent for one-class inputs
    double threshold = 0.5;
    std::int64_t n_pos = 0;
    std::int64_t n_neg = 0;
};

// Predict positive iff prob > threshold (strict).
ConfusionCounts confusion(const std::vector<double>& labels, const std::vector<double>& probs,
                          double threshold);

double accuracy(const ConfusionCounts& c);
std::optional<double> precision(const ConfusionCounts& c);
std::optional<double> recall(const ConfusionCounts& c);
std::optional<double> f1_score(const ConfusionCounts& c);

// Mann-Whitney statistic via midranks: P(pos scores above neg), ties 0.5.
// Throws on one-class input.
double auc_roc(const std::vector<double>& labels, const std::vector<double>& probs);

MetricsReport build_report(const std::vector<double>& labels, const std::vector<double>& probs,
                           double threshold);

}  // namespace fraudtree
