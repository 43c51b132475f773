#include "fraudtree/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "fraudtree/errors.hpp"

namespace fraudtree {

ConfusionCounts confusion(const std::vector<double>& labels, const std::vector<double>& probs,
                          double threshold) {
    if (labels.size() != probs.size()) throw ValidationError("confusion: length mismatch");
    if (labels.empty()) throw ValidationError("confusion: empty input");
    ConfusionCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        bool pred = probs[i] > threshold;
        bool actual = labels[i] == 1.0;
        if (pred && actual)
            c.tp++;
        else if (pred && !actual)
            c.fp++;
        else if (!pred && actual)
            c.fn++;
        else
            c.tn++;
    }
    return c;
}

double accuracy(const ConfusionCounts& c) {
    double n = static_cast<double>(c.tp + c.fp + c.fn + c.tn);
    return static_cast<double>(c.tp + c.tn) / n;
}

std::optional<double> precision(const ConfusionCounts& c) {
    if (c.tp + c.fp == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

std::optional<double> recall(const ConfusionCounts& c) {
    if (c.tp + c.fn == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

std::optional<double> f1_score(const ConfusionCounts& c) {
    auto p = precision(c);
    auto r = recall(c);
    if (!p || !r) return std::nullopt;
    if (*p + *r == 0) return 0.0;
    return 2.0 * (*p) * (*r) / (*p + *r);
}

double auc_roc(const std::vector<double>& labels, const std::vector<double>& probs) {
    if (labels.size() != probs.size()) throw ValidationError("auc_roc: length mismatch");
    std::int64_t n_pos = 0, n_neg = 0;
    for (double y : labels) (y == 1.0 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0) throw ValidationError("auc_roc: needs both classes");

    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });

    // midranks over tie groups, sum positive ranks
    double pos_rank_sum = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && probs[order[j]] == probs[order[i]]) ++j;
        double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1.0) pos_rank_sum += midrank;
        i = j;
    }
    double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

MetricsReport build_report(const std::vector<double>& labels, const std::vector<double>& probs,
                           double threshold) {
    MetricsReport rep;
    rep.threshold = threshold;
    rep.confusion = confusion(labels, probs, threshold);
    rep.accuracy = accuracy(rep.confusion);
    rep.precision = precision(rep.confusion);
    rep.recall = recall(rep.confusion);
    rep.f1 = f1_score(rep.confusion);
    rep.n_pos = rep.confusion.tp + rep.confusion.fn;
    rep.n_neg = rep.confusion.fp + rep.confusion.tn;
    if (rep.n_pos > 0 && rep.n_neg > 0) rep.auc_roc = auc_roc(labels, probs);
    return rep;
}

}  // namespace fraudtree
