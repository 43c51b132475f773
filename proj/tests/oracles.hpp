// Independent reference routines used only by tests. Deliberately naive:
// direct enumeration and O(n^2) pair counting, no shared code with the
// library's split search or AUC implementations.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "fraudtree/dataset.hpp"
#include "fraudtree/tree.hpp"

namespace oracles {

inline double group_impurity(fraudtree::Criterion crit, const std::vector<double>& vals) {
    double n = static_cast<double>(vals.size());
    double mean = 0;
    for (double v : vals) mean += v;
    mean /= n;
    if (crit == fraudtree::Criterion::gini) return 2.0 * mean * (1.0 - mean);
    double var = 0;
    for (double v : vals) var += (v - mean) * (v - mean);
    return var / n;
}

inline std::optional<fraudtree::SplitCandidate> brute_force_best_split(
    const fraudtree::Dataset& ds, const std::vector<int>& rows,
    const std::vector<double>& targets, const std::vector<int>& features,
    const fraudtree::TreeConfig& cfg) {
    std::vector<double> parent_vals;
    for (int r : rows) parent_vals.push_back(targets[static_cast<std::size_t>(r)]);
    double parent = group_impurity(cfg.criterion, parent_vals);
    double n = static_cast<double>(rows.size());

    std::vector<int> feats = features;
    std::sort(feats.begin(), feats.end());
    feats.erase(std::unique(feats.begin(), feats.end()), feats.end());

    std::optional<fraudtree::SplitCandidate> best;
    for (int f : feats) {
        std::vector<double> vals;
        for (int r : rows)
            vals.push_back(ds.value(static_cast<std::size_t>(r), static_cast<std::size_t>(f)));
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            double thr = vals[i] + 0.5 * (vals[i + 1] - vals[i]);
            std::vector<double> lt, rt;
            for (int r : rows) {
                double v = ds.value(static_cast<std::size_t>(r), static_cast<std::size_t>(f));
                (v <= thr ? lt : rt).push_back(targets[static_cast<std::size_t>(r)]);
            }
            if (static_cast<int>(lt.size()) < cfg.min_samples_leaf ||
                static_cast<int>(rt.size()) < cfg.min_samples_leaf)
                continue;
            double gain = parent -
                          (static_cast<double>(lt.size()) / n) * group_impurity(cfg.criterion, lt) -
                          (static_cast<double>(rt.size()) / n) * group_impurity(cfg.criterion, rt);
            if (gain <= cfg.min_gain) continue;
            // mirror the library's 1e-12 tie window so rounding cannot flip
            // which of two mathematically tied splits wins
            bool better = best && gain > best->gain + 1e-12;
            bool tied = best && !better && gain > best->gain - 1e-12;
            if (!best || better ||
                (tied && (f < best->feature || (f == best->feature && thr < best->threshold)))) {
                best = fraudtree::SplitCandidate{f, thr, gain, static_cast<int>(lt.size()),
                                                 static_cast<int>(rt.size())};
            }
        }
    }
    return best;
}

// All-pairs Mann-Whitney statistic, ties 0.5.
inline double allpairs_auc(const std::vector<double>& labels, const std::vector<double>& probs) {
    double wins = 0;
    long long pairs = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 1.0) continue;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j] != 0.0) continue;
            ++pairs;
            if (probs[i] > probs[j])
                wins += 1.0;
            else if (probs[i] == probs[j])
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

// 1-D golden-section minimization of sum_i L(y_i, c).
template <typename LossFn>
inline double minimize_scalar(const LossFn& f, double lo, double hi, int iters = 200) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace oracles
