#include "fraudtree/tree.hpp"

#include <algorithm>
#include <cmath>

#include "fraudtree/errors.hpp"

namespace fraudtree {

namespace {

// Gains closer than this are treated as tied, so the deterministic
// lowest-feature / lowest-threshold rule is not defeated by rounding.
constexpr double kSplitTieEps = 1e-12;

// Impurity from the sufficient statistics of a group. For gini the targets
// are 0/1 labels, so sum is the positive count: 1 - p^2 - (1-p)^2 = 2p(1-p).
double impurity(Criterion crit, double sum, double sumsq, double n) {
    double mean = sum / n;
    if (crit == Criterion::gini) return 2.0 * mean * (1.0 - mean);
    double var = sumsq / n - mean * mean;
    return var > 0 ? var : 0.0;
}

double leaf_value(const std::vector<int>& rows, const std::vector<double>& targets) {
    double s = 0;
    for (int r : rows) s += targets[static_cast<std::size_t>(r)];
    return s / static_cast<double>(rows.size());
}

TreePtr build_node(const Dataset& ds, const std::vector<int>& rows,
                   const std::vector<double>& targets, const TreeConfig& cfg,
                   const FeatureSampler& sampler, Rng& rng, int depth, double root_n) {
    auto node = std::make_unique<TreeNode>();
    node->value = leaf_value(rows, targets);

    if (depth >= cfg.max_depth ||
        rows.size() < 2 * static_cast<std::size_t>(cfg.min_samples_leaf))
        return node;

    auto features = sampler(rng);
    auto cand = best_split(ds, rows, targets, features, cfg);
    if (!cand) return node;

    std::vector<int> left_rows, right_rows;
    left_rows.reserve(static_cast<std::size_t>(cand->left_count));
    right_rows.reserve(static_cast<std::size_t>(cand->right_count));
    for (int r : rows) {
        if (ds.value(static_cast<std::size_t>(r), static_cast<std::size_t>(cand->feature)) <=
            cand->threshold)
            left_rows.push_back(r);
        else
            right_rows.push_back(r);
    }

    node->feature = cand->feature;
    node->threshold = cand->threshold;
    node->gain = cand->gain;
    node->sample_frac = static_cast<double>(rows.size()) / root_n;
    node->left = build_node(ds, left_rows, targets, cfg, sampler, rng, depth + 1, root_n);
    node->right = build_node(ds, right_rows, targets, cfg, sampler, rng, depth + 1, root_n);
    return node;
}

}  // namespace

FeatureSampler all_features_sampler(int n_features) {
    std::vector<int> all(static_cast<std::size_t>(n_features));
    for (int i = 0; i < n_features; ++i) all[static_cast<std::size_t>(i)] = i;
    return [all](Rng&) { return all; };
}

std::optional<SplitCandidate> best_split(const Dataset& ds, const std::vector<int>& rows,
                                         const std::vector<double>& targets,
                                         const std::vector<int>& candidate_features,
                                         const TreeConfig& cfg) {
    if (rows.empty()) throw ValidationError("best_split: empty row set");
    if (candidate_features.empty()) throw ValidationError("best_split: no candidate features");

    const double n = static_cast<double>(rows.size());
    double tsum = 0, tsumsq = 0;
    for (int r : rows) {
        double t = targets[static_cast<std::size_t>(r)];
        tsum += t;
        tsumsq += t * t;
    }
    const double parent = impurity(cfg.criterion, tsum, tsumsq, n);

    std::vector<int> feats = candidate_features;
    std::sort(feats.begin(), feats.end());
    feats.erase(std::unique(feats.begin(), feats.end()), feats.end());

    std::optional<SplitCandidate> best;
    std::vector<std::pair<double, double>> vt;  // (value, target)
    vt.reserve(rows.size());

    for (int f : feats) {
        vt.clear();
        for (int r : rows)
            vt.emplace_back(ds.value(static_cast<std::size_t>(r), static_cast<std::size_t>(f)),
                            targets[static_cast<std::size_t>(r)]);
        std::sort(vt.begin(), vt.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        double lsum = 0, lsumsq = 0;
        for (std::size_t i = 0; i + 1 < vt.size(); ++i) {
            lsum += vt[i].second;
            lsumsq += vt[i].second * vt[i].second;
            if (vt[i].first == vt[i + 1].first) continue;
            int nl = static_cast<int>(i) + 1;
            int nr = static_cast<int>(vt.size()) - nl;
            if (nl < cfg.min_samples_leaf || nr < cfg.min_samples_leaf) continue;

            double thr = vt[i].first + 0.5 * (vt[i + 1].first - vt[i].first);
            double il = impurity(cfg.criterion, lsum, lsumsq, nl);
            double ir = impurity(cfg.criterion, tsum - lsum, tsumsq - lsumsq, nr);
            double gain = parent - (nl / n) * il - (nr / n) * ir;
            if (gain <= cfg.min_gain) continue;

            bool better = best && gain > best->gain + kSplitTieEps;
            bool tied = best && !better && gain > best->gain - kSplitTieEps;
            if (!best || better ||
                (tied && (f < best->feature || (f == best->feature && thr < best->threshold)))) {
                best = SplitCandidate{f, thr, gain, nl, nr};
            }
        }
    }
    return best;
}

TreePtr build_tree(const Dataset& ds, const std::vector<int>& rows,
                   const std::vector<double>& targets, const TreeConfig& cfg,
                   const FeatureSampler& sampler, Rng& rng) {
    if (rows.empty()) throw ValidationError("build_tree: empty row set");
    if (cfg.max_depth < 1) throw ValidationError("build_tree: max_depth must be >= 1");
    return build_node(ds, rows, targets, cfg, sampler, rng, 0,
                      static_cast<double>(rows.size()));
}

double predict_tree(const TreeNode& node, std::span<const double> x) {
    const TreeNode* cur = &node;
    while (!cur->is_leaf()) {
        if (static_cast<std::size_t>(cur->feature) >= x.size())
            throw ValidationError("predict_tree: feature index " + std::to_string(cur->feature) +
                                  " out of bounds for row of size " + std::to_string(x.size()));
        cur = (x[static_cast<std::size_t>(cur->feature)] <= cur->threshold) ? cur->left.get()
                                                                           : cur->right.get();
    }
    return cur->value;
}

void accumulate_importance(const TreeNode& node, std::vector<double>& out) {
    if (node.is_leaf()) return;
    out[static_cast<std::size_t>(node.feature)] += node.gain * node.sample_frac;
    accumulate_importance(*node.left, out);
    accumulate_importance(*node.right, out);
}

int tree_depth(const TreeNode& node) {
    if (node.is_leaf()) return 0;
    return 1 + std::max(tree_depth(*node.left), tree_depth(*node.right));
}

TreePtr clone_tree(const TreeNode& node) {
    auto out = std::make_unique<TreeNode>();
    out->feature = node.feature;
    out->threshold = node.threshold;
    out->value = node.value;
    out->gain = node.gain;
    out->sample_frac = node.sample_frac;
    if (!node.is_leaf()) {
        out->left = clone_tree(*node.left);
        out->right = clone_tree(*node.right);
    }
    return out;
}

}  // namespace fraudtree
