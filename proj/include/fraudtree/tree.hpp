#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fraudtree/dataset.hpp"
#include "fraudtree/rng.hpp"

namespace fraudtree {

enum class Criterion { gini, mse };

struct TreeNode;
using TreePtr = std::unique_ptr<TreeNode>;

// Binary CART node. feature < 0 marks a leaf. Split nodes keep their gain and
// the fraction of training rows that reached them, for impurity-gain feature
// importance.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    TreePtr left;
    TreePtr right;
    double value = 0.0;        // leaf only
    double gain = 0.0;         // split only
    double sample_frac = 0.0;  // split only: rows here / rows at root

    bool is_leaf() const { return feature < 0; }
};

struct TreeConfig {
    int max_depth = 6;
    int min_samples_leaf = 1;
    Criterion criterion = Criterion::gini;
    double min_gain = 1e-7;
};

struct SplitCandidate {
    int feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
    int left_count = 0;
    int right_count = 0;
};

// Returns per-split candidate feature indices. Called once per node, in DFS
// order, with the tree's own rng.
using FeatureSampler = std::function<std::vector<int>(Rng&)>;

FeatureSampler all_features_sampler(int n_features);

// Exhaustive midpoint search over candidate_features. Gain is the impurity
// decrease (gini) or variance reduction (mse) of the node. Ties go to the
// lowest feature index, then the lowest threshold. Empty optional when no
// split beats cfg.min_gain under the min_samples_leaf constraint.
std::optional<SplitCandidate> best_split(const Dataset& ds, const std::vector<int>& rows,
                                         const std::vector<double>& targets,
                                         const std::vector<int>& candidate_features,
                                         const TreeConfig& cfg);

TreePtr build_tree(const Dataset& ds, const std::vector<int>& rows,
                   const std::vector<double>& targets, const TreeConfig& cfg,
                   const FeatureSampler& sampler, Rng& rng);

double predict_tree(const TreeNode& node, std::span<const double> x);

// Adds gain * sample_frac of every split node into out[feature].
void accumulate_importance(const TreeNode& node, std::vector<double>& out);

int tree_depth(const TreeNode& node);

TreePtr clone_tree(const TreeNode& node);

}  // namespace fraudtree
