#pragma once

#include <cstdint>
#include <vector>

#include "fraudtree/dataset.hpp"
#include "fraudtree/tree.hpp"

namespace fraudtree {

enum class Execution { serial, parallel };

struct SsrfConfig {
    int n_trees = 100;
    int max_depth = 6;
    int min_samples_leaf = 5;
    int features_per_split = 0;  // 0 -> ceil(sqrt(n_features))
    int pilot_trees = 10;
    double importance_blend = 0.5;  // beta: 0 = plain RF sampling, 1 = importance only
    std::uint64_t seed = 0;
    Criterion criterion = Criterion::gini;
    double min_gain = 1e-7;
    bool bootstrap = true;   // test hook
    bool hard_vote = false;  // aggregate hard class votes instead of probabilities
    bool keep_subsets = false;
};

struct SsrfModel {
    std::vector<TreePtr> trees;
    std::vector<std::vector<int>> row_subsets;  // per-tree bootstrap rows, when kept
    std::vector<double> pilot_importance;       // drives per-split feature sampling
    std::vector<double> feature_importance;     // accumulated over the fitted forest, sums to 1
    SsrfConfig config;
    std::size_t n_features = 0;
};

// Pilot forest importance: plain uniform-sampling trees, impurity gains
// summed and normalized. Uniform vector when pilot_trees = 0 or no split
// carried gain.
std::vector<double> fit_pilot_importance(const Dataset& ds, const std::vector<int>& rows,
                                         const std::vector<double>& targets,
                                         const SsrfConfig& cfg);

// k distinct feature indices, weights (1-beta)/d + beta*importance[j].
// beta = 0 takes the exact uniform path shared with the plain-RF fit.
std::vector<int> sample_features(const std::vector<double>& importance, int k, double beta,
                                 Rng& rng);

SsrfModel fit_ssrf(const Dataset& ds, const std::vector<int>& rows,
                   const std::vector<double>& targets, const SsrfConfig& cfg,
                   Execution exec = Execution::parallel);

// Plain random forest: uniform feature sampling, no pilot. Kept as its own
// code path; fit_ssrf with beta=0 and pilot_trees=0 must produce the
// identical model under a shared seed.
SsrfModel fit_plain_rf(const Dataset& ds, const std::vector<int>& rows,
                       const std::vector<double>& targets, const SsrfConfig& cfg,
                       Execution exec = Execution::parallel);

double predict_ssrf(const SsrfModel& model, std::span<const double> x);

std::vector<double> predict_ssrf_many(const SsrfModel& model, const Dataset& ds,
                                      Execution exec = Execution::parallel);

}  // namespace fraudtree
