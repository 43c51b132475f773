#pragma once

#include <cstdint>
#include <vector>

#include "fraudtree/dataset.hpp"
#include "fraudtree/ssrf.hpp"
#include "fraudtree/tree.hpp"

namespace fraudtree {

enum class LossKind { squared, logistic };

double loss_value(LossKind kind, double y, double score, double pos_weight = 1.0);
double sigmoid(double z);

struct GbmConfig {
    int n_stages = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
    int min_samples_leaf = 1;
    double min_gain = 1e-7;
    double subsample = 1.0;
    double pos_weight = 1.0;  // gradient scale for the positive class
    LossKind loss = LossKind::logistic;
    std::uint64_t seed = 0;
};

struct GbmModel {
    double base_score = 0.0;
    std::vector<TreePtr> stages;
    double learning_rate = 0.1;
    LossKind loss = LossKind::logistic;
    std::vector<double> loss_trace;          // mean training loss after each stage
    std::vector<double> feature_importance;  // normalized impurity gains, sums to 1
    std::size_t n_features = 0;
};

// argmin_c sum L(y_i, c): mean for squared loss, log-odds of the clamped
// positive fraction for logistic.
double init_base_score(const std::vector<double>& targets, LossKind loss);

std::vector<double> negative_gradient(const std::vector<double>& targets,
                                      const std::vector<double>& scores, LossKind loss,
                                      double pos_weight = 1.0);

// Seed streams for stage subsampling and stage-tree construction. Shared with
// the embedded hybrid so a 1-tree-per-stage forest matches plain GBM exactly.
std::uint64_t gbm_stage_seed(std::uint64_t seed, int stage);
std::uint64_t gbm_stage_tree_seed(std::uint64_t seed, int stage, int tree);
std::vector<int> gbm_stage_rows(const std::vector<int>& rows, double subsample,
                                std::uint64_t seed, int stage);

// Regression tree on the stage residuals over a seeded subsample of rows.
// residuals is indexed by dataset row id.
TreePtr fit_stage(const Dataset& ds, const std::vector<int>& rows,
                  const std::vector<double>& residuals, const GbmConfig& cfg, int stage);

void update_model(std::vector<double>& scores, const std::vector<double>& stage_pred, double eta);

GbmModel fit_gbm(const Dataset& ds, const std::vector<int>& rows,
                 const std::vector<double>& targets, const GbmConfig& cfg);

// Raw additive score gamma + eta * sum of stage trees.
double predict_gbm_score(const GbmModel& model, std::span<const double> x);

// sigmoid(score) for logistic loss, raw score otherwise.
double predict_gbm_proba(const GbmModel& model, std::span<const double> x);

std::vector<double> predict_gbm_proba_many(const GbmModel& model, const Dataset& ds,
                                           Execution exec = Execution::parallel);

}  // namespace fraudtree
