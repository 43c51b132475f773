#pragma once

#include <cstdint>
#include <vector>

#include "fraudtree/dataset.hpp"
#include "fraudtree/gbm.hpp"
#include "fraudtree/ssrf.hpp"

namespace fraudtree {

enum class HybridMode { blend, embedded };
enum class ThresholdPolicy { fixed_half, max_f1 };

struct HybridConfig {
    HybridMode mode = HybridMode::blend;
    GbmConfig gbm;
    SsrfConfig ssrf;
    double alpha = -1.0;      // SSRF weight in [0,1]; negative = resolve on validation
    double threshold = -1.0;  // negative = resolve via policy
    ThresholdPolicy policy = ThresholdPolicy::max_f1;
    bool raw_margin = false;  // add weighted tree outputs to the raw GBM margin
    std::uint64_t seed = 0;
};

struct HybridModel {
    HybridMode mode = HybridMode::blend;
    GbmModel gbm;    // blend: full model; embedded: base/eta/loss with empty stages
    SsrfModel ssrf;  // blend only
    std::vector<std::vector<TreePtr>> stage_forests;  // embedded only
    double alpha = 0.5;
    double threshold = 0.5;
    std::vector<double> importance;  // merged, sums to 1
    HybridConfig config;
    std::size_t n_features = 0;
};

// Grid {0, 0.05, ..., 1} argmin of validation log-loss of
// (1-alpha)*gbm + alpha*ssrf; ties broken toward 0.5.
double resolve_blend_weight(const std::vector<double>& gbm_probs,
                            const std::vector<double>& ssrf_probs,
                            const std::vector<double>& labels);

// fixed_half -> 0.5. max_f1 -> best midpoint between consecutive distinct
// sorted validation probs, ties toward the larger threshold.
double resolve_threshold(const std::vector<double>& probs, const std::vector<double>& labels,
                         ThresholdPolicy policy);

HybridModel fit_hybrid(const Dataset& ds, const SplitAssignment& split, const HybridConfig& cfg,
                       Execution exec = Execution::parallel);

double predict_hybrid(const HybridModel& model, std::span<const double> x);

std::vector<double> predict_hybrid_many(const HybridModel& model, const Dataset& ds,
                                        Execution exec = Execution::parallel);

std::vector<double> merged_importance(const HybridModel& model);

}  // namespace fraudtree
