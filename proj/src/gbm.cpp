#include "fraudtree/gbm.hpp"

#include <algorithm>
#include <cmath>

#include "fraudtree/errors.hpp"

namespace fraudtree {

namespace {
constexpr std::uint64_t kStageTag = 0x57A6;
constexpr std::uint64_t kStageTreeTag = 0x57EE;
constexpr double kProbClamp = 1e-6;
}  // namespace

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double loss_value(LossKind kind, double y, double score, double pos_weight) {
    double w = (y == 1.0) ? pos_weight : 1.0;
    if (kind == LossKind::squared) {
        double d = y - score;
        return w * 0.5 * d * d;
    }
    // binomial deviance, numerically stable form
    return w * (std::log1p(std::exp(-std::abs(score))) + std::max(score, 0.0) - y * score);
}

double init_base_score(const std::vector<double>& targets, LossKind loss) {
    if (targets.empty()) throw ValidationError("init_base_score: empty targets");
    double sum = 0;
    for (double t : targets) sum += t;
    double mean = sum / static_cast<double>(targets.size());
    if (loss == LossKind::squared) return mean;
    double p = std::clamp(mean, kProbClamp, 1.0 - kProbClamp);
    return std::log(p / (1.0 - p));
}

std::vector<double> negative_gradient(const std::vector<double>& targets,
                                      const std::vector<double>& scores, LossKind loss,
                                      double pos_weight) {
    if (targets.size() != scores.size())
        throw ValidationError("negative_gradient: length mismatch");
    std::vector<double> g(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        double w = (targets[i] == 1.0) ? pos_weight : 1.0;
        if (loss == LossKind::squared)
            g[i] = w * (targets[i] - scores[i]);
        else
            g[i] = w * (targets[i] - sigmoid(scores[i]));
    }
    return g;
}

std::uint64_t gbm_stage_seed(std::uint64_t seed, int stage) {
    return derive_seed(seed, kStageTag, static_cast<std::uint64_t>(stage));
}

std::uint64_t gbm_stage_tree_seed(std::uint64_t seed, int stage, int tree) {
    return derive_seed(derive_seed(seed, kStageTreeTag, static_cast<std::uint64_t>(stage)),
                       static_cast<std::uint64_t>(tree));
}

std::vector<int> gbm_stage_rows(const std::vector<int>& rows, double subsample,
                                std::uint64_t seed, int stage) {
    if (subsample >= 1.0) return rows;
    Rng rng(gbm_stage_seed(seed, stage));
    auto m = static_cast<int>(std::floor(subsample * static_cast<double>(rows.size())));
    if (m < 1) m = 1;
    auto idx = sample_without_replacement(static_cast<int>(rows.size()), m, rng);
    std::sort(idx.begin(), idx.end());
    std::vector<int> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = rows[static_cast<std::size_t>(idx[i])];
    return out;
}

TreePtr fit_stage(const Dataset& ds, const std::vector<int>& rows,
                  const std::vector<double>& residuals, const GbmConfig& cfg, int stage) {
    auto stage_rows = gbm_stage_rows(rows, cfg.subsample, cfg.seed, stage);

    TreeConfig tc;
    tc.max_depth = cfg.max_depth;
    tc.min_samples_leaf = cfg.min_samples_leaf;
    tc.criterion = Criterion::mse;
    tc.min_gain = cfg.min_gain;

    const int d = static_cast<int>(ds.n_cols);
    Rng rng(gbm_stage_tree_seed(cfg.seed, stage, 0));
    FeatureSampler sampler = [d](Rng& r) { return sample_without_replacement(d, d, r); };
    return build_tree(ds, stage_rows, residuals, tc, sampler, rng);
}

void update_model(std::vector<double>& scores, const std::vector<double>& stage_pred, double eta) {
    if (scores.size() != stage_pred.size()) throw ValidationError("update_model: length mismatch");
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] += eta * stage_pred[i];
}

GbmModel fit_gbm(const Dataset& ds, const std::vector<int>& rows,
                 const std::vector<double>& targets, const GbmConfig& cfg) {
    if (rows.empty()) throw ValidationError("fit_gbm: empty row set");
    if (cfg.n_stages < 1) throw ValidationError("fit_gbm: n_stages must be >= 1");
    if (cfg.learning_rate < 0 || cfg.learning_rate > 1)
        throw ValidationError("fit_gbm: learning_rate must be in [0,1]");

    std::vector<double> train_targets;
    train_targets.reserve(rows.size());
    for (int r : rows) train_targets.push_back(targets[static_cast<std::size_t>(r)]);

    GbmModel model;
    model.learning_rate = cfg.learning_rate;
    model.loss = cfg.loss;
    model.n_features = ds.n_cols;
    model.base_score = init_base_score(train_targets, cfg.loss);
    model.stages.reserve(static_cast<std::size_t>(cfg.n_stages));

    // scores and residuals are indexed by dataset row id
    std::vector<double> scores(ds.n_rows, 0.0);
    for (int r : rows) scores[static_cast<std::size_t>(r)] = model.base_score;

    for (int m = 0; m < cfg.n_stages; ++m) {
        std::vector<double> residuals(ds.n_rows, 0.0);
        for (int r : rows) {
            auto i = static_cast<std::size_t>(r);
            double w = (targets[i] == 1.0) ? cfg.pos_weight : 1.0;
            if (cfg.loss == LossKind::squared)
                residuals[i] = w * (targets[i] - scores[i]);
            else
                residuals[i] = w * (targets[i] - sigmoid(scores[i]));
        }

        auto tree = fit_stage(ds, rows, residuals, cfg, m);
        for (int r : rows) {
            auto i = static_cast<std::size_t>(r);
            scores[i] += cfg.learning_rate * predict_tree(*tree, ds.row(i));
        }
        model.stages.push_back(std::move(tree));

        double loss_sum = 0;
        for (int r : rows) {
            auto i = static_cast<std::size_t>(r);
            loss_sum += loss_value(cfg.loss, targets[i], scores[i], cfg.pos_weight);
        }
        model.loss_trace.push_back(loss_sum / static_cast<double>(rows.size()));
    }

    std::vector<double> acc(ds.n_cols, 0.0);
    for (const auto& t : model.stages) accumulate_importance(*t, acc);
    double total = 0;
    for (double x : acc) total += x;
    if (total <= 0) {
        for (double& x : acc) x = 1.0 / static_cast<double>(acc.size());
    } else {
        for (double& x : acc) x /= total;
    }
    model.feature_importance = std::move(acc);
    return model;
}

double predict_gbm_score(const GbmModel& model, std::span<const double> x) {
    if (x.size() != model.n_features)
        throw ValidationError("predict_gbm: row has " + std::to_string(x.size()) +
                              " features, model expects " + std::to_string(model.n_features));
    double s = model.base_score;
    for (const auto& t : model.stages) s += model.learning_rate * predict_tree(*t, x);
    return s;
}

double predict_gbm_proba(const GbmModel& model, std::span<const double> x) {
    double s = predict_gbm_score(model, x);
    return model.loss == LossKind::logistic ? sigmoid(s) : s;
}

std::vector<double> predict_gbm_proba_many(const GbmModel& model, const Dataset& ds,
                                           Execution exec) {
    std::vector<double> out(ds.n_rows);
    if (exec == Execution::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long r = 0; r < static_cast<long long>(ds.n_rows); ++r)
            out[static_cast<std::size_t>(r)] =
                predict_gbm_proba(model, ds.row(static_cast<std::size_t>(r)));
    } else {
        for (std::size_t r = 0; r < ds.n_rows; ++r) out[r] = predict_gbm_proba(model, ds.row(r));
    }
    return out;
}

}  // namespace fraudtree
