#include "fraudtree/hybrid.hpp"

#include <algorithm>
#include <cmath>

#include "fraudtree/errors.hpp"
#include "fraudtree/metrics.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fraudtree {

namespace {

// F1 at a threshold, -1 when undefined (no predicted positives).
double f1_at(const std::vector<double>& probs, const std::vector<double>& labels, double t) {
    auto f1 = f1_score(confusion(labels, probs, t));
    return f1 ? *f1 : -1.0;
}

double log_loss(const std::vector<double>& probs, const std::vector<double>& labels) {
    double sum = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        double p = std::clamp(probs[i], 1e-12, 1.0 - 1e-12);
        sum += labels[i] == 1.0 ? -std::log(p) : -std::log(1.0 - p);
    }
    return sum / static_cast<double>(probs.size());
}

std::vector<double> gather(const std::vector<double>& full, const std::vector<int>& idx) {
    std::vector<double> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(full[static_cast<std::size_t>(i)]);
    return out;
}

std::vector<double> normalize_or_uniform(std::vector<double> v) {
    double total = 0;
    for (double x : v) total += x;
    if (total <= 0) {
        for (double& x : v) x = 1.0 / static_cast<double>(v.size());
    } else {
        for (double& x : v) x /= total;
    }
    return v;
}

std::vector<int> bootstrap_rows(const std::vector<int>& rows, Rng& rng) {
    std::vector<int> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = rows[rng.below(rows.size())];
    return out;
}

double resolve_threshold_or_default(const HybridConfig& cfg, const std::vector<double>& valid_probs,
                                    const std::vector<double>& valid_labels) {
    if (cfg.threshold >= 0) {
        if (cfg.threshold <= 0 || cfg.threshold >= 1)
            throw ValidationError("threshold must lie in (0,1)");
        return cfg.threshold;
    }
    if (cfg.policy == ThresholdPolicy::fixed_half) return 0.5;
    if (valid_probs.empty())
        throw ValidationError("threshold=auto requires a nonempty validation split");
    return resolve_threshold(valid_probs, valid_labels, cfg.policy);
}

void fit_embedded(const Dataset& ds, const std::vector<int>& rows, HybridModel& model,
                  const HybridConfig& cfg, Execution exec) {
    const GbmConfig& g = model.config.gbm;
    const SsrfConfig& s = cfg.ssrf;
    const int forest_size = std::max(1, s.n_trees);

    std::vector<double> train_targets;
    train_targets.reserve(rows.size());
    for (int r : rows) train_targets.push_back(ds.labels[static_cast<std::size_t>(r)]);

    model.gbm.base_score = init_base_score(train_targets, g.loss);
    model.gbm.learning_rate = g.learning_rate;
    model.gbm.loss = g.loss;
    model.gbm.n_features = ds.n_cols;

    int k = s.features_per_split;
    if (k <= 0) k = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(ds.n_cols))));
    if (k > static_cast<int>(ds.n_cols)) k = static_cast<int>(ds.n_cols);

    TreeConfig tc;
    tc.max_depth = s.max_depth;
    tc.min_samples_leaf = s.min_samples_leaf;
    tc.criterion = Criterion::mse;
    tc.min_gain = s.min_gain;

    std::vector<double> scores(ds.n_rows, 0.0);
    for (int r : rows) scores[static_cast<std::size_t>(r)] = model.gbm.base_score;

    for (int m = 0; m < g.n_stages; ++m) {
        std::vector<double> residuals(ds.n_rows, 0.0);
        for (int r : rows) {
            auto i = static_cast<std::size_t>(r);
            double w = (ds.labels[i] == 1.0) ? g.pos_weight : 1.0;
            if (g.loss == LossKind::squared)
                residuals[i] = w * (ds.labels[i] - scores[i]);
            else
                residuals[i] = w * (ds.labels[i] - sigmoid(scores[i]));
        }

        auto stage_rows = gbm_stage_rows(rows, g.subsample, g.seed, m);
        std::vector<TreePtr> forest(static_cast<std::size_t>(forest_size));
        const auto fit_one = [&](int t) {
            Rng rng(gbm_stage_tree_seed(g.seed, m, t));
            // a 1-tree stage is exactly the plain GBM weak learner; larger
            // forests bag the stage rows per tree
            std::vector<int> tree_rows =
                forest_size > 1 ? bootstrap_rows(stage_rows, rng) : stage_rows;
            FeatureSampler sampler = [&](Rng& r) {
                return sample_without_replacement(static_cast<int>(ds.n_cols), k, r);
            };
            forest[static_cast<std::size_t>(t)] =
                build_tree(ds, tree_rows, residuals, tc, sampler, rng);
        };
        if (exec == Execution::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
            for (int t = 0; t < forest_size; ++t) fit_one(t);
        } else {
            for (int t = 0; t < forest_size; ++t) fit_one(t);
        }

        for (int r : rows) {
            auto i = static_cast<std::size_t>(r);
            double sum = 0;
            for (const auto& t : forest) sum += predict_tree(*t, ds.row(i));
            scores[i] += g.learning_rate * sum / static_cast<double>(forest.size());
        }
        model.stage_forests.push_back(std::move(forest));

        double loss_sum = 0;
        for (int r : rows) {
            auto i = static_cast<std::size_t>(r);
            loss_sum += loss_value(g.loss, ds.labels[i], scores[i], g.pos_weight);
        }
        model.gbm.loss_trace.push_back(loss_sum / static_cast<double>(rows.size()));
    }

    std::vector<double> acc(ds.n_cols, 0.0);
    for (const auto& forest : model.stage_forests)
        for (const auto& t : forest) accumulate_importance(*t, acc);
    model.importance = normalize_or_uniform(std::move(acc));
}

}  // namespace

double resolve_blend_weight(const std::vector<double>& gbm_probs,
                            const std::vector<double>& ssrf_probs,
                            const std::vector<double>& labels) {
    if (gbm_probs.empty() || gbm_probs.size() != ssrf_probs.size() ||
        gbm_probs.size() != labels.size())
        throw ValidationError("resolve_blend_weight: misaligned inputs");

    double best_alpha = 0.5;
    double best_loss = 0;
    bool have = false;
    std::vector<double> mix(gbm_probs.size());
    for (int i = 0; i <= 20; ++i) {
        double a = static_cast<double>(i) * 0.05;
        for (std::size_t j = 0; j < mix.size(); ++j)
            mix[j] = (1.0 - a) * gbm_probs[j] + a * ssrf_probs[j];
        double loss = log_loss(mix, labels);
        if (!have || loss < best_loss ||
            (loss == best_loss && std::abs(a - 0.5) < std::abs(best_alpha - 0.5))) {
            best_loss = loss;
            best_alpha = a;
            have = true;
        }
    }
    return best_alpha;
}

double resolve_threshold(const std::vector<double>& probs, const std::vector<double>& labels,
                         ThresholdPolicy policy) {
    if (policy == ThresholdPolicy::fixed_half) return 0.5;
    if (probs.empty() || probs.size() != labels.size())
        throw ValidationError("resolve_threshold: misaligned inputs");

    bool any_pos = false, any_neg = false;
    for (double y : labels) (y == 1.0 ? any_pos : any_neg) = true;
    if (!any_pos || !any_neg)
        throw ValidationError("resolve_threshold: max_f1 needs both classes in validation");

    std::vector<double> sorted = probs;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    double best_t = 0.5;
    double best_f1 = -1.0;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        double t = 0.5 * (sorted[i] + sorted[i + 1]);
        double f1 = f1_at(probs, labels, t);
        if (f1 < 0) continue;
        if (f1 >= best_f1) {  // ties toward the larger threshold
            best_f1 = f1;
            best_t = t;
        }
    }
    if (best_f1 < 0) return 0.5;  // all probs identical
    return best_t;
}

HybridModel fit_hybrid(const Dataset& ds, const SplitAssignment& split, const HybridConfig& cfg,
                       Execution exec) {
    if (split.train_idx.empty()) throw ValidationError("fit_hybrid: empty training split");

    HybridModel model;
    model.mode = cfg.mode;
    model.config = cfg;
    model.n_features = ds.n_cols;
    model.config.gbm.seed = derive_seed(cfg.seed, 1);
    model.config.ssrf.seed = derive_seed(cfg.seed, 2);

    const auto& rows = split.train_idx;

    if (cfg.mode == HybridMode::blend) {
        model.gbm = fit_gbm(ds, rows, ds.labels, model.config.gbm);
        model.ssrf = fit_ssrf(ds, rows, ds.labels, model.config.ssrf, exec);

        if (cfg.alpha >= 0) {
            if (cfg.alpha > 1) throw ValidationError("alpha must lie in [0,1]");
            model.alpha = cfg.alpha;
        } else {
            if (split.valid_idx.empty())
                throw ValidationError("alpha=auto requires a nonempty validation split");
            std::vector<double> pg, ps;
            pg.reserve(split.valid_idx.size());
            ps.reserve(split.valid_idx.size());
            for (int r : split.valid_idx) {
                pg.push_back(predict_gbm_proba(model.gbm, ds.row(static_cast<std::size_t>(r))));
                ps.push_back(predict_ssrf(model.ssrf, ds.row(static_cast<std::size_t>(r))));
            }
            model.alpha = resolve_blend_weight(pg, ps, gather(ds.labels, split.valid_idx));
        }
        model.importance = merged_importance(model);
    } else {
        model.alpha = 0.0;
        fit_embedded(ds, rows, model, cfg, exec);
    }

    std::vector<double> valid_probs;
    valid_probs.reserve(split.valid_idx.size());
    for (int r : split.valid_idx)
        valid_probs.push_back(predict_hybrid(model, ds.row(static_cast<std::size_t>(r))));
    model.threshold =
        resolve_threshold_or_default(cfg, valid_probs, gather(ds.labels, split.valid_idx));
    return model;
}

double predict_hybrid(const HybridModel& model, std::span<const double> x) {
    if (x.size() != model.n_features)
        throw ValidationError("predict_hybrid: row has " + std::to_string(x.size()) +
                              " features, model expects " + std::to_string(model.n_features));

    if (model.mode == HybridMode::embedded) {
        double s = model.gbm.base_score;
        for (const auto& forest : model.stage_forests) {
            double sum = 0;
            for (const auto& t : forest) sum += predict_tree(*t, x);
            s += model.gbm.learning_rate * sum / static_cast<double>(forest.size());
        }
        return model.gbm.loss == LossKind::logistic ? sigmoid(s) : s;
    }

    double ssrf_mean = predict_ssrf(model.ssrf, x);
    if (model.config.raw_margin) {
        // literal additive reading: weighted tree outputs added to the raw margin
        double s = predict_gbm_score(model.gbm, x) + model.alpha * ssrf_mean;
        return sigmoid(s);
    }
    double pg = predict_gbm_proba(model.gbm, x);
    return (1.0 - model.alpha) * pg + model.alpha * ssrf_mean;
}

std::vector<double> predict_hybrid_many(const HybridModel& model, const Dataset& ds,
                                        Execution exec) {
    std::vector<double> out(ds.n_rows);
    if (exec == Execution::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long r = 0; r < static_cast<long long>(ds.n_rows); ++r)
            out[static_cast<std::size_t>(r)] =
                predict_hybrid(model, ds.row(static_cast<std::size_t>(r)));
    } else {
        for (std::size_t r = 0; r < ds.n_rows; ++r) out[r] = predict_hybrid(model, ds.row(r));
    }
    return out;
}

std::vector<double> merged_importance(const HybridModel& model) {
    if (model.mode == HybridMode::embedded) return model.importance;
    std::vector<double> out(model.n_features);
    for (std::size_t j = 0; j < model.n_features; ++j)
        out[j] = (1.0 - model.alpha) * model.gbm.feature_importance[j] +
                 model.alpha * model.ssrf.feature_importance[j];
    return out;
}

}  // namespace fraudtree
