#include "fraudtree/ssrf.hpp"

#include <cmath>

#include "fraudtree/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fraudtree {

namespace {

constexpr std::uint64_t kPilotTag = 0xA110;
constexpr std::uint64_t kTreeTag = 0xB007;

int resolve_k(const SsrfConfig& cfg, std::size_t d) {
    int k = cfg.features_per_split;
    if (k <= 0) k = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
    if (k > static_cast<int>(d)) k = static_cast<int>(d);
    return k;
}

std::vector<int> bootstrap_rows(const std::vector<int>& rows, Rng& rng) {
    std::vector<int> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out[i] = rows[rng.below(rows.size())];
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

// One tree per m with its own pre-derived seed; slot writes keep the result
// independent of scheduling.
template <typename FitOne>
void run_trees(int n_trees, Execution exec, const FitOne& fit_one) {
    if (exec == Execution::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (int m = 0; m < n_trees; ++m) fit_one(m);
    } else {
        for (int m = 0; m < n_trees; ++m) fit_one(m);
    }
}

TreeConfig tree_config(const SsrfConfig& cfg) {
    TreeConfig tc;
    tc.max_depth = cfg.max_depth;
    tc.min_samples_leaf = cfg.min_samples_leaf;
    tc.criterion = cfg.criterion;
    tc.min_gain = cfg.min_gain;
    return tc;
}

SsrfModel fit_forest(const Dataset& ds, const std::vector<int>& rows,
                     const std::vector<double>& targets, const SsrfConfig& cfg,
                     const std::vector<double>& importance, double beta, Execution exec) {
    SsrfModel model;
    model.config = cfg;
    model.n_features = ds.n_cols;
    model.pilot_importance = importance;
    model.trees.resize(static_cast<std::size_t>(cfg.n_trees));
    if (cfg.keep_subsets) model.row_subsets.resize(static_cast<std::size_t>(cfg.n_trees));

    const int k = resolve_k(cfg, ds.n_cols);
    const TreeConfig tc = tree_config(cfg);

    run_trees(cfg.n_trees, exec, [&](int m) {
        Rng rng(derive_seed(cfg.seed, kTreeTag, static_cast<std::uint64_t>(m)));
        std::vector<int> sample = cfg.bootstrap ? bootstrap_rows(rows, rng) : rows;
        FeatureSampler sampler = [&](Rng& r) { return sample_features(importance, k, beta, r); };
        model.trees[static_cast<std::size_t>(m)] = build_tree(ds, sample, targets, tc, sampler, rng);
        if (cfg.keep_subsets) model.row_subsets[static_cast<std::size_t>(m)] = std::move(sample);
    });

    std::vector<double> acc(ds.n_cols, 0.0);
    for (const auto& t : model.trees) accumulate_importance(*t, acc);
    model.feature_importance = normalize_or_uniform(std::move(acc));
    return model;
}

}  // namespace

std::vector<double> fit_pilot_importance(const Dataset& ds, const std::vector<int>& rows,
                                         const std::vector<double>& targets,
                                         const SsrfConfig& cfg) {
    if (rows.empty()) throw ValidationError("fit_pilot_importance: empty row set");
    std::vector<double> acc(ds.n_cols, 0.0);
    if (cfg.pilot_trees <= 0) return normalize_or_uniform(std::move(acc));

    const int k = resolve_k(cfg, ds.n_cols);
    const TreeConfig tc = tree_config(cfg);
    std::vector<TreePtr> trees(static_cast<std::size_t>(cfg.pilot_trees));

    run_trees(cfg.pilot_trees, Execution::parallel, [&](int t) {
        Rng rng(derive_seed(cfg.seed, kPilotTag, static_cast<std::uint64_t>(t)));
        std::vector<int> sample = cfg.bootstrap ? bootstrap_rows(rows, rng) : rows;
        FeatureSampler sampler = [&](Rng& r) {
            return sample_without_replacement(static_cast<int>(ds.n_cols), k, r);
        };
        trees[static_cast<std::size_t>(t)] = build_tree(ds, sample, targets, tc, sampler, rng);
    });

    for (const auto& t : trees) accumulate_importance(*t, acc);
    return normalize_or_uniform(std::move(acc));
}

std::vector<int> sample_features(const std::vector<double>& importance, int k, double beta,
                                 Rng& rng) {
    const int d = static_cast<int>(importance.size());
    if (k > d) throw ValidationError("sample_features: k exceeds feature count");
    if (beta == 0.0) return sample_without_replacement(d, k, rng);

    std::vector<double> w(importance.size());
    for (int j = 0; j < d; ++j)
        w[static_cast<std::size_t>(j)] =
            (1.0 - beta) / static_cast<double>(d) + beta * importance[static_cast<std::size_t>(j)];

    std::vector<int> picked;
    picked.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        double total = 0;
        for (double x : w) total += x;
        if (total <= 0) {
            // remaining mass exhausted (beta=1 with zero-importance features):
            // finish uniformly over the unpicked
            std::vector<int> rest;
            for (int j = 0; j < d; ++j) {
                bool already = false;
                for (int p : picked)
                    if (p == j) already = true;
                if (!already) rest.push_back(j);
            }
            while (static_cast<int>(picked.size()) < k) {
                std::size_t idx = rng.below(rest.size());
                picked.push_back(rest[idx]);
                rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(idx));
            }
            break;
        }
        double r = rng.uniform01() * total;
        double cum = 0;
        int chosen = d - 1;
        for (int j = 0; j < d; ++j) {
            if (w[static_cast<std::size_t>(j)] <= 0) continue;
            cum += w[static_cast<std::size_t>(j)];
            if (r < cum) {
                chosen = j;
                break;
            }
        }
        picked.push_back(chosen);
        w[static_cast<std::size_t>(chosen)] = 0.0;
    }
    return picked;
}

SsrfModel fit_ssrf(const Dataset& ds, const std::vector<int>& rows,
                   const std::vector<double>& targets, const SsrfConfig& cfg, Execution exec) {
    if (rows.empty()) throw ValidationError("fit_ssrf: empty row set");
    auto importance = fit_pilot_importance(ds, rows, targets, cfg);
    return fit_forest(ds, rows, targets, cfg, importance, cfg.importance_blend, exec);
}

SsrfModel fit_plain_rf(const Dataset& ds, const std::vector<int>& rows,
                       const std::vector<double>& targets, const SsrfConfig& cfg,
                       Execution exec) {
    if (rows.empty()) throw ValidationError("fit_plain_rf: empty row set");
    std::vector<double> uniform(ds.n_cols, 1.0 / static_cast<double>(ds.n_cols));
    return fit_forest(ds, rows, targets, cfg, uniform, 0.0, exec);
}

double predict_ssrf(const SsrfModel& model, std::span<const double> x) {
    if (x.size() != model.n_features)
        throw ValidationError("predict_ssrf: row has " + std::to_string(x.size()) +
                              " features, model expects " + std::to_string(model.n_features));
    double sum = 0;
    for (const auto& t : model.trees) {
        double v = predict_tree(*t, x);
        sum += model.config.hard_vote ? (v > 0.5 ? 1.0 : 0.0) : v;
    }
    return sum / static_cast<double>(model.trees.size());
}

std::vector<double> predict_ssrf_many(const SsrfModel& model, const Dataset& ds, Execution exec) {
    std::vector<double> out(ds.n_rows);
    const auto score_row = [&](std::size_t r) { out[r] = predict_ssrf(model, ds.row(r)); };
    if (exec == Execution::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long r = 0; r < static_cast<long long>(ds.n_rows); ++r)
            score_row(static_cast<std::size_t>(r));
    } else {
        for (std::size_t r = 0; r < ds.n_rows; ++r) score_row(r);
    }
    return out;
}

}  // namespace fraudtree
