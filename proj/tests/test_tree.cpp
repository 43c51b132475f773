#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "fraudtree/dataset.hpp"
#include "fraudtree/errors.hpp"
#include "fraudtree/tree.hpp"
#include "oracles.hpp"

using namespace fraudtree;

namespace {

Dataset make_ds(std::size_t n_cols, const std::vector<double>& features) {
    Dataset ds;
    ds.n_cols = n_cols;
    ds.n_rows = features.size() / n_cols;
    ds.features = features;
    ds.labels.assign(ds.n_rows, 0.0);
    for (std::size_t c = 0; c < n_cols; ++c) ds.feature_names.push_back("f" + std::to_string(c));
    return ds;
}

std::vector<int> iota_rows(std::size_t n) {
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<int>(i);
    return out;
}

Dataset random_ds(Rng& rng, std::size_t rows, std::size_t cols, int distinct_vals) {
    std::vector<double> f(rows * cols);
    for (auto& v : f) v = static_cast<double>(rng.below(static_cast<std::uint64_t>(distinct_vals)));
    return make_ds(cols, f);
}

}  // namespace

TEST_CASE("best_split matches the worked two-point example") {
    Dataset ds = make_ds(1, {0.0, 1.0});
    std::vector<double> targets{0.0, 1.0};
    TreeConfig cfg;
    cfg.criterion = Criterion::gini;
    auto c = best_split(ds, iota_rows(2), targets, {0}, cfg);
    REQUIRE(c.has_value());
    CHECK(c->feature == 0);
    CHECK(c->threshold == doctest::Approx(0.5));
    CHECK(c->gain == doctest::Approx(0.5));
}

TEST_CASE("best_split on pure targets is absent") {
    Dataset ds = make_ds(1, {0.0, 1.0, 2.0});
    std::vector<double> targets{1.0, 1.0, 1.0};
    TreeConfig cfg;
    CHECK_FALSE(best_split(ds, iota_rows(3), targets, {0}, cfg).has_value());
}

TEST_CASE("best_split prefers the higher gain and tie-breaks on feature index") {
    // feature 1 separates perfectly, feature 0 only partially
    Dataset ds = make_ds(2, {0, 0, 0, 1, 1, 0, 1, 1});
    std::vector<double> targets{0, 1, 0, 1};
    TreeConfig cfg;
    cfg.criterion = Criterion::gini;
    auto c = best_split(ds, iota_rows(4), targets, {0, 1}, cfg);
    REQUIRE(c.has_value());
    CHECK(c->feature == 1);

    // identical columns: equal gains, lowest feature index wins
    Dataset tie = make_ds(2, {0, 0, 1, 1, 0, 0, 1, 1});
    auto t = best_split(tie, iota_rows(4), targets, {0, 1}, cfg);
    REQUIRE(t.has_value());
    CHECK(t->feature == 0);
}

TEST_CASE("best_split agrees with the brute-force oracle on random small datasets") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t rows = 2 + rng.below(7);
        std::size_t cols = 1 + rng.below(3);
        Dataset ds = random_ds(rng, rows, cols, 4);
        bool gini = rng.below(2) == 0;
        std::vector<double> targets(rows);
        for (auto& t : targets)
            t = gini ? static_cast<double>(rng.below(2)) : rng.uniform01() * 4.0 - 2.0;
        TreeConfig cfg;
        cfg.criterion = gini ? Criterion::gini : Criterion::mse;
        cfg.min_samples_leaf = 1 + static_cast<int>(rng.below(2));

        std::vector<int> features(cols);
        for (std::size_t i = 0; i < cols; ++i) features[i] = static_cast<int>(i);
        auto got = best_split(ds, iota_rows(rows), targets, features, cfg);
        auto want = oracles::brute_force_best_split(ds, iota_rows(rows), targets, features, cfg);
        REQUIRE(got.has_value() == want.has_value());
        if (got) {
            CHECK(got->feature == want->feature);
            CHECK(got->threshold == doctest::Approx(want->threshold).epsilon(1e-12));
            CHECK(std::abs(got->gain - want->gain) < 1e-12);
            CHECK(got->left_count == want->left_count);
            CHECK(got->right_count == want->right_count);
        }
    }
}

TEST_CASE("build_tree: separable points yield a pure stump") {
    Dataset ds = make_ds(1, {0, 1, 10, 11});
    std::vector<double> targets{0, 0, 1, 1};
    TreeConfig cfg;
    cfg.max_depth = 1;
    Rng rng(1);
    auto tree = build_tree(ds, iota_rows(4), targets, cfg, all_features_sampler(1), rng);
    for (std::size_t r = 0; r < 4; ++r)
        CHECK(predict_tree(*tree, ds.row(r)) == doctest::Approx(targets[r]));
}

TEST_CASE("build_tree: XOR at depth 1 leaves both leaves at 0.5") {
    Dataset ds = make_ds(2, {0, 0, 0, 1, 1, 0, 1, 1});
    std::vector<double> targets{0, 1, 1, 0};
    TreeConfig cfg;
    cfg.max_depth = 1;
    cfg.min_gain = 0;
    Rng rng(1);
    auto tree = build_tree(ds, iota_rows(4), targets, cfg, all_features_sampler(2), rng);
    for (std::size_t r = 0; r < 4; ++r) CHECK(predict_tree(*tree, ds.row(r)) == 0.5);
}

TEST_CASE("build_tree: forced leaf and invalid depth") {
    Dataset ds = make_ds(1, {0, 1, 2, 3});
    std::vector<double> targets{0, 1, 1, 1};
    TreeConfig cfg;
    cfg.max_depth = 1;
    cfg.min_samples_leaf = 4;
    Rng rng(1);
    auto tree = build_tree(ds, iota_rows(4), targets, cfg, all_features_sampler(1), rng);
    CHECK(tree->is_leaf());
    CHECK(tree->value == doctest::Approx(0.75));

    cfg.max_depth = 0;
    CHECK_THROWS_AS(build_tree(ds, iota_rows(4), targets, cfg, all_features_sampler(1), rng),
                    ValidationError);
}

TEST_CASE("predict_tree: leaf identity, boundary routing, bounds check") {
    TreeNode leaf;
    leaf.value = 0.7;
    std::vector<double> x{123.0};
    CHECK(predict_tree(leaf, x) == 0.7);

    TreeNode split;
    split.feature = 0;
    split.threshold = 0.5;
    split.left = std::make_unique<TreeNode>();
    split.left->value = 0.0;
    split.right = std::make_unique<TreeNode>();
    split.right->value = 1.0;
    std::vector<double> boundary{0.5};
    CHECK(predict_tree(split, boundary) == 0.0);  // <= goes left

    split.feature = 3;
    CHECK_THROWS_AS(predict_tree(split, boundary), ValidationError);
}

TEST_CASE("unrestricted tree memorizes a separable training set") {
    Rng rng(77);
    Dataset ds = random_ds(rng, 32, 3, 16);
    // label = function of the features, so rows are separable up to duplicates
    std::vector<double> targets(ds.n_rows);
    for (std::size_t r = 0; r < ds.n_rows; ++r)
        targets[r] = (ds.value(r, 0) + ds.value(r, 1) > ds.value(r, 2)) ? 1.0 : 0.0;
    TreeConfig cfg;
    cfg.max_depth = 64;
    cfg.min_samples_leaf = 1;
    cfg.min_gain = 0;
    auto tree = build_tree(ds, iota_rows(ds.n_rows), targets, cfg, all_features_sampler(3), rng);
    for (std::size_t r = 0; r < ds.n_rows; ++r)
        CHECK(predict_tree(*tree, ds.row(r)) == doctest::Approx(targets[r]));
}

TEST_CASE("a depth-1 stump solves difficulty-0 synthetic data") {
    Dataset ds = generate_synthetic(400, 0.1, 4, 0.0, 5);
    TreeConfig cfg;
    cfg.max_depth = 1;
    Rng rng(1);
    auto tree =
        build_tree(ds, iota_rows(ds.n_rows), ds.labels, cfg, all_features_sampler(4), rng);
    for (std::size_t r = 0; r < ds.n_rows; ++r) {
        double p = predict_tree(*tree, ds.row(r));
        CHECK((p > 0.5 ? 1.0 : 0.0) == ds.labels[r]);
    }
}

TEST_CASE("accumulate_importance: leaves, stumps, additivity") {
    std::vector<double> imp(3, 0.0);
    TreeNode leaf;
    accumulate_importance(leaf, imp);
    for (double v : imp) CHECK(v == 0.0);

    TreeNode stump;
    stump.feature = 2;
    stump.gain = 0.5;
    stump.sample_frac = 1.0;
    stump.left = std::make_unique<TreeNode>();
    stump.right = std::make_unique<TreeNode>();
    accumulate_importance(stump, imp);
    CHECK(imp == std::vector<double>{0.0, 0.0, 0.5});

    // sum of two per-tree vectors equals accumulating both into one
    std::vector<double> a(3, 0.0), b(3, 0.0), both(3, 0.0);
    accumulate_importance(stump, a);
    accumulate_importance(leaf, b);
    accumulate_importance(stump, both);
    accumulate_importance(leaf, both);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a[i] + b[i] == both[i]);
}

TEST_CASE("property: depth cap, leaf sizes, leaf ranges, determinism") {
    Rng rng(31337);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t rows = 5 + rng.below(60);
        std::size_t cols = 1 + rng.below(4);
        Dataset ds = random_ds(rng, rows, cols, 8);
        bool gini = rng.below(2) == 0;
        std::vector<double> targets(rows);
        for (auto& t : targets)
            t = gini ? static_cast<double>(rng.below(2)) : rng.uniform01() * 10.0 - 5.0;
        TreeConfig cfg;
        cfg.criterion = gini ? Criterion::gini : Criterion::mse;
        cfg.max_depth = 1 + static_cast<int>(rng.below(6));
        cfg.min_samples_leaf = 1 + static_cast<int>(rng.below(4));

        std::uint64_t seed = rng.next_u64();
        Rng r1(seed), r2(seed);
        std::vector<int> feats(cols);
        for (std::size_t i = 0; i < cols; ++i) feats[i] = static_cast<int>(i);
        auto sampler = [&](Rng& r) {
            return sample_without_replacement(static_cast<int>(cols),
                                              1 + static_cast<int>(r.below(cols)), r);
        };
        auto t1 = build_tree(ds, iota_rows(rows), targets, cfg, sampler, r1);
        auto t2 = build_tree(ds, iota_rows(rows), targets, cfg, sampler, r2);

        CHECK(tree_depth(*t1) <= cfg.max_depth);

        double lo = *std::min_element(targets.begin(), targets.end());
        double hi = *std::max_element(targets.begin(), targets.end());
        // leaf counts and value ranges, plus structural determinism
        std::function<void(const TreeNode&, const TreeNode&, std::vector<int>)> walk =
            [&](const TreeNode& n1, const TreeNode& n2, std::vector<int> node_rows) {
                CHECK(n1.feature == n2.feature);
                CHECK(n1.threshold == n2.threshold);
                CHECK(n1.value == n2.value);
                if (n1.is_leaf()) {
                    CHECK(static_cast<int>(node_rows.size()) >= cfg.min_samples_leaf);
                    CHECK(n1.value >= lo);
                    CHECK(n1.value <= hi);
                    if (gini) {
                        CHECK(n1.value >= 0.0);
                        CHECK(n1.value <= 1.0);
                    }
                    return;
                }
                std::vector<int> left, right;
                for (int r : node_rows) {
                    double v = ds.value(static_cast<std::size_t>(r),
                                        static_cast<std::size_t>(n1.feature));
                    (v <= n1.threshold ? left : right).push_back(r);
                }
                walk(*n1.left, *n2.left, left);
                walk(*n1.right, *n2.right, right);
            };
        walk(*t1, *t2, iota_rows(rows));
    }
}
