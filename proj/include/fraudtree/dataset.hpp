#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fraudtree {

// Dense row-major feature matrix plus per-row labels. Missing cells are NaN
// until apply_preprocess runs.
struct Dataset {
    std::vector<double> features;  // n_rows * n_cols, row-major
    std::vector<double> labels;    // 0/1 for classification
    std::vector<std::string> feature_names;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;

    double value(std::size_t r, std::size_t c) const { return features[r * n_cols + c]; }
    double& value(std::size_t r, std::size_t c) { return features[r * n_cols + c]; }
    std::span<const double> row(std::size_t r) const {
        return {features.data() + r * n_cols, n_cols};
    }
};

struct SplitAssignment {
    std::vector<int> train_idx;
    std::vector<int> valid_idx;
    std::vector<int> test_idx;
    bool stratified = true;  // false when a class was empty and we fell back
};

// Imputation + z-score statistics, fitted on the training split only.
struct PreprocessStats {
    std::vector<double> median;
    std::vector<double> mean;
    std::vector<double> stddev;  // stored as 1 for constant columns
};

struct CsvOptions {
    std::string label_column = "label";
    std::string positive_label = "1";
    std::string negative_label = "0";
};

Dataset load_csv(const std::string& path, const CsvOptions& opts);

// Per-column median (over non-missing train cells), then mean/std over the
// imputed train cells. use_mean switches imputation from median to mean.
PreprocessStats fit_preprocess(const Dataset& ds, const std::vector<int>& train_idx,
                               bool use_mean = false);

Dataset apply_preprocess(const Dataset& ds, const PreprocessStats& stats);

SplitAssignment stratified_split(const Dataset& ds, double train_ratio, double valid_ratio,
                                 double test_ratio, std::uint64_t seed,
                                 double strat_tolerance = 0.001);

// Synthetic transactions. One seeded feature column carries the class signal;
// difficulty in [0,1] moves the positive class from fully separable into the
// bulk of the negatives.
Dataset generate_synthetic(std::size_t n, double fraud_rate, std::size_t n_features,
                           double difficulty, std::uint64_t seed);

void write_csv(const Dataset& ds, const std::string& path,
               const std::string& label_column = "label");

}  // namespace fraudtree
