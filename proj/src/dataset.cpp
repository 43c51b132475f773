#include "fraudtree/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "fraudtree/errors.hpp"
#include "fraudtree/rng.hpp"

namespace fraudtree {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Largest-remainder apportionment of total into 3 parts.
std::array<std::size_t, 3> apportion(std::size_t total, const std::array<double, 3>& ratios) {
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> rem{};
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        double exact = ratios[i] * static_cast<double>(total);
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        rem[i] = exact - std::floor(exact);
        assigned += counts[i];
    }
    while (assigned < total) {
        int best = 0;
        for (int i = 1; i < 3; ++i)
            if (rem[i] > rem[best]) best = i;
        counts[best]++;
        rem[best] = -1.0;
        assigned++;
    }
    return counts;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvOptions& opts) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);

    std::string header_line;
    if (!std::getline(in, header_line)) throw ValidationError("no header: " + path);
    auto header = split_line(header_line);
    for (auto& h : header) h = trim(h);
    if (header.empty() || (header.size() == 1 && header[0].empty()))
        throw ValidationError("no header: " + path);

    int label_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == opts.label_column) label_col = static_cast<int>(i);
    if (label_col < 0)
        throw ValidationError("label column '" + opts.label_column + "' not found in " + path);

    Dataset ds;
    ds.n_cols = header.size() - 1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (static_cast<int>(i) != label_col) ds.feature_names.push_back(header[i]);

    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != header.size())
            throw ValidationError("row " + std::to_string(row + 1) + ": expected " +
                                  std::to_string(header.size()) + " cells, got " +
                                  std::to_string(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            std::string cell = trim(cells[c]);
            if (static_cast<int>(c) == label_col) {
                if (cell == opts.positive_label) {
                    ds.labels.push_back(1.0);
                } else if (cell == opts.negative_label) {
                    ds.labels.push_back(0.0);
                } else {
                    throw ValidationError("row " + std::to_string(row + 1) + ": label '" + cell +
                                          "' is neither '" + opts.negative_label + "' nor '" +
                                          opts.positive_label + "'");
                }
            } else if (cell.empty()) {
                ds.features.push_back(std::numeric_limits<double>::quiet_NaN());
            } else {
                std::size_t pos = 0;
                double v;
                try {
                    v = std::stod(cell, &pos);
                } catch (const std::exception&) {
                    pos = 0;
                }
                if (pos != cell.size())
                    throw ValidationError("row " + std::to_string(row + 1) + ", column '" +
                                          header[c] + "': non-numeric value '" + cell + "'");
                ds.features.push_back(v);
            }
        }
        ++row;
    }
    ds.n_rows = row;
    return ds;
}

PreprocessStats fit_preprocess(const Dataset& ds, const std::vector<int>& train_idx,
                               bool use_mean) {
    if (train_idx.empty()) throw ValidationError("fit_preprocess: empty training split");

    PreprocessStats st;
    st.median.resize(ds.n_cols);
    st.mean.resize(ds.n_cols);
    st.stddev.resize(ds.n_cols);

    for (std::size_t c = 0; c < ds.n_cols; ++c) {
        std::vector<double> present;
        present.reserve(train_idx.size());
        for (int r : train_idx) {
            double v = ds.value(static_cast<std::size_t>(r), c);
            if (!std::isnan(v)) present.push_back(v);
        }
        if (present.empty())
            throw ValidationError("column '" + ds.feature_names[c] +
                                  "' has no values on the training split");
        double fill;
        if (use_mean) {
            double s = 0;
            for (double v : present) s += v;
            fill = s / static_cast<double>(present.size());
        } else {
            fill = median_of(present);
        }
        st.median[c] = fill;

        // mean/std over imputed training column
        double sum = 0, sumsq = 0;
        for (int r : train_idx) {
            double v = ds.value(static_cast<std::size_t>(r), c);
            if (std::isnan(v)) v = fill;
            sum += v;
            sumsq += v * v;
        }
        double n = static_cast<double>(train_idx.size());
        double mean = sum / n;
        double var = sumsq / n - mean * mean;
        if (var < 0) var = 0;
        double sd = std::sqrt(var);
        st.mean[c] = mean;
        st.stddev[c] = (sd < 1e-12) ? 1.0 : sd;
    }
    return st;
}

Dataset apply_preprocess(const Dataset& ds, const PreprocessStats& stats) {
    if (stats.median.size() != ds.n_cols)
        throw ValidationError("preprocess stats have " + std::to_string(stats.median.size()) +
                              " columns, dataset has " + std::to_string(ds.n_cols));
    Dataset out = ds;
    for (std::size_t r = 0; r < ds.n_rows; ++r) {
        for (std::size_t c = 0; c < ds.n_cols; ++c) {
            double v = out.value(r, c);
            if (std::isnan(v)) v = stats.median[c];
            out.value(r, c) = (v - stats.mean[c]) / stats.stddev[c];
        }
    }
    return out;
}

SplitAssignment stratified_split(const Dataset& ds, double train_ratio, double valid_ratio,
                                 double test_ratio, std::uint64_t seed, double) {
    if (ds.n_rows < 3) throw ValidationError("stratified_split: need at least 3 rows");
    double sum = train_ratio + valid_ratio + test_ratio;
    if (train_ratio < 0 || valid_ratio < 0 || test_ratio < 0 || std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("split ratios must be nonnegative and sum to 1");

    std::array<double, 3> ratios{train_ratio, valid_ratio, test_ratio};
    auto part_sizes = apportion(ds.n_rows, ratios);

    std::vector<int> pos, neg;
    for (std::size_t r = 0; r < ds.n_rows; ++r)
        (ds.labels[r] == 1.0 ? pos : neg).push_back(static_cast<int>(r));

    SplitAssignment out;
    Rng rng(derive_seed(seed, 0x5711));

    auto shuffle = [&rng](std::vector<int>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[rng.below(i)]);
    };

    if (pos.empty() || neg.empty()) {
        // one-class data: plain shuffled split
        out.stratified = false;
        std::vector<int> all(ds.n_rows);
        for (std::size_t i = 0; i < ds.n_rows; ++i) all[i] = static_cast<int>(i);
        shuffle(all);
        std::size_t a = part_sizes[0], b = part_sizes[0] + part_sizes[1];
        out.train_idx.assign(all.begin(), all.begin() + a);
        out.valid_idx.assign(all.begin() + a, all.begin() + b);
        out.test_idx.assign(all.begin() + b, all.end());
        return out;
    }

    shuffle(pos);
    shuffle(neg);

    // Positives apportioned by the ratios; negatives fill each part to its
    // exact target size, so totals land on the apportioned sizes.
    auto pos_sizes = apportion(pos.size(), ratios);
    std::array<std::vector<int>*, 3> parts{&out.train_idx, &out.valid_idx, &out.test_idx};
    std::size_t p = 0, q = 0;
    for (int i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < pos_sizes[i]; ++j) parts[i]->push_back(pos[p++]);
        std::size_t neg_count = part_sizes[i] - pos_sizes[i];
        for (std::size_t j = 0; j < neg_count; ++j) parts[i]->push_back(neg[q++]);
        std::sort(parts[i]->begin(), parts[i]->end());
    }
    return out;
}

Dataset generate_synthetic(std::size_t n, double fraud_rate, std::size_t n_features,
                           double difficulty, std::uint64_t seed) {
    if (n < 1) throw ValidationError("generate_synthetic: n must be >= 1");
    if (fraud_rate <= 0 || fraud_rate >= 1)
        throw ValidationError("generate_synthetic: fraud_rate must be in (0,1)");
    if (n_features < 1) throw ValidationError("generate_synthetic: need at least 1 feature");

    std::size_t n_pos = static_cast<std::size_t>(
        std::llround(fraud_rate * static_cast<double>(n)));
    if (n_pos == 0) n_pos = 1;
    if (n_pos >= n) n_pos = n - 1;

    Dataset ds;
    ds.n_rows = n;
    ds.n_cols = n_features;
    ds.features.resize(n * n_features);
    ds.labels.resize(n);
    for (std::size_t c = 0; c < n_features; ++c) ds.feature_names.push_back("f" + std::to_string(c));

    Rng rng(derive_seed(seed, 0xDA7A));
    std::size_t signal = rng.below(n_features);

    // Positive rows spread evenly through the file so stratified splits stay
    // representative even without shuffling.
    std::vector<char> is_pos(n, 0);
    for (std::size_t i = 0; i < n_pos; ++i)
        is_pos[(i * n) / n_pos] = 1;

    for (std::size_t r = 0; r < n; ++r) {
        ds.labels[r] = is_pos[r] ? 1.0 : 0.0;
        for (std::size_t c = 0; c < n_features; ++c) {
            double g = rng.normal();
            if (c == signal) {
                if (is_pos[r]) {
                    // class center walks from 4 (separable) down to 0; noise
                    // along the signal axis grows with difficulty
                    g = 4.0 * (1.0 - difficulty) + difficulty * g;
                } else {
                    if (g > 2.5) g = 2.5;  // negatives capped below the d=0 margin
                }
            }
            ds.value(r, c) = g;
        }
    }
    return ds;
}

void write_csv(const Dataset& ds, const std::string& path, const std::string& label_column) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    for (std::size_t c = 0; c < ds.n_cols; ++c) out << ds.feature_names[c] << ",";
    out << label_column << "\n";
    out.precision(17);
    for (std::size_t r = 0; r < ds.n_rows; ++r) {
        for (std::size_t c = 0; c < ds.n_cols; ++c) {
            double v = ds.value(r, c);
            if (std::isnan(v))
                out << ",";
            else
                out << v << ",";
        }
        out << static_cast<int>(ds.labels[r]) << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace fraudtree
