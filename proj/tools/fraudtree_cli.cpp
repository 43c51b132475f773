#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fraudtree/dataset.hpp"
#include "fraudtree/errors.hpp"
#include "fraudtree/gbm.hpp"
#include "fraudtree/hybrid.hpp"
#include "fraudtree/metrics.hpp"
#include "fraudtree/model_io.hpp"
#include "fraudtree/report.hpp"
#include "fraudtree/ssrf.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace fraudtree;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string data;
    std::string synth;  // "n,rate,features,difficulty"
    std::string label_column = "label";
    std::string positive_label = "1";
    std::string negative_label = "0";
    std::string ratios = "0.7,0.15,0.15";
    std::string format = "text";
    std::uint64_t seed = 42;
    int workers = 0;
};

struct ModelOpts {
    std::string kind = "hybrid";
    std::string mode = "blend";
    int n_stages = 100;
    double learning_rate = 0.1;
    int gbm_depth = 3;
    int n_trees = 100;
    int max_depth = 6;
    int min_samples_leaf = 5;
    double beta = 0.5;
    int pilot_trees = 10;
    std::string alpha = "auto";
    std::string threshold = "auto";
    double subsample = 1.0;
    double pos_weight = 1.0;
    bool hard_vote = false;
    bool raw_margin = false;
    bool impute_mean = false;
};

std::vector<double> parse_doubles(const std::string& s, std::size_t expected,
                                  const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
    if (out.size() != expected)
        throw ValidationError(what + ": expected " + std::to_string(expected) +
                              " comma-separated values, got '" + s + "'");
    return out;
}

void apply_workers(int workers) {
#ifdef _OPENMP
    if (workers > 0) omp_set_num_threads(workers);
#else
    (void)workers;
#endif
}

Dataset load_input(const CommonOpts& c) {
    if (!c.synth.empty()) {
        auto v = parse_doubles(c.synth, 4, "--synth");
        return generate_synthetic(static_cast<std::size_t>(v[0]), v[1],
                                  static_cast<std::size_t>(v[2]), v[3], c.seed);
    }
    if (c.data.empty()) throw ValidationError("either --data or --synth is required");
    CsvOptions opts;
    opts.label_column = c.label_column;
    opts.positive_label = c.positive_label;
    opts.negative_label = c.negative_label;
    return load_csv(c.data, opts);
}

std::string now_iso8601() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

GbmConfig make_gbm_config(const ModelOpts& m, std::uint64_t seed) {
    GbmConfig g;
    g.n_stages = m.n_stages;
    g.learning_rate = m.learning_rate;
    g.max_depth = m.gbm_depth;
    g.min_samples_leaf = 1;
    g.subsample = m.subsample;
    g.pos_weight = m.pos_weight;
    g.loss = LossKind::logistic;
    g.seed = seed;
    return g;
}

SsrfConfig make_ssrf_config(const ModelOpts& m, std::uint64_t seed) {
    SsrfConfig s;
    s.n_trees = m.n_trees;
    s.max_depth = m.max_depth;
    s.min_samples_leaf = m.min_samples_leaf;
    s.importance_blend = m.beta;
    s.pilot_trees = m.pilot_trees;
    s.hard_vote = m.hard_vote;
    s.seed = seed;
    return s;
}

double parse_auto_value(const std::string& s, const std::string& what) {
    if (s == "auto") return -1.0;
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw ValidationError(what + ": expected 'auto' or a number, got '" + s + "'");
    }
}

json echo_config(const CommonOpts& c, const ModelOpts& m) {
    return json{{"seed", c.seed},
                {"ratios", c.ratios},
                {"kind", m.kind},
                {"mode", m.mode},
                {"n_stages", m.n_stages},
                {"learning_rate", m.learning_rate},
                {"gbm_depth", m.gbm_depth},
                {"n_trees", m.n_trees},
                {"max_depth", m.max_depth},
                {"min_samples_leaf", m.min_samples_leaf},
                {"beta", m.beta},
                {"pilot_trees", m.pilot_trees},
                {"subsample", m.subsample},
                {"pos_weight", m.pos_weight}};
}

void print_report(const MetricsReport& rep, const std::string& format) {
    if (format == "json")
        std::cout << report_to_json(rep).dump(2) << "\n";
    else
        std::cout << report_to_text(rep);
}

// Fits one model kind and returns (model variant, validation probs). Threshold
// for non-hybrid kinds resolves on validation afterwards.
ModelFile fit_model_file(const Dataset& ds, const SplitAssignment& split, const CommonOpts& c,
                         const ModelOpts& m) {
    ModelFile mf;
    mf.kind = m.kind;
    mf.feature_names = ds.feature_names;

    double alpha = parse_auto_value(m.alpha, "--alpha");
    double threshold = parse_auto_value(m.threshold, "--threshold");

    if (m.kind == "hybrid") {
        HybridConfig h;
        h.mode = m.mode == "embedded" ? HybridMode::embedded : HybridMode::blend;
        h.gbm = make_gbm_config(m, 0);
        h.ssrf = make_ssrf_config(m, 0);
        h.alpha = alpha;
        h.threshold = threshold;
        h.policy = ThresholdPolicy::max_f1;
        h.raw_margin = m.raw_margin;
        h.seed = c.seed;
        auto model = fit_hybrid(ds, split, h);
        mf.threshold = model.threshold;
        mf.model = std::move(model);
        return mf;
    }

    if (m.kind == "gbm") {
        mf.model = fit_gbm(ds, split.train_idx, ds.labels, make_gbm_config(m, c.seed));
    } else if (m.kind == "ssrf") {
        mf.model = fit_ssrf(ds, split.train_idx, ds.labels, make_ssrf_config(m, c.seed));
    } else if (m.kind == "rf") {
        auto cfg = make_ssrf_config(m, c.seed);
        cfg.importance_blend = 0.0;
        cfg.pilot_trees = 0;
        mf.model = fit_plain_rf(ds, split.train_idx, ds.labels, cfg);
    } else {
        throw ValidationError("unknown model kind: " + m.kind);
    }

    if (threshold >= 0) {
        if (threshold <= 0 || threshold >= 1) throw ValidationError("threshold must lie in (0,1)");
        mf.threshold = threshold;
    } else {
        std::vector<double> probs;
        std::vector<double> labels;
        for (int r : split.valid_idx) {
            probs.push_back(mf.predict_proba(ds.row(static_cast<std::size_t>(r))));
            labels.push_back(ds.labels[static_cast<std::size_t>(r)]);
        }
        mf.threshold = resolve_threshold(probs, labels, ThresholdPolicy::max_f1);
    }
    return mf;
}

MetricsReport evaluate_rows(const ModelFile& mf, const Dataset& ds, const std::vector<int>& idx) {
    std::vector<double> probs, labels;
    probs.reserve(idx.size());
    for (int r : idx) {
        probs.push_back(mf.predict_proba(ds.row(static_cast<std::size_t>(r))));
        labels.push_back(ds.labels[static_cast<std::size_t>(r)]);
    }
    return build_report(labels, probs, mf.threshold);
}

int cmd_train(const CommonOpts& c, const ModelOpts& m, const std::string& model_out) {
    apply_workers(c.workers);
    Dataset raw = load_input(c);
    auto ratios = parse_doubles(c.ratios, 3, "--ratios");
    auto split = stratified_split(raw, ratios[0], ratios[1], ratios[2], c.seed);
    auto stats = fit_preprocess(raw, split.train_idx, m.impute_mean);
    Dataset ds = apply_preprocess(raw, stats);

    ModelFile mf = fit_model_file(ds, split, c, m);
    mf.preprocess = stats;
    mf.metadata = json{{"seed", c.seed},
                       {"created_at", now_iso8601()},
                       {"dataset_fingerprint", dataset_fingerprint(raw)},
                       {"config", echo_config(c, m)},
                       {"resolved_threshold", mf.threshold}};
    save_model(mf, model_out);

    if (!split.valid_idx.empty()) {
        print_report(evaluate_rows(mf, ds, split.valid_idx), c.format);
    }
    return 0;
}

// Raw CSV rows plus features laid out in the model's column order.
struct AlignedData {
    std::vector<std::string> raw_lines;
    std::string header;
    Dataset ds;  // features in model order; labels NaN when absent
    bool has_labels = false;
};

AlignedData load_aligned(const std::string& path, const ModelFile& mf, const CommonOpts& c,
                         bool require_labels) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::string header_line;
    if (!std::getline(in, header_line)) throw ValidationError("no header: " + path);

    auto split_cells = [](const std::string& line) {
        std::vector<std::string> out;
        std::string cell;
        std::stringstream ss(line);
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        if (!line.empty() && line.back() == ',') out.emplace_back();
        return out;
    };
    auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return std::string();
        auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    };

    auto header = split_cells(header_line);
    for (auto& h : header) h = trim(h);

    int label_col = -1;
    std::vector<std::string> data_features;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == c.label_column)
            label_col = static_cast<int>(i);
        else
            data_features.push_back(header[i]);
    }
    if (require_labels && label_col < 0)
        throw ValidationError("label column '" + c.label_column + "' not found in " + path);

    // exact feature-set match against the model, order-insensitive
    std::vector<std::string> missing, extra;
    for (const auto& f : mf.feature_names)
        if (std::find(data_features.begin(), data_features.end(), f) == data_features.end())
            missing.push_back(f);
    for (const auto& f : data_features)
        if (std::find(mf.feature_names.begin(), mf.feature_names.end(), f) ==
            mf.feature_names.end())
            extra.push_back(f);
    if (!missing.empty() || !extra.empty()) {
        std::string msg = "feature mismatch against model.";
        if (!missing.empty()) {
            msg += " missing:";
            for (const auto& f : missing) msg += " " + f;
        }
        if (!extra.empty()) {
            msg += " extra:";
            for (const auto& f : extra) msg += " " + f;
        }
        throw ValidationError(msg);
    }

    std::vector<int> col_of_feature(mf.feature_names.size());
    for (std::size_t j = 0; j < mf.feature_names.size(); ++j) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == mf.feature_names[j]) col_of_feature[j] = static_cast<int>(i);
    }

    AlignedData out;
    out.header = header_line;
    out.has_labels = label_col >= 0;
    out.ds.n_cols = mf.feature_names.size();
    out.ds.feature_names = mf.feature_names;

    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto cells = split_cells(line);
        if (cells.size() != header.size())
            throw ValidationError("row " + std::to_string(row + 1) + ": expected " +
                                  std::to_string(header.size()) + " cells");
        for (std::size_t j = 0; j < col_of_feature.size(); ++j) {
            std::string cell = trim(cells[static_cast<std::size_t>(col_of_feature[j])]);
            if (cell.empty()) {
                out.ds.features.push_back(std::numeric_limits<double>::quiet_NaN());
            } else {
                std::size_t pos = 0;
                double v = 0;
                try {
                    v = std::stod(cell, &pos);
                } catch (const std::exception&) {
                    pos = 0;
                }
                if (pos != cell.size())
                    throw ValidationError("row " + std::to_string(row + 1) + ", column '" +
                                          mf.feature_names[j] + "': non-numeric value '" + cell +
                                          "'");
                out.ds.features.push_back(v);
            }
        }
        if (label_col >= 0) {
            std::string cell = trim(cells[static_cast<std::size_t>(label_col)]);
            if (cell == c.positive_label)
                out.ds.labels.push_back(1.0);
            else if (cell == c.negative_label)
                out.ds.labels.push_back(0.0);
            else
                throw ValidationError("row " + std::to_string(row + 1) + ": label '" + cell +
                                      "' is neither '" + c.negative_label + "' nor '" +
                                      c.positive_label + "'");
        } else {
            out.ds.labels.push_back(std::numeric_limits<double>::quiet_NaN());
        }
        out.raw_lines.push_back(line);
        ++row;
    }
    out.ds.n_rows = row;
    return out;
}

int cmd_evaluate(const CommonOpts& c, const std::string& model_path) {
    apply_workers(c.workers);
    ModelFile mf = load_model(model_path);
    AlignedData data = load_aligned(c.data, mf, c, /*require_labels=*/true);
    Dataset ds = apply_preprocess(data.ds, mf.preprocess);

    std::vector<double> probs(ds.n_rows);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long r = 0; r < static_cast<long long>(ds.n_rows); ++r)
        probs[static_cast<std::size_t>(r)] =
            mf.predict_proba(ds.row(static_cast<std::size_t>(r)));

    MetricsReport rep = build_report(data.ds.labels, probs, mf.threshold);
    print_report(rep, c.format);
    return 0;
}

int cmd_predict(const CommonOpts& c, const std::string& model_path, const std::string& out_path) {
    apply_workers(c.workers);
    ModelFile mf = load_model(model_path);
    AlignedData data = load_aligned(c.data, mf, c, /*require_labels=*/false);
    Dataset ds = apply_preprocess(data.ds, mf.preprocess);

    std::ostringstream out;
    out.precision(17);
    out << data.header << ",score,flag\n";
    for (std::size_t r = 0; r < ds.n_rows; ++r) {
        double score = mf.predict_proba(ds.row(r));
        out << data.raw_lines[r] << "," << score << "," << (score > mf.threshold ? 1 : 0) << "\n";
    }

    std::ofstream f(out_path);
    if (!f) throw IoError("cannot write file: " + out_path);
    f << out.str();
    if (!f) throw IoError("write failed: " + out_path);
    return 0;
}

int cmd_benchmark(const CommonOpts& c, const ModelOpts& m) {
    apply_workers(c.workers);
    Dataset raw = load_input(c);
    auto ratios = parse_doubles(c.ratios, 3, "--ratios");
    auto split = stratified_split(raw, ratios[0], ratios[1], ratios[2], c.seed);
    auto stats = fit_preprocess(raw, split.train_idx, m.impute_mean);
    Dataset ds = apply_preprocess(raw, stats);

    std::vector<BenchmarkRow> rows;
    auto run = [&](const std::string& name, const std::string& kind, auto mutate) {
        BenchmarkRow row;
        row.model = name;
        try {
            ModelOpts opts = m;
            opts.kind = kind;
            mutate(opts);
            ModelFile mf = fit_model_file(ds, split, c, opts);
            row.report = evaluate_rows(mf, ds, split.test_idx);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    };

    run("RF", "rf", [](ModelOpts&) {});
    run("GBM", "gbm", [](ModelOpts&) {});
    run("GBM-SSRF", "hybrid", [](ModelOpts&) {});

    if (c.format == "json")
        std::cout << benchmark_to_json(rows).dump(2) << "\n";
    else
        std::cout << benchmark_to_text(rows);
    return 0;
}

int cmd_synth(const CommonOpts& c, const std::string& out_path) {
    Dataset ds = load_input(c);  // requires --synth
    if (c.synth.empty()) throw ValidationError("synth: --synth spec is required");
    write_csv(ds, out_path, c.label_column);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tree-ensemble fraud detection: GBM, SSRF, and their hybrid"};
    app.require_subcommand(1);

    CommonOpts c;
    ModelOpts m;
    std::string model_out = "model.json";
    std::string model_path;
    std::string out_path = "predictions.csv";

    auto add_common = [&](CLI::App* sub, bool with_data = true) {
        if (with_data) {
            sub->add_option("--data", c.data, "input CSV path");
            sub->add_option("--label-column", c.label_column, "label column name");
            sub->add_option("--positive-label", c.positive_label, "positive class literal");
            sub->add_option("--negative-label", c.negative_label, "negative class literal");
        }
        sub->add_option("--seed", c.seed, "random seed");
        sub->add_option("--workers", c.workers, "OpenMP worker count (0 = default)");
        sub->add_option("--format", c.format, "output format: json|text")
            ->check(CLI::IsMember({"json", "text"}));
    };
    auto add_model = [&](CLI::App* sub) {
        sub->add_option("--synth", c.synth, "synthetic data: n,rate,features,difficulty");
        sub->add_option("--ratios", c.ratios, "train,valid,test ratios");
        sub->add_option("--kind", m.kind, "model kind: rf|ssrf|gbm|hybrid")
            ->check(CLI::IsMember({"rf", "ssrf", "gbm", "hybrid"}));
        sub->add_option("--mode", m.mode, "hybrid mode: blend|embedded")
            ->check(CLI::IsMember({"blend", "embedded"}));
        sub->add_option("--n-stages", m.n_stages, "GBM stage count");
        sub->add_option("--learning-rate", m.learning_rate, "GBM shrinkage");
        sub->add_option("--gbm-depth", m.gbm_depth, "GBM stage tree depth");
        sub->add_option("--subsample", m.subsample, "GBM stage row fraction");
        sub->add_option("--pos-weight", m.pos_weight, "positive-class gradient weight");
        sub->add_option("--n-trees", m.n_trees, "forest size");
        sub->add_option("--max-depth", m.max_depth, "forest tree depth cap");
        sub->add_option("--min-samples-leaf", m.min_samples_leaf, "minimum rows per leaf");
        sub->add_option("--beta", m.beta, "importance blend in feature sampling [0,1]");
        sub->add_option("--pilot-trees", m.pilot_trees, "pilot forest size");
        sub->add_option("--alpha", m.alpha, "SSRF blend weight: auto or [0,1]");
        sub->add_option("--threshold", m.threshold, "decision threshold: auto or (0,1)");
        sub->add_flag("--hard-vote", m.hard_vote, "aggregate hard votes in the forest");
        sub->add_flag("--raw-margin", m.raw_margin, "blend in raw margin space");
        sub->add_flag("--impute-mean", m.impute_mean, "impute with the mean instead of the median");
    };

    auto* train = app.add_subcommand("train", "fit a model and report validation metrics");
    add_common(train);
    add_model(train);
    train->add_option("--model-out", model_out, "output model path");

    auto* evaluate = app.add_subcommand("evaluate", "score a labeled CSV against a model");
    add_common(evaluate);
    evaluate->add_option("--model", model_path, "model path")->required();

    auto* predict = app.add_subcommand("predict", "write scores and flags for a CSV");
    add_common(predict);
    predict->add_option("--model", model_path, "model path")->required();
    predict->add_option("--out", out_path, "output CSV path");

    auto* benchmark = app.add_subcommand("benchmark", "compare RF, GBM, and GBM-SSRF");
    add_common(benchmark);
    add_model(benchmark);

    auto* synth = app.add_subcommand("synth", "generate a synthetic transaction CSV");
    add_common(synth, /*with_data=*/false);
    synth->add_option("--synth", c.synth, "spec: n,rate,features,difficulty")->required();
    synth->add_option("--label-column", c.label_column, "label column name");
    synth->add_option("--out", out_path, "output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(c, m, model_out);
        if (evaluate->parsed()) return cmd_evaluate(c, model_path);
        if (predict->parsed()) return cmd_predict(c, model_path, out_path);
        if (benchmark->parsed()) return cmd_benchmark(c, m);
        if (synth->parsed()) return cmd_synth(c, out_path);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
