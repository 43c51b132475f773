#include "fraudtree/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fraudtree/errors.hpp"

namespace fraudtree {

using nlohmann::json;

namespace {

std::string fnv1a64_hex(const std::string& data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string criterion_name(Criterion c) { return c == Criterion::gini ? "gini" : "mse"; }
Criterion criterion_from(const std::string& s) {
    if (s == "gini") return Criterion::gini;
    if (s == "mse") return Criterion::mse;
    throw ValidationError("unknown criterion: " + s);
}

std::string loss_name(LossKind l) { return l == LossKind::logistic ? "logistic" : "squared"; }
LossKind loss_from(const std::string& s) {
    if (s == "logistic") return LossKind::logistic;
    if (s == "squared") return LossKind::squared;
    throw ValidationError("unknown loss: " + s);
}

json ssrf_config_to_json(const SsrfConfig& c) {
    return json{{"n_trees", c.n_trees},
                {"max_depth", c.max_depth},
                {"min_samples_leaf", c.min_samples_leaf},
                {"features_per_split", c.features_per_split},
                {"pilot_trees", c.pilot_trees},
                {"importance_blend", c.importance_blend},
                {"seed", c.seed},
                {"criterion", criterion_name(c.criterion)},
                {"min_gain", c.min_gain},
                {"bootstrap", c.bootstrap},
                {"hard_vote", c.hard_vote}};
}

SsrfConfig ssrf_config_from_json(const json& j) {
    SsrfConfig c;
    c.n_trees = j.at("n_trees").get<int>();
    c.max_depth = j.at("max_depth").get<int>();
    c.min_samples_leaf = j.at("min_samples_leaf").get<int>();
    c.features_per_split = j.at("features_per_split").get<int>();
    c.pilot_trees = j.at("pilot_trees").get<int>();
    c.importance_blend = j.at("importance_blend").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.criterion = criterion_from(j.at("criterion").get<std::string>());
    c.min_gain = j.at("min_gain").get<double>();
    c.bootstrap = j.at("bootstrap").get<bool>();
    c.hard_vote = j.at("hard_vote").get<bool>();
    return c;
}

}  // namespace

json tree_to_json(const TreeNode& node) {
    if (node.is_leaf()) return json{{"leaf", node.value}};
    return json{{"split", json{{"f", node.feature},
                               {"t", node.threshold},
                               {"l", tree_to_json(*node.left)},
                               {"r", tree_to_json(*node.right)}}}};
}

TreePtr tree_from_json(const json& j) {
    auto node = std::make_unique<TreeNode>();
    if (j.contains("leaf")) {
        node->value = j.at("leaf").get<double>();
        return node;
    }
    const json& s = j.at("split");
    node->feature = s.at("f").get<int>();
    node->threshold = s.at("t").get<double>();
    node->left = tree_from_json(s.at("l"));
    node->right = tree_from_json(s.at("r"));
    return node;
}

json ssrf_to_json(const SsrfModel& model) {
    json trees = json::array();
    for (const auto& t : model.trees) trees.push_back(tree_to_json(*t));
    return json{{"n_trees", static_cast<int>(model.trees.size())},
                {"importance", model.feature_importance},
                {"trees", std::move(trees)},
                {"config", ssrf_config_to_json(model.config)}};
}

SsrfModel ssrf_from_json(const json& j, std::size_t n_features) {
    SsrfModel model;
    model.config = ssrf_config_from_json(j.at("config"));
    model.feature_importance = j.at("importance").get<std::vector<double>>();
    model.n_features = n_features;
    for (const auto& t : j.at("trees")) model.trees.push_back(tree_from_json(t));
    return model;
}

json gbm_to_json(const GbmModel& model) {
    json stages = json::array();
    for (const auto& t : model.stages) stages.push_back(tree_to_json(*t));
    return json{{"base_score", model.base_score},
                {"learning_rate", model.learning_rate},
                {"loss", loss_name(model.loss)},
                {"stages", std::move(stages)},
                {"loss_trace", model.loss_trace}};
}

GbmModel gbm_from_json(const json& j, std::size_t n_features) {
    GbmModel model;
    model.base_score = j.at("base_score").get<double>();
    model.learning_rate = j.at("learning_rate").get<double>();
    model.loss = loss_from(j.at("loss").get<std::string>());
    model.loss_trace = j.at("loss_trace").get<std::vector<double>>();
    model.n_features = n_features;
    for (const auto& t : j.at("stages")) model.stages.push_back(tree_from_json(t));
    return model;
}

json hybrid_to_json(const HybridModel& model) {
    json out{{"mode", model.mode == HybridMode::blend ? "blend" : "embedded"},
             {"alpha", model.alpha},
             {"threshold", model.threshold},
             {"importance", model.importance},
             {"raw_margin", model.config.raw_margin},
             {"schema_version", kSchemaVersion}};
    if (model.mode == HybridMode::blend) {
        out["gbm"] = gbm_to_json(model.gbm);
        out["ssrf"] = ssrf_to_json(model.ssrf);
    } else {
        json gbm = gbm_to_json(model.gbm);
        json forests = json::array();
        for (const auto& forest : model.stage_forests) {
            json f = json::array();
            for (const auto& t : forest) f.push_back(tree_to_json(*t));
            forests.push_back(std::move(f));
        }
        gbm["stage_forests"] = std::move(forests);
        out["gbm"] = std::move(gbm);
    }
    return out;
}

HybridModel hybrid_from_json(const json& j, std::size_t n_features) {
    HybridModel model;
    std::string mode = j.at("mode").get<std::string>();
    model.mode = mode == "blend" ? HybridMode::blend : HybridMode::embedded;
    model.alpha = j.at("alpha").get<double>();
    model.threshold = j.at("threshold").get<double>();
    model.importance = j.at("importance").get<std::vector<double>>();
    model.config.mode = model.mode;
    model.config.raw_margin = j.value("raw_margin", false);
    model.n_features = n_features;
    model.gbm = gbm_from_json(j.at("gbm"), n_features);
    if (model.mode == HybridMode::blend) {
        model.ssrf = ssrf_from_json(j.at("ssrf"), n_features);
    } else {
        for (const auto& f : j.at("gbm").at("stage_forests")) {
            std::vector<TreePtr> forest;
            for (const auto& t : f) forest.push_back(tree_from_json(t));
            model.stage_forests.push_back(std::move(forest));
        }
    }
    return model;
}

double ModelFile::predict_proba(std::span<const double> x) const {
    if (std::holds_alternative<SsrfModel>(model)) return predict_ssrf(std::get<SsrfModel>(model), x);
    if (std::holds_alternative<GbmModel>(model)) return predict_gbm_proba(std::get<GbmModel>(model), x);
    return predict_hybrid(std::get<HybridModel>(model), x);
}

std::string model_payload_dump(const ModelFile& mf) {
    json payload;
    if (std::holds_alternative<SsrfModel>(mf.model))
        payload = ssrf_to_json(std::get<SsrfModel>(mf.model));
    else if (std::holds_alternative<GbmModel>(mf.model))
        payload = gbm_to_json(std::get<GbmModel>(mf.model));
    else
        payload = hybrid_to_json(std::get<HybridModel>(mf.model));

    json body{{"schema_version", mf.schema_version},
              {"kind", mf.kind},
              {"feature_names", mf.feature_names},
              {"preprocess", json{{"median", mf.preprocess.median},
                                  {"mean", mf.preprocess.mean},
                                  {"stddev", mf.preprocess.stddev}}},
              {"threshold", mf.threshold},
              {"payload", std::move(payload)}};
    return body.dump();
}

void save_model(const ModelFile& mf, const std::string& path) {
    std::string body_dump = model_payload_dump(mf);
    json body = json::parse(body_dump);
    body["checksum"] = fnv1a64_hex(body_dump);
    body["metadata"] = mf.metadata;
    std::string out = body.dump(2);

    std::ofstream f(path);
    if (!f) throw IoError("cannot write model file: " + path);
    f << out << "\n";
    if (!f) throw IoError("write failed: " + path);
}

ModelFile load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open model file: " + path);
    json body;
    try {
        f >> body;
    } catch (const json::exception& e) {
        throw IoError("corrupt model file " + path + ": " + e.what());
    }

    int version = body.value("schema_version", -1);
    if (version != kSchemaVersion)
        throw ValidationError("unsupported model schema_version " + std::to_string(version) +
                              " (supported: " + std::to_string(kSchemaVersion) + ")");

    ModelFile mf;
    mf.schema_version = version;
    mf.kind = body.at("kind").get<std::string>();
    mf.feature_names = body.at("feature_names").get<std::vector<std::string>>();
    const json& pp = body.at("preprocess");
    mf.preprocess.median = pp.at("median").get<std::vector<double>>();
    mf.preprocess.mean = pp.at("mean").get<std::vector<double>>();
    mf.preprocess.stddev = pp.at("stddev").get<std::vector<double>>();
    mf.threshold = body.at("threshold").get<double>();
    mf.metadata = body.value("metadata", json::object());

    std::size_t d = mf.feature_names.size();
    const json& payload = body.at("payload");
    if (mf.kind == "gbm")
        mf.model = gbm_from_json(payload, d);
    else if (mf.kind == "hybrid")
        mf.model = hybrid_from_json(payload, d);
    else if (mf.kind == "ssrf" || mf.kind == "rf")
        mf.model = ssrf_from_json(payload, d);
    else
        throw ValidationError("unknown model kind: " + mf.kind);

    // Verify checksum against a canonical re-dump of the checksummed body.
    std::string expected = body.at("checksum").get<std::string>();
    std::string actual = fnv1a64_hex(model_payload_dump(mf));
    if (expected != actual)
        throw IoError("model file checksum mismatch: " + path);
    return mf;
}

std::string dataset_fingerprint(const Dataset& ds) {
    std::ostringstream ss;
    ss << ds.n_rows << "x" << ds.n_cols << ":";
    std::string blob(reinterpret_cast<const char*>(ds.features.data()),
                     ds.features.size() * sizeof(double));
    blob.append(reinterpret_cast<const char*>(ds.labels.data()),
                ds.labels.size() * sizeof(double));
    ss << fnv1a64_hex(blob);
    return ss.str();
}

}  // namespace fraudtree
