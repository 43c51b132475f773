#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fraudtree/dataset.hpp"
#include "fraudtree/gbm.hpp"
#include "fraudtree/hybrid.hpp"
#include "fraudtree/ssrf.hpp"

namespace fraudtree {

inline constexpr int kSchemaVersion = 1;

// On-disk model container: JSON with an embedded checksum over everything
// that affects predictions. "rf" is an SSRF payload fitted through the
// plain-RF path.
struct ModelFile {
    int schema_version = kSchemaVersion;
    std::string kind;  // rf | gbm | ssrf | hybrid
    std::vector<std::string> feature_names;
    PreprocessStats preprocess;
    double threshold = 0.5;
    nlohmann::json metadata;  // seed, timestamps, dataset fingerprint; excluded from checksum
    std::variant<SsrfModel, GbmModel, HybridModel> model;

    double predict_proba(std::span<const double> x) const;
};

nlohmann::json tree_to_json(const TreeNode& node);
TreePtr tree_from_json(const nlohmann::json& j);

nlohmann::json ssrf_to_json(const SsrfModel& model);
SsrfModel ssrf_from_json(const nlohmann::json& j, std::size_t n_features);

nlohmann::json gbm_to_json(const GbmModel& model);
GbmModel gbm_from_json(const nlohmann::json& j, std::size_t n_features);

nlohmann::json hybrid_to_json(const HybridModel& model);
HybridModel hybrid_from_json(const nlohmann::json& j, std::size_t n_features);

// The checksummed portion of the file, canonically serialized.
std::string model_payload_dump(const ModelFile& mf);

void save_model(const ModelFile& mf, const std::string& path);
ModelFile load_model(const std::string& path);

std::string dataset_fingerprint(const Dataset& ds);

}  // namespace fraudtree
