#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraudtree/metrics.hpp"

namespace fraudtree {

nlohmann::json report_to_json(const MetricsReport& rep);

// Two-column layout: metric name, value. Percentages for the rate metrics,
// raw value for AUC-ROC.
std::string report_to_text(const MetricsReport& rep);

struct BenchmarkRow {
    std::string model;
    std::optional<MetricsReport> report;
    std::string error;  // set when this model failed to train/evaluate
};

nlohmann::json benchmark_to_json(const std::vector<BenchmarkRow>& rows);
std::string benchmark_to_text(const std::vector<BenchmarkRow>& rows);

}  // namespace fraudtree
