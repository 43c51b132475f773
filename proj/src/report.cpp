#include "fraudtree/report.hpp"

#include <cstdio>
#include <sstream>

namespace fraudtree {

using nlohmann::json;

namespace {

json opt_to_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

std::string pct(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", *v * 100.0);
    return buf;
}

std::string raw(const std::optional<double>& v, int digits = 3) {
    if (!v) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, *v);
    return buf;
}

}  // namespace

json report_to_json(const MetricsReport& rep) {
    return json{{"accuracy", rep.accuracy},
                {"precision", opt_to_json(rep.precision)},
                {"recall", opt_to_json(rep.recall)},
                {"f1", opt_to_json(rep.f1)},
                {"auc_roc", opt_to_json(rep.auc_roc)},
                {"threshold", rep.threshold},
                {"confusion", json{{"tp", rep.confusion.tp},
                                   {"fp", rep.confusion.fp},
                                   {"fn", rep.confusion.fn},
                                   {"tn", rep.confusion.tn}}}};
}

std::string report_to_text(const MetricsReport& rep) {
    std::ostringstream out;
    out << "Index       Test Results\n";
    out << "Accuracy    " << pct(rep.accuracy) << "\n";
    out << "Precision   " << pct(rep.precision) << "\n";
    out << "Recall      " << pct(rep.recall) << "\n";
    out << "F1-Score    " << pct(rep.f1) << "\n";
    out << "AUC-ROC     " << raw(rep.auc_roc) << "\n";
    out << "Threshold   " << raw(rep.threshold) << "\n";
    out << "Confusion   TP=" << rep.confusion.tp << " FP=" << rep.confusion.fp
        << " FN=" << rep.confusion.fn << " TN=" << rep.confusion.tn << "\n";
    return out.str();
}

json benchmark_to_json(const std::vector<BenchmarkRow>& rows) {
    json out = json::array();
    for (const auto& row : rows) {
        json r{{"model", row.model}};
        if (row.report)
            r["metrics"] = report_to_json(*row.report);
        else
            r["error"] = row.error;
        out.push_back(std::move(r));
    }
    return json{{"rows", std::move(out)}};
}

std::string benchmark_to_text(const std::vector<BenchmarkRow>& rows) {
    std::ostringstream out;
    out << "Model       Accuracy (%)  Precision (%)  Recall (%)  F1-Score (%)  AUC-ROC\n";
    for (const auto& row : rows) {
        char name[16];
        std::snprintf(name, sizeof(name), "%-10s", row.model.c_str());
        out << name << "  ";
        if (!row.report) {
            out << "error: " << row.error << "\n";
            continue;
        }
        const auto& rep = *row.report;
        auto cell = [](const std::optional<double>& v) {
            if (!v) return std::string("n/a     ");
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%-8.2f", *v * 100.0);
            return std::string(buf);
        };
        out << cell(rep.accuracy) << "      " << cell(rep.precision) << "       " << cell(rep.recall)
            << "    " << cell(rep.f1) << "      " << raw(rep.auc_roc) << "\n";
    }
    return out.str();
}

}  // namespace fraudtree
