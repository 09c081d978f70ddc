// Binary classification accounting and deterministic metric emission.
// Metrics never include wall-clock values: a (config, seed) pair must
// produce byte-identical output on every run.
#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "dpids/error.hpp"

namespace dpids {

struct BinaryCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    void add(bool truth, bool predicted) {
        if (truth) {
            predicted ? ++tp : ++fn;
        } else {
            predicted ? ++fp : ++tn;
        }
    }

    std::uint64_t total() const { return tp + fp + tn + fn; }

    double accuracy() const {
        return total() == 0 ? 0.0
                            : static_cast<double>(tp + tn) /
                                  static_cast<double>(total());
    }

    double precision() const {
        return tp + fp == 0 ? 0.0
                            : static_cast<double>(tp) / static_cast<double>(tp + fp);
    }

    double recall() const {
        return tp + fn == 0 ? 0.0
                            : static_cast<double>(tp) / static_cast<double>(tp + fn);
    }

    double f1() const {
        const double p = precision();
        const double r = recall();
        return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    }

    void fill_json(nlohmann::json& j) const {
        j["tp"] = tp;
        j["fp"] = fp;
        j["tn"] = tn;
        j["fn"] = fn;
        j["accuracy"] = accuracy();
        j["precision"] = precision();
        j["recall"] = recall();
        j["f1"] = f1();
    }
};

inline std::string metrics_to_json_text(const nlohmann::json& j) {
    return j.dump(2) + "\n";
}

// One header row and one value row; keys in the object's (sorted) order.
inline std::string metrics_to_csv_text(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ArgumentError("csv metrics need a JSON object");
    }
    std::string header, row;
    bool first = true;
    for (const auto& [key, value] : j.items()) {
        if (!first) {
            header += ",";
            row += ",";
        }
        first = false;
        header += key;
        if (value.is_string()) {
            row += value.get<std::string>();
        } else if (value.is_null()) {
            // empty cell
        } else {
            row += value.dump();
        }
    }
    return header + "\n" + row + "\n";
}

}  // namespace dpids
