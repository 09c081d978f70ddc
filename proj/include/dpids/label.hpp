// Classifier classes.
#pragma once

#include <string>
#include <string_view>

#include "dpids/error.hpp"

namespace dpids {

enum class Label : std::uint8_t { benign = 0, ddos = 1 };

inline std::string_view label_name(Label l) {
    return l == Label::benign ? "benign" : "ddos";
}

inline Label label_from_name(std::string_view s) {
    if (s == "benign") return Label::benign;
    if (s == "ddos") return Label::ddos;
    throw ArgumentError("unknown label '" + std::string(s) + "'");
}

}  // namespace dpids
