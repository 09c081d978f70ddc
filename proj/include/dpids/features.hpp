// Feature vectors derived from flow records for the control-plane
// classifiers. All integer arithmetic; divisions floor. Unset IAT extremes
// and undefined ratios (single-packet flows) map to zero.
#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "dpids/flow.hpp"

namespace dpids {

constexpr std::size_t kFeatureCount = 10;

using FeatureVector = std::array<std::int64_t, kFeatureCount>;

constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "duration_us", "pkt_count", "pkt_rate",  "mean_payload", "min_payload",
    "max_payload", "mean_iat",  "min_iat",   "max_iat",      "iat_var",
};

inline FeatureVector compose_features(const FlowStats& s) {
    FeatureVector f{};
    const std::int64_t duration =
        static_cast<std::int64_t>(s.last_ts - s.first_ts);
    const std::int64_t n = s.pkt_count;
    f[0] = duration;
    f[1] = n;
    f[2] = duration > 0 ? n * 1'000'000 / duration : 0;
    f[3] = n > 0 ? static_cast<std::int64_t>(s.payload_bytes) / n : 0;
    f[4] = s.min_payload;
    f[5] = s.max_payload;
    if (n >= 2) {
        const std::int64_t gaps = n - 1;
        const std::int64_t mean_iat = static_cast<std::int64_t>(s.sum_iat) / gaps;
        f[6] = mean_iat;
        f[7] = s.min_iat == FlowStats::kIatUnset ? 0 : s.min_iat;
        f[8] = s.max_iat == FlowStats::kIatUnset ? 0 : s.max_iat;
        const std::int64_t var =
            static_cast<std::int64_t>(s.sum_iat_sq) / gaps - mean_iat * mean_iat;
        f[9] = var > 0 ? var : 0;
    }
    return f;
}

}  // namespace dpids
