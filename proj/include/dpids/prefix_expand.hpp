// Range-to-prefix expansion for installing range rules into prefix-match
// hardware. Greedy maximal aligned blocks; the result is the minimal prefix
// cover of the range, at most 2*(width-1) entries.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpids/error.hpp"

namespace dpids {

struct PrefixSpec {
    std::uint64_t value = 0;
    int len = 0;  // fixed leading bits; width - len trailing wildcards

    bool operator==(const PrefixSpec&) const = default;
};

inline std::vector<PrefixSpec> expand_range(std::uint64_t lo, std::uint64_t hi,
                                            int width) {
    if (width < 1 || width > 63) {
        throw ArgumentError("expand_range: width must be in [1, 63]");
    }
    const std::uint64_t cap = (std::uint64_t{1} << width) - 1;
    if (lo > hi || hi > cap) {
        throw ArgumentError("expand_range: need lo <= hi <= 2^width - 1");
    }
    std::vector<PrefixSpec> out;
    std::uint64_t cur = lo;
    for (;;) {
        int b = 0;
        while (b < width && (cur & ((std::uint64_t{1} << (b + 1)) - 1)) == 0 &&
               cur + ((std::uint64_t{1} << (b + 1)) - 1) <= hi) {
            ++b;
        }
        out.push_back({cur, width - b});
        const std::uint64_t block = std::uint64_t{1} << b;
        if (hi - cur < block) break;  // covered through hi
        cur += block;
    }
    return out;
}

inline std::string prefix_pattern(const PrefixSpec& p, int width) {
    std::string s;
    for (int i = width - 1; i >= 0; --i) {
        if (width - p.len > i) {
            s.push_back('*');
        } else {
            s.push_back((p.value >> i) & 1 ? '1' : '0');
        }
    }
    return s;
}

}  // namespace dpids
