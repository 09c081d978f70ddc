// Per-key frequency estimation inside one observation window.
//
// CountSketch is the deployable estimator: depth x width signed counters,
// per-row index and sign hashes, median-of-rows readout. Updating a key moves
// every row's sign-corrected counter up by exactly one, so the median (and
// with it the estimate) also rises by exactly one: callers may treat the
// previous estimate as estimate-1 without a second readout.
//
// ExactCounter is the reference oracle with identical interface.
#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dpids/error.hpp"
#include "dpids/hash.hpp"
#include "dpids/op_budget.hpp"
#include "dpids/register_array.hpp"

namespace dpids {

class CountSketch {
  public:
    CountSketch(std::size_t depth, std::size_t width, std::uint64_t seed)
        : depth_(depth), width_(width), cells_(depth == 0 || width == 0 ? 1 : depth * width) {
        if (depth == 0 || width == 0) {
            throw ArgumentError("CountSketch: depth and width must be >= 1");
        }
        for (std::size_t row = 0; row < depth_; ++row) {
            idx_seeds_.push_back(derive_seed(seed, 2 * row));
            sign_seeds_.push_back(derive_seed(seed, 2 * row + 1));
        }
    }

    std::size_t depth() const { return depth_; }
    std::size_t width() const { return width_; }

    // Stateful ops per update or estimate: one index hash, one sign hash and
    // one counter access per row.
    static constexpr std::uint32_t ops_per_access(std::size_t depth) {
        return static_cast<std::uint32_t>(3 * depth);
    }

    // Counts one occurrence of the key, returns the post-update estimate.
    std::int32_t update(std::span<const std::uint8_t> key, OpBudget* budget = nullptr) {
        std::vector<std::int32_t> corrected(depth_);
        for (std::size_t row = 0; row < depth_; ++row) {
            const auto idx = hash_lane(key, idx_seeds_[row], width_, budget);
            const std::int32_t sign = sign_of_(key, row, budget);
            const std::int32_t post = cells_.add(row * width_ + idx, sign, budget);
            corrected[row] = post * sign;
        }
        return median_(corrected);
    }

    std::int32_t estimate(std::span<const std::uint8_t> key,
                          OpBudget* budget = nullptr) const {
        std::vector<std::int32_t> corrected(depth_);
        for (std::size_t row = 0; row < depth_; ++row) {
            const auto idx = hash_lane(key, idx_seeds_[row], width_, budget);
            const std::int32_t sign = sign_of_(key, row, budget);
            corrected[row] = cells_.read(row * width_ + idx, budget) * sign;
        }
        return median_(corrected);
    }

    void reset() { cells_.reset(); }

  private:
    std::int32_t sign_of_(std::span<const std::uint8_t> key, std::size_t row,
                          OpBudget* budget) const {
        return hash_lane(key, sign_seeds_[row], 2, budget) == 0 ? 1 : -1;
    }

    // Median of the sign-corrected rows, floored to zero: a frequency is
    // never negative. Even depth takes the floor midpoint of the central pair.
    static std::int32_t median_(std::vector<std::int32_t>& v) {
        std::sort(v.begin(), v.end());
        const std::size_t d = v.size();
        std::int32_t med;
        if (d % 2 == 1) {
            med = v[d / 2];
        } else {
            med = static_cast<std::int32_t>(
                (static_cast<std::int64_t>(v[d / 2 - 1]) + v[d / 2]) >> 1);
        }
        return std::max(med, 0);
    }

    std::size_t depth_;
    std::size_t width_;
    Register32 cells_;
    std::vector<std::uint64_t> idx_seeds_;
    std::vector<std::uint64_t> sign_seeds_;
};

// Collision-free reference estimator. Models a single perfect register
// access per touch for budget purposes.
class ExactCounter {
  public:
    std::int32_t update(std::span<const std::uint8_t> key, OpBudget* budget = nullptr) {
        if (budget != nullptr) budget->charge();
        return ++counts_[key_of_(key)];
    }

    std::int32_t estimate(std::span<const std::uint8_t> key,
                          OpBudget* budget = nullptr) const {
        if (budget != nullptr) budget->charge();
        const auto it = counts_.find(key_of_(key));
        return it == counts_.end() ? 0 : it->second;
    }

    void reset() { counts_.clear(); }

    std::size_t distinct_keys() const { return counts_.size(); }

  private:
    static std::string key_of_(std::span<const std::uint8_t> key) {
        return std::string(reinterpret_cast<const char*>(key.data()), key.size());
    }

    std::unordered_map<std::string, std::int32_t> counts_;
};

}  // namespace dpids
