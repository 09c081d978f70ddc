// Stateful register arrays: fixed-size vectors of 32- or 64-bit signed
// counters addressable by index, the only mutable per-packet state the
// pipeline model exposes. Every read/add/write is one stateful op.
#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dpids/error.hpp"
#include "dpids/op_budget.hpp"

namespace dpids {

template <typename T>
class RegisterArray {
    static_assert(std::is_same_v<T, std::int32_t> || std::is_same_v<T, std::int64_t>,
                  "register width is 32 or 64 bits");

  public:
    explicit RegisterArray(std::size_t size) : cells_(size, T{0}) {
        if (size == 0) {
            throw ArgumentError("RegisterArray: size must be >= 1");
        }
    }

    std::size_t size() const { return cells_.size(); }

    T read(std::size_t idx, OpBudget* budget = nullptr) const {
        check_(idx);
        if (budget != nullptr) budget->charge();
        return cells_[idx];
    }

    // Read-modify-write: adds delta, stores, returns the post-add value.
    // Overflow of the register width is an error, not wraparound.
    T add(std::size_t idx, T delta, OpBudget* budget = nullptr) {
        check_(idx);
        if (budget != nullptr) budget->charge();
        const T cur = cells_[idx];
        if (delta > 0 && cur > std::numeric_limits<T>::max() - delta) {
            throw ArithmeticOverflow("register add overflow at index " +
                                     std::to_string(idx));
        }
        if (delta < 0 && cur < std::numeric_limits<T>::min() - delta) {
            throw ArithmeticOverflow("register add underflow at index " +
                                     std::to_string(idx));
        }
        cells_[idx] = cur + delta;
        return cells_[idx];
    }

    void write(std::size_t idx, T value, OpBudget* budget = nullptr) {
        check_(idx);
        if (budget != nullptr) budget->charge();
        cells_[idx] = value;
    }

    // Bulk clear between windows; maintenance, never charged.
    void reset() { std::fill(cells_.begin(), cells_.end(), T{0}); }

  private:
    void check_(std::size_t idx) const {
        if (idx >= cells_.size()) {
            throw IndexError("register index " + std::to_string(idx) +
                             " out of range [0, " + std::to_string(cells_.size()) + ")");
        }
    }

    std::vector<T> cells_;
};

using Register32 = RegisterArray<std::int32_t>;
using Register64 = RegisterArray<std::int64_t>;

}  // namespace dpids
