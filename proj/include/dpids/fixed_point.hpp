// Signed 28.4 fixed-point arithmetic: the only real-number representation
// available to the data-plane pipelines. All operations reduce to add,
// subtract, compare and shift on the 32-bit raw value.
#pragma once

#include <compare>
#include <cstdint>
#include <limits>

#include "dpids/error.hpp"

namespace dpids {

class FixedPoint {
public:
    // Fractional bit count. Fixed for the whole artifact.
    static constexpr int kFractionBits = 4;
    static constexpr std::int32_t kOne = std::int32_t{1} << kFractionBits;

    constexpr FixedPoint() = default;

    static constexpr FixedPoint from_raw(std::int32_t raw) {
        FixedPoint f;
        f.raw_ = raw;
        return f;
    }

    static FixedPoint from_int(std::int32_t v) {
        return from_raw(checked(static_cast<std::int64_t>(v) << kFractionBits,
                                "fixed-point from_int overflow"));
    }

    // Nearest representable value; ties round away from zero. Intended for
    // control-plane table construction, never for per-packet arithmetic.
    static FixedPoint from_double(double v) {
        const double scaled = v * kOne;
        const double rounded = scaled >= 0.0 ? scaled + 0.5 : scaled - 0.5;
        return from_raw(checked(static_cast<std::int64_t>(rounded),
                                "fixed-point from_double overflow"));
    }

    constexpr std::int32_t raw() const { return raw_; }

    // Display-only escape hatch; pipeline code never consumes this.
    constexpr double to_double() const {
        return static_cast<double>(raw_) / kOne;
    }

    FixedPoint operator+(FixedPoint rhs) const {
        return from_raw(checked(
            static_cast<std::int64_t>(raw_) + rhs.raw_, "fixed-point add overflow"));
    }

    FixedPoint operator-(FixedPoint rhs) const {
        return from_raw(checked(
            static_cast<std::int64_t>(raw_) - rhs.raw_, "fixed-point sub overflow"));
    }

    // Arithmetic shifts on the raw value: division/multiplication by 2^n.
    FixedPoint shifted_right(int n) const {
        return from_raw(raw_ >> n);
    }

    FixedPoint shifted_left(int n) const {
        return from_raw(checked(static_cast<std::int64_t>(raw_) << n,
                                "fixed-point shift overflow"));
    }

    constexpr auto operator<=>(const FixedPoint&) const = default;

private:
    static std::int32_t checked(std::int64_t v, const char* what) {
        if (v < std::numeric_limits<std::int32_t>::min() ||
            v > std::numeric_limits<std::int32_t>::max()) {
            throw ArithmeticOverflow(what);
        }
        return static_cast<std::int32_t>(v);
    }

    std::int32_t raw_ = 0;
};

// x * k where k is a non-negative fixed-point coefficient, realized as a
// shift-add over the set bits of k's raw value (the data-plane way to scale
// by a constant). Exact: result raw = (x.raw * k.raw) >> kFractionBits.
inline FixedPoint scale_shift_add(FixedPoint x, FixedPoint k) {
    if (k.raw() < 0) {
        throw ArgumentError("scale_shift_add requires a non-negative coefficient");
    }
    std::int64_t acc = 0;
    const std::int64_t xr = x.raw();
    std::uint32_t bits = static_cast<std::uint32_t>(k.raw());
    for (int b = 0; bits != 0; ++b, bits >>= 1) {
        if (bits & 1u) {
            acc += xr << b;
        }
    }
    acc >>= FixedPoint::kFractionBits;
    if (acc < std::numeric_limits<std::int32_t>::min() ||
        acc > std::numeric_limits<std::int32_t>::max()) {
        throw ArithmeticOverflow("fixed-point scale overflow");
    }
    return FixedPoint::from_raw(static_cast<std::int32_t>(acc));
}

}  // namespace dpids
