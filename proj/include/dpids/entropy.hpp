// Streaming entropy over one observation window of 2^log2_window packets.
//
// Maintains S = sum over keys of g(count) incrementally: each arrival moves
// one key's count from c-1 to c, so S grows by g(c) - g(c-1), two table
// lookups and one register update. At window end,
//   H = log2(W) - S / W
// needs only a shift, a subtract and a clamp to [0, log2(W)].
#pragma once

#include <algorithm>
#include <cstdint>
#include <span>

#include "dpids/error.hpp"
#include "dpids/fixed_point.hpp"
#include "dpids/log_table.hpp"
#include "dpids/op_budget.hpp"
#include "dpids/register_array.hpp"

namespace dpids {

template <typename Estimator>
class EntropyPipeline {
  public:
    EntropyPipeline(int log2_window, Estimator estimator, const LogTable* table)
        : log2_window_(log2_window), estimator_(std::move(estimator)),
          table_(table), s_(1) {
        if (log2_window < 1 || log2_window > 20) {
            throw ArgumentError("EntropyPipeline: log2_window must be in [1, 20]");
        }
        if (table_ == nullptr) {
            throw ArgumentError("EntropyPipeline: log table required");
        }
        if (table_->max_x() < window_size()) {
            throw ArgumentError("EntropyPipeline: log table domain smaller than window");
        }
    }

    std::uint32_t window_size() const { return 1u << log2_window_; }
    int log2_window() const { return log2_window_; }

    // Per-packet path: estimator update, two g lookups, one S update.
    void absorb(std::span<const std::uint8_t> key, OpBudget* budget = nullptr) {
        const std::int32_t c_new = estimator_.update(key, budget);
        const std::int32_t w = static_cast<std::int32_t>(window_size());
        const std::int32_t x_new = std::clamp(c_new, 1, w);
        const std::int32_t x_prev = std::clamp(c_new - 1, 1, w);
        const FixedPoint g_new = table_->lookup(static_cast<std::uint32_t>(x_new), budget);
        const FixedPoint g_prev =
            table_->lookup(static_cast<std::uint32_t>(x_prev), budget);
        s_.add(0, (g_new - g_prev).raw(), budget);
    }

    FixedPoint s_value() const { return FixedPoint::from_raw(s_.read(0)); }

    // H for the window accumulated so far, clamped to [0, log2 W].
    FixedPoint entropy() const {
        const std::int32_t log2w_raw = static_cast<std::int32_t>(log2_window_)
                                       << FixedPoint::kFractionBits;
        const std::int32_t h = log2w_raw - (s_.read(0) >> log2_window_);
        return FixedPoint::from_raw(std::clamp(h, 0, log2w_raw));
    }

    // H at the full precision of the S register, in units of 2^-4/W bits:
    // W * log2(W) - S before the normalizing shift that entropy() applies.
    // The 13-odd bits the shift would discard carry the sub-ulp window noise
    // the traffic model needs to size its deviation register.
    std::int64_t entropy_fine_raw() const {
        const std::int64_t max_fine = static_cast<std::int64_t>(log2_window_)
                                      << (FixedPoint::kFractionBits + log2_window_);
        const std::int64_t h = max_fine - s_.read(0);
        return std::clamp<std::int64_t>(h, 0, max_fine);
    }

    // Window-boundary maintenance: clears sketch and S, uncharged.
    void end_of_window() {
        estimator_.reset();
        s_.reset();
    }

    const Estimator& estimator() const { return estimator_; }

  private:
    int log2_window_;
    Estimator estimator_;
    const LogTable* table_;
    Register32 s_;
};

}  // namespace dpids
