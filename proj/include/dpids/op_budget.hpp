// Per-packet budget of stateful pipeline primitives.
//
// A packet's traversal may invoke at most `limit` stateful operations: hash
// engine calls, stateful register accesses and match-table lookups. Pure ALU
// work (add, shift, compare) rides along with those primitives and is not
// charged separately. Window-boundary maintenance (bulk register clears done
// between packets) is likewise uncharged.
#pragma once

#include <cstdint>

#include "dpids/error.hpp"

namespace dpids {

enum class BudgetStatus { ok, violation };

class OpBudget {
  public:
    explicit OpBudget(std::uint32_t limit) : limit_(limit) {}

    void charge(std::uint32_t n = 1) { used_ += n; }

    std::uint32_t used() const { return used_; }
    std::uint32_t limit() const { return limit_; }

    // Called once per packet after the pipeline ran. Reports whether the
    // packet stayed within budget and resets the counter for the next packet.
    BudgetStatus end_of_packet() {
        const BudgetStatus st =
            used_ <= limit_ ? BudgetStatus::ok : BudgetStatus::violation;
        used_ = 0;
        return st;
    }

    // Same check, but throwing; for harnesses that treat overrun as fatal.
    void end_of_packet_checked() {
        const std::uint32_t used = used_;
        if (end_of_packet() == BudgetStatus::violation) {
            throw BudgetViolation("op budget exceeded", used);
        }
    }

    void reset() { used_ = 0; }

  private:
    std::uint32_t limit_;
    std::uint32_t used_ = 0;
};

}  // namespace dpids
