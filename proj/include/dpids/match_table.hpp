// Match-action tables over a single key of up to 64 bits. One match kind per
// table (exact, longest-prefix or range), mirroring how a pipeline stage is
// declared. A lookup is one stateful op; entry installation is control-plane
// work and free.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dpids/error.hpp"
#include "dpids/op_budget.hpp"

namespace dpids {

enum class MatchKind { exact, lpm, range };

struct TableEntry {
    // exact: key = value, prefix_len/range unused.
    // lpm:   key = prefix value (low W-len bits zero), prefix_len in [0, W].
    // range: [lo, hi] inclusive, priority breaks overlaps (larger wins).
    std::uint64_t key = 0;
    int prefix_len = 0;
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
    std::int32_t priority = 0;
    std::int64_t action = 0;
};

class MatchActionTable {
  public:
    MatchActionTable(MatchKind kind, int key_width)
        : kind_(kind), width_(key_width) {
        if (key_width < 1 || key_width > 64) {
            throw ArgumentError("MatchActionTable: key width must be in [1, 64]");
        }
    }

    MatchKind kind() const { return kind_; }
    int key_width() const { return width_; }
    std::size_t size() const {
        if (kind_ == MatchKind::range) return range_.size();
        if (kind_ == MatchKind::exact) return exact_.size();
        std::size_t n = 0;
        for (const auto& [len, m] : lpm_) n += m.size();
        return n;
    }

    void set_default_action(std::int64_t action) { default_ = action; }
    std::optional<std::int64_t> default_action() const { return default_; }

    void add_entry(const TableEntry& e) {
        switch (kind_) {
            case MatchKind::exact: add_exact_(e); break;
            case MatchKind::lpm: add_lpm_(e); break;
            case MatchKind::range: add_range_(e); break;
        }
    }

    // Longest prefix wins for lpm; highest priority wins for range.
    // Miss falls through to the default action when one is set.
    std::optional<std::int64_t> lookup(std::uint64_t key,
                                       OpBudget* budget = nullptr) const {
        check_key_(key, "lookup key");
        if (budget != nullptr) budget->charge();
        switch (kind_) {
            case MatchKind::exact: {
                auto it = exact_.find(key);
                if (it != exact_.end()) return it->second;
                break;
            }
            case MatchKind::lpm: {
                // lpm_ is keyed by prefix length in descending order.
                for (const auto& [len, entries] : lpm_) {
                    auto it = entries.find(mask_(key, len));
                    if (it != entries.end()) return it->second;
                }
                break;
            }
            case MatchKind::range: {
                const TableEntry* best = nullptr;
                for (const auto& e : range_) {
                    if (key < e.lo || key > e.hi) continue;
                    if (best == nullptr || e.priority > best->priority) best = &e;
                }
                if (best != nullptr) return best->action;
                break;
            }
        }
        return default_;
    }

  private:
    void check_key_(std::uint64_t v, const char* what) const {
        if (width_ < 64 && v >= (1ull << width_)) {
            throw ArgumentError(std::string(what) + " does not fit key width " +
                                std::to_string(width_));
        }
    }

    std::uint64_t mask_(std::uint64_t key, int len) const {
        if (len == 0) return 0;
        return key & ~((width_ - len == 64) ? ~0ull : ((1ull << (width_ - len)) - 1));
    }

    void add_exact_(const TableEntry& e) {
        check_key_(e.key, "exact key");
        if (!exact_.emplace(e.key, e.action).second) {
            throw ArgumentError("duplicate exact key");
        }
    }

    void add_lpm_(const TableEntry& e) {
        if (e.prefix_len < 0 || e.prefix_len > width_) {
            throw ArgumentError("prefix length out of [0, width]");
        }
        check_key_(e.key, "prefix");
        if (mask_(e.key, e.prefix_len) != e.key) {
            throw ArgumentError("prefix has nonzero bits past its length");
        }
        auto& bucket = lpm_[e.prefix_len];
        if (!bucket.emplace(e.key, e.action).second) {
            throw ArgumentError("duplicate prefix");
        }
    }

    void add_range_(const TableEntry& e) {
        check_key_(e.lo, "range lo");
        check_key_(e.hi, "range hi");
        if (e.lo > e.hi) {
            throw ArgumentError("range lo exceeds hi");
        }
        for (const auto& other : range_) {
            const bool overlap = e.lo <= other.hi && other.lo <= e.hi;
            if (overlap && other.priority == e.priority) {
                throw ArgumentError("overlapping ranges need distinct priorities");
            }
        }
        range_.push_back(e);
    }

    MatchKind kind_;
    int width_;
    std::optional<std::int64_t> default_;
    std::unordered_map<std::uint64_t, std::int64_t> exact_;
    std::map<int, std::unordered_map<std::uint64_t, std::int64_t>, std::greater<>> lpm_;
    std::vector<TableEntry> range_;
};

}  // namespace dpids
