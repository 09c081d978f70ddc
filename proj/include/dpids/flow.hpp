// Windowed per-flow statistics collection.
//
// Flows are 5-tuples tracked in a hash-addressed slot table, one flow per
// slot. A colliding new flow evicts the resident record, which is queued for
// the window's report rather than dropped; together with the full flush at
// each window boundary this keeps the account conservative: every packet fed
// in lands in exactly one reported record.
//
// Field widths mirror the report wire format, so values saturate in memory
// at their wire caps and a record survives serialization unchanged.
#pragma once

#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <vector>

#include "dpids/error.hpp"
#include "dpids/hash.hpp"
#include "dpids/op_budget.hpp"
#include "dpids/packet.hpp"

namespace dpids {

struct FlowKey {
    std::uint32_t src_ip = 0;
    std::uint32_t dst_ip = 0;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint8_t proto = 0;

    static constexpr std::size_t kWireBytes = 13;

    bool operator==(const FlowKey&) const = default;

    void to_bytes(std::uint8_t out[kWireBytes]) const {
        out[0] = static_cast<std::uint8_t>(src_ip >> 24);
        out[1] = static_cast<std::uint8_t>(src_ip >> 16);
        out[2] = static_cast<std::uint8_t>(src_ip >> 8);
        out[3] = static_cast<std::uint8_t>(src_ip);
        out[4] = static_cast<std::uint8_t>(dst_ip >> 24);
        out[5] = static_cast<std::uint8_t>(dst_ip >> 16);
        out[6] = static_cast<std::uint8_t>(dst_ip >> 8);
        out[7] = static_cast<std::uint8_t>(dst_ip);
        out[8] = static_cast<std::uint8_t>(src_port >> 8);
        out[9] = static_cast<std::uint8_t>(src_port);
        out[10] = static_cast<std::uint8_t>(dst_port >> 8);
        out[11] = static_cast<std::uint8_t>(dst_port);
        out[12] = proto;
    }

    static FlowKey from_bytes(const std::uint8_t b[kWireBytes]) {
        FlowKey k;
        k.src_ip = (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
                   (std::uint32_t{b[2]} << 8) | b[3];
        k.dst_ip = (std::uint32_t{b[4]} << 24) | (std::uint32_t{b[5]} << 16) |
                   (std::uint32_t{b[6]} << 8) | b[7];
        k.src_port = static_cast<std::uint16_t>((b[8] << 8) | b[9]);
        k.dst_port = static_cast<std::uint16_t>((b[10] << 8) | b[11]);
        k.proto = b[12];
        return k;
    }

    static FlowKey of(const Packet& p) {
        return {p.src_ip, p.dst_ip, p.src_port, p.dst_port, p.proto};
    }
};

// Saturation caps are the wire widths: 32-bit packet count, 48-bit byte and
// time fields, 24-bit IAT extremes. 0xFFFFFF marks min/max IAT as unset
// (single-packet flow), 0xFFFFFE is the saturated ceiling.
struct FlowStats {
    static constexpr std::uint64_t kCap48 = (std::uint64_t{1} << 48) - 1;
    static constexpr std::uint32_t kIatUnset = 0xFFFFFF;
    static constexpr std::uint32_t kIatCap = 0xFFFFFE;

    std::uint32_t pkt_count = 0;
    std::uint64_t byte_count = 0;
    std::uint64_t payload_bytes = 0;
    std::uint64_t sum_iat = 0;
    std::uint64_t sum_iat_sq = 0;
    std::uint64_t first_ts = 0;
    std::uint64_t last_ts = 0;
    std::uint32_t min_iat = kIatUnset;
    std::uint32_t max_iat = kIatUnset;
    std::uint16_t min_payload = 0;
    std::uint16_t max_payload = 0;

    bool operator==(const FlowStats&) const = default;

    static std::uint64_t sat48_(std::uint64_t a, std::uint64_t b) {
        const std::uint64_t s = a + b;
        return s > kCap48 ? kCap48 : s;
    }

    void absorb(const Packet& p) {
        if (pkt_count == 0) {
            pkt_count = 1;
            byte_count = p.pkt_len;
            payload_bytes = p.payload_len;
            first_ts = p.ts_us;
            last_ts = p.ts_us;
            min_payload = p.payload_len;
            max_payload = p.payload_len;
            return;
        }
        if (pkt_count < UINT32_MAX) ++pkt_count;
        byte_count = sat48_(byte_count, p.pkt_len);
        payload_bytes = sat48_(payload_bytes, p.payload_len);

        const std::uint64_t iat = p.ts_us - last_ts;
        sum_iat = sat48_(sum_iat, iat);
        const std::uint64_t iat_sq =
            iat > 0xFFFFFF ? kCap48 : iat * iat;  // 2^48 squares past 24 bits
        sum_iat_sq = sat48_(sum_iat_sq, iat_sq);
        const std::uint32_t iat24 =
            iat > kIatCap ? kIatCap : static_cast<std::uint32_t>(iat);
        if (min_iat == kIatUnset || iat24 < min_iat) min_iat = iat24;
        if (max_iat == kIatUnset || iat24 > max_iat) max_iat = iat24;

        last_ts = p.ts_us;
        if (p.payload_len < min_payload) min_payload = p.payload_len;
        if (p.payload_len > max_payload) max_payload = p.payload_len;
    }
};

struct FlowRecord {
    FlowKey key;
    FlowStats stats;
    // Ground-truth sidecar for scoring; never serialized.
    std::uint32_t attack_pkts = 0;
};

struct CollectorConfig {
    int slots_log2 = 16;
    std::uint64_t window_us = 1'000'000;
    std::size_t max_flows_per_report = 65535;
    std::uint32_t op_limit = 32;
    std::uint64_t seed = 1;

    void validate() const {
        if (slots_log2 < 1 || slots_log2 > 24) {
            throw ConfigError("slots_log2 must be in [1, 24]");
        }
        if (window_us < 1) {
            throw ConfigError("window_us must be >= 1");
        }
        if (max_flows_per_report < 1 || max_flows_per_report > 65535) {
            throw ConfigError("max_flows_per_report must be in [1, 65535]");
        }
        if (op_limit < 1) {
            throw ConfigError("op_limit must be >= 1");
        }
    }
};

struct FlowWindow {
    std::uint32_t window_id = 0;
    std::vector<FlowRecord> flows;
};

class FlowCollector {
  public:
    explicit FlowCollector(const CollectorConfig& cfg) : cfg_(cfg), budget_(cfg.op_limit) {
        cfg_.validate();
        slots_.resize(std::size_t{1} << cfg.slots_log2);
    }

    // Feeds one packet; returns the flushed windows (usually none) that this
    // packet's timestamp closed.
    std::vector<FlowWindow> update(const Packet& p) {
        if (p.ts_us > FlowStats::kCap48) {
            throw ArgumentError("packet timestamp exceeds 48 bits");
        }
        if (started_ && p.ts_us < last_ts_) {
            throw TraceOrderError("packet timestamps must be non-decreasing");
        }
        last_ts_ = p.ts_us;

        std::vector<FlowWindow> out;
        const std::uint64_t win = p.ts_us / cfg_.window_us;
        if (!started_) {
            started_ = true;
            current_window_ = win;
        } else if (win != current_window_) {
            flush_into_(out);
            current_window_ = win;
        }

        std::uint8_t kb[FlowKey::kWireBytes];
        const FlowKey key = FlowKey::of(p);
        key.to_bytes(kb);
        const std::size_t idx = hash_lane(kb, cfg_.seed, slots_.size(), &budget_);

        Slot& s = slots_[idx];
        budget_.charge();  // slot read-modify-write
        if (s.dirty && !(s.rec.key == key)) {
            pending_.push_back(s.rec);  // evict and report
            ++evictions_;
            s = Slot{};
        }
        if (!s.dirty) {
            s.dirty = true;
            s.rec = FlowRecord{key, FlowStats{}, 0};
        }
        s.rec.stats.absorb(p);
        if (p.attack) ++s.rec.attack_pkts;

        const std::uint32_t used = budget_.used();
        if (used > max_ops_) max_ops_ = used;
        budget_.end_of_packet_checked();
        return out;
    }

    // Flushes the in-progress window. Call once at end of stream.
    std::vector<FlowWindow> finish() {
        std::vector<FlowWindow> out;
        if (started_) flush_into_(out);
        return out;
    }

    std::uint64_t evictions() const { return evictions_; }
    std::uint32_t max_ops_per_packet() const { return max_ops_; }

  private:
    struct Slot {
        bool dirty = false;
        FlowRecord rec;
    };

    void flush_into_(std::vector<FlowWindow>& out) {
        std::vector<FlowRecord> flows = std::move(pending_);
        pending_.clear();
        for (auto& s : slots_) {
            if (s.dirty) {
                flows.push_back(s.rec);
                s = Slot{};
            }
        }
        if (flows.empty()) return;
        if (current_window_ > UINT32_MAX) {
            throw ArgumentError("window id exceeds 32 bits");
        }
        // Chunk to the report capacity.
        for (std::size_t base = 0; base < flows.size();
             base += cfg_.max_flows_per_report) {
            FlowWindow w;
            w.window_id = static_cast<std::uint32_t>(current_window_);
            const std::size_t end =
                std::min(flows.size(), base + cfg_.max_flows_per_report);
            w.flows.assign(flows.begin() + static_cast<std::ptrdiff_t>(base),
                           flows.begin() + static_cast<std::ptrdiff_t>(end));
            out.push_back(std::move(w));
        }
    }

    CollectorConfig cfg_;
    OpBudget budget_;
    std::vector<Slot> slots_;
    std::vector<FlowRecord> pending_;
    bool started_ = false;
    std::uint64_t current_window_ = 0;
    std::uint64_t last_ts_ = 0;
    std::uint64_t evictions_ = 0;
    std::uint32_t max_ops_ = 0;
};

}  // namespace dpids
