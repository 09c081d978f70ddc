#include <gtest/gtest.h>

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "dpids/error.hpp"
#include "dpids/features.hpp"
#include "dpids/flow.hpp"
#include "dpids/report.hpp"

namespace dpids {
namespace {

Packet pkt(std::uint64_t ts, std::uint32_t src, std::uint32_t dst,
           std::uint16_t sport, std::uint16_t dport, std::uint16_t payload,
           bool attack = false) {
    Packet p;
    p.ts_us = ts;
    p.src_ip = src;
    p.dst_ip = dst;
    p.src_port = sport;
    p.dst_port = dport;
    p.proto = 6;
    p.payload_len = payload;
    p.pkt_len = static_cast<std::uint16_t>(payload + 40);
    p.attack = attack;
    return p;
}

TEST(FlowStats, ThreePacketExample) {
    FlowStats s;
    s.absorb(pkt(0, 1, 2, 10, 20, 100));
    s.absorb(pkt(1000, 1, 2, 10, 20, 200));
    s.absorb(pkt(3000, 1, 2, 10, 20, 300));

    EXPECT_EQ(s.pkt_count, 3u);
    EXPECT_EQ(s.byte_count, 720u);
    EXPECT_EQ(s.payload_bytes, 600u);
    EXPECT_EQ(s.sum_iat, 3000u);
    EXPECT_EQ(s.sum_iat_sq, 5'000'000u);
    EXPECT_EQ(s.first_ts, 0u);
    EXPECT_EQ(s.last_ts, 3000u);
    EXPECT_EQ(s.min_iat, 1000u);
    EXPECT_EQ(s.max_iat, 2000u);
    EXPECT_EQ(s.min_payload, 100u);
    EXPECT_EQ(s.max_payload, 300u);

    const auto f = compose_features(s);
    EXPECT_EQ(f[0], 3000);     // duration_us
    EXPECT_EQ(f[1], 3);        // pkt_count
    EXPECT_EQ(f[2], 1000);     // pkt_rate
    EXPECT_EQ(f[3], 200);      // mean_payload
    EXPECT_EQ(f[4], 100);
    EXPECT_EQ(f[5], 300);
    EXPECT_EQ(f[6], 1500);     // mean_iat
    EXPECT_EQ(f[7], 1000);
    EXPECT_EQ(f[8], 2000);
    EXPECT_EQ(f[9], 250'000);  // iat_var
}

TEST(FlowStats, SinglePacketFlow) {
    FlowStats s;
    s.absorb(pkt(500, 1, 2, 10, 20, 80));
    EXPECT_EQ(s.pkt_count, 1u);
    EXPECT_EQ(s.min_iat, FlowStats::kIatUnset);
    EXPECT_EQ(s.max_iat, FlowStats::kIatUnset);
    EXPECT_EQ(s.first_ts, 500u);
    EXPECT_EQ(s.last_ts, 500u);

    const auto f = compose_features(s);
    EXPECT_EQ(f[0], 0);
    EXPECT_EQ(f[1], 1);
    EXPECT_EQ(f[2], 0);
    EXPECT_EQ(f[3], 80);
    EXPECT_EQ(f[6], 0);
    EXPECT_EQ(f[7], 0);
    EXPECT_EQ(f[8], 0);
    EXPECT_EQ(f[9], 0);
}

TEST(FlowStats, SaturatesAtWireCaps) {
    FlowStats s;
    s.absorb(pkt(0, 1, 2, 10, 20, 100));
    s.absorb(pkt(20'000'000, 1, 2, 10, 20, 100));  // 20s gap
    EXPECT_EQ(s.min_iat, FlowStats::kIatCap);
    EXPECT_EQ(s.max_iat, FlowStats::kIatCap);
    EXPECT_EQ(s.sum_iat, 20'000'000u);
    EXPECT_EQ(s.sum_iat_sq, FlowStats::kCap48);

    FlowStats t;
    t.absorb(pkt(0, 1, 2, 10, 20, 100));
    t.pkt_count = UINT32_MAX;
    t.byte_count = FlowStats::kCap48 - 10;
    t.absorb(pkt(5, 1, 2, 10, 20, 100));
    EXPECT_EQ(t.pkt_count, UINT32_MAX);
    EXPECT_EQ(t.byte_count, FlowStats::kCap48);
}

TEST(FlowKey, ByteRoundTrip) {
    const FlowKey k{0xc0a80101, 0x0a000001, 443, 51234, 17};
    std::uint8_t b[FlowKey::kWireBytes];
    k.to_bytes(b);
    EXPECT_EQ(FlowKey::from_bytes(b), k);
    EXPECT_EQ(b[0], 0xc0);
    EXPECT_EQ(b[12], 17);
}

TEST(FlowCollector, CollectsTwoFlowsInOneWindow) {
    CollectorConfig cfg;
    FlowCollector c(cfg);
    EXPECT_TRUE(c.update(pkt(100, 1, 2, 10, 20, 50)).empty());
    EXPECT_TRUE(c.update(pkt(200, 3, 4, 30, 40, 60)).empty());
    EXPECT_TRUE(c.update(pkt(300, 1, 2, 10, 20, 70)).empty());
    const auto ws = c.finish();
    ASSERT_EQ(ws.size(), 1u);
    EXPECT_EQ(ws[0].window_id, 0u);
    ASSERT_EQ(ws[0].flows.size(), 2u);
    std::uint64_t total = 0;
    for (const auto& f : ws[0].flows) total += f.stats.pkt_count;
    EXPECT_EQ(total, 3u);
    EXPECT_EQ(c.max_ops_per_packet(), 2u);
}

TEST(FlowCollector, RotatesOnWindowBoundary) {
    CollectorConfig cfg;  // 1s windows
    FlowCollector c(cfg);
    c.update(pkt(500'000, 1, 2, 10, 20, 50));
    const auto ws = c.update(pkt(1'500'000, 1, 2, 10, 20, 60));
    ASSERT_EQ(ws.size(), 1u);
    EXPECT_EQ(ws[0].window_id, 0u);
    ASSERT_EQ(ws[0].flows.size(), 1u);
    EXPECT_EQ(ws[0].flows[0].stats.pkt_count, 1u);

    const auto tail = c.finish();
    ASSERT_EQ(tail.size(), 1u);
    EXPECT_EQ(tail[0].window_id, 1u);
    // A new episode began in window 1.
    EXPECT_EQ(tail[0].flows[0].stats.first_ts, 1'500'000u);
}

TEST(FlowCollector, EvictsOnCollisionAndKeepsAccount) {
    CollectorConfig cfg;
    cfg.slots_log2 = 4;
    FlowCollector c(cfg);

    // Find two distinct keys that share a slot.
    std::uint8_t kb[FlowKey::kWireBytes];
    FlowKey a{1, 2, 3, 4, 6};
    a.to_bytes(kb);
    const auto slot_a = hash_lane(kb, cfg.seed, 16);
    std::uint32_t other = 0;
    for (std::uint32_t s = 2;; ++s) {
        FlowKey b{s, 2, 3, 4, 6};
        b.to_bytes(kb);
        if (hash_lane(kb, cfg.seed, 16) == slot_a) {
            other = s;
            break;
        }
    }

    c.update(pkt(0, 1, 2, 3, 4, 50));
    c.update(pkt(10, 1, 2, 3, 4, 50));
    c.update(pkt(20, other, 2, 3, 4, 60));  // evicts the first flow
    EXPECT_EQ(c.evictions(), 1u);
    const auto ws = c.finish();
    ASSERT_EQ(ws.size(), 1u);
    ASSERT_EQ(ws[0].flows.size(), 2u);
    EXPECT_EQ(ws[0].flows[0].key.src_ip, 1u);  // evicted record first
    EXPECT_EQ(ws[0].flows[0].stats.pkt_count, 2u);
    EXPECT_EQ(ws[0].flows[1].key.src_ip, other);
    EXPECT_EQ(ws[0].flows[1].stats.pkt_count, 1u);
}

// Conservation: every packet lands in exactly one reported record.
TEST(FlowCollector, ConservesPacketsUnderChurn) {
    CollectorConfig cfg;
    cfg.slots_log2 = 6;  // 64 slots, heavy collisions
    FlowCollector c(cfg);
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<std::uint32_t> srcs(1, 500);
    std::uniform_int_distribution<std::uint64_t> step(0, 2000);

    std::map<std::uint32_t, std::uint64_t> truth;
    std::map<std::uint32_t, std::uint64_t> got;
    std::uint64_t ts = 0;
    std::vector<FlowWindow> all;
    for (int i = 0; i < 20000; ++i) {
        ts += step(rng);
        const auto src = srcs(rng);
        ++truth[src];
        for (auto& w : c.update(pkt(ts, src, 7, 10, 20, 99))) {
            all.push_back(std::move(w));
        }
    }
    for (auto& w : c.finish()) all.push_back(std::move(w));

    std::uint64_t total = 0;
    for (const auto& w : all) {
        for (const auto& f : w.flows) {
            got[f.key.src_ip] += f.stats.pkt_count;
            total += f.stats.pkt_count;
        }
    }
    EXPECT_EQ(total, 20000u);
    EXPECT_EQ(got, truth);
    EXPECT_GT(c.evictions(), 0u);
}

TEST(FlowCollector, RejectsDisorderAndHugeTimestamps) {
    CollectorConfig cfg;
    FlowCollector c(cfg);
    c.update(pkt(1000, 1, 2, 3, 4, 50));
    EXPECT_THROW(c.update(pkt(999, 1, 2, 3, 4, 50)), TraceOrderError);
    EXPECT_THROW(c.update(pkt(std::uint64_t{1} << 48, 1, 2, 3, 4, 50)),
                 ArgumentError);
}

TEST(FlowCollector, ChunksOversizedWindows) {
    CollectorConfig cfg;
    cfg.max_flows_per_report = 3;
    FlowCollector c(cfg);
    for (std::uint32_t s = 1; s <= 10; ++s) {
        c.update(pkt(s, s, 2, 3, 4, 50));
    }
    const auto ws = c.finish();
    ASSERT_EQ(ws.size(), 4u);
    std::size_t flows = 0;
    for (const auto& w : ws) {
        EXPECT_EQ(w.window_id, 0u);
        EXPECT_LE(w.flows.size(), 3u);
        flows += w.flows.size();
    }
    EXPECT_EQ(flows, 10u);
}

TEST(FlowCollector, TracksAttackGroundTruth) {
    CollectorConfig cfg;
    FlowCollector c(cfg);
    c.update(pkt(0, 1, 2, 3, 4, 50, false));
    c.update(pkt(1, 1, 2, 3, 4, 50, true));
    c.update(pkt(2, 1, 2, 3, 4, 50, true));
    const auto ws = c.finish();
    ASSERT_EQ(ws[0].flows.size(), 1u);
    EXPECT_EQ(ws[0].flows[0].attack_pkts, 2u);
}

FlowRecord random_record(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::uint64_t> u48(0, FlowStats::kCap48);
    std::uniform_int_distribution<std::uint32_t> u32d;
    std::uniform_int_distribution<std::uint32_t> u24(0, 0xFFFFFF);
    std::uniform_int_distribution<std::uint32_t> u16(0, 0xFFFF);
    FlowRecord r;
    r.key = {u32d(rng), u32d(rng), static_cast<std::uint16_t>(u16(rng)),
             static_cast<std::uint16_t>(u16(rng)),
             static_cast<std::uint8_t>(u16(rng) & 0xFF)};
    r.stats.pkt_count = u32d(rng);
    r.stats.byte_count = u48(rng);
    r.stats.payload_bytes = u48(rng);
    r.stats.sum_iat = u48(rng);
    r.stats.sum_iat_sq = u48(rng);
    r.stats.first_ts = u48(rng);
    r.stats.last_ts = u48(rng);
    r.stats.min_iat = u24(rng);
    r.stats.max_iat = u24(rng);
    r.stats.min_payload = static_cast<std::uint16_t>(u16(rng));
    r.stats.max_payload = static_cast<std::uint16_t>(u16(rng));
    return r;
}

TEST(Report, WireSizes) {
    FlowWindow w;
    w.window_id = 7;
    std::mt19937_64 rng(1);
    w.flows.push_back(random_record(rng));
    EXPECT_EQ(serialize_report(w).size(), 74u);  // 11 + 63
    w.flows.push_back(random_record(rng));
    w.flows.push_back(random_record(rng));
    EXPECT_EQ(serialize_report(w).size(), 11u + 3 * 63u);
}

TEST(Report, RoundTripIsIdentity) {
    std::mt19937_64 rng(2);
    FlowWindow w;
    w.window_id = 123456;
    for (int i = 0; i < 50; ++i) w.flows.push_back(random_record(rng));
    const auto blob = serialize_report(w);
    const auto back = parse_report(blob);
    EXPECT_EQ(back.window_id, w.window_id);
    ASSERT_EQ(back.flows.size(), w.flows.size());
    for (std::size_t i = 0; i < w.flows.size(); ++i) {
        EXPECT_EQ(back.flows[i].key, w.flows[i].key);
        EXPECT_EQ(back.flows[i].stats, w.flows[i].stats);
        EXPECT_EQ(back.flows[i].attack_pkts, 0u);  // ground truth never travels
    }
}

TEST(Report, ParseRejectsDamage) {
    std::mt19937_64 rng(3);
    FlowWindow w;
    w.window_id = 9;
    w.flows.push_back(random_record(rng));
    auto blob = serialize_report(w);

    auto bad = blob;
    bad[0] ^= 0xFF;
    EXPECT_THROW(parse_report(bad), FormatError);

    bad = blob;
    bad[4] = 2;
    EXPECT_THROW(parse_report(bad), VersionError);

    bad = blob;
    bad.pop_back();
    EXPECT_THROW(parse_report(bad), LengthError);

    bad = blob;
    bad.push_back(0);
    EXPECT_THROW(parse_report(bad), LengthError);

    EXPECT_THROW(parse_report(std::vector<std::uint8_t>{1, 2, 3}), LengthError);
}

TEST(Report, FileStreamRoundTrip) {
    std::mt19937_64 rng(4);
    std::vector<FlowWindow> ws(3);
    for (std::size_t i = 0; i < ws.size(); ++i) {
        ws[i].window_id = static_cast<std::uint32_t>(i);
        for (int j = 0; j < 5; ++j) ws[i].flows.push_back(random_record(rng));
    }
    const auto path =
        (std::filesystem::temp_directory_path() / "dpids_reports.bin").string();
    write_reports_file(path, ws);
    const auto back = read_reports_file(path);
    ASSERT_EQ(back.size(), 3u);
    for (std::size_t i = 0; i < ws.size(); ++i) {
        EXPECT_EQ(back[i].window_id, ws[i].window_id);
        ASSERT_EQ(back[i].flows.size(), ws[i].flows.size());
        for (std::size_t j = 0; j < ws[i].flows.size(); ++j) {
            EXPECT_EQ(back[i].flows[j].stats, ws[i].flows[j].stats);
        }
    }
    std::filesystem::remove(path);
    EXPECT_THROW(read_reports_file("/nonexistent/nope.bin"), IoError);
}

}  // namespace
}  // namespace dpids
