// Synthetic traffic: Zipf-weighted client/server traffic with Poisson
// arrivals, plus a volumetric attack injector (randomly spoofed sources
// flooding one target at a chosen share of the traffic).
//
// Randomness comes only from mt19937_64 raw draws so that a (config, seed)
// pair reproduces the same trace everywhere.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <random>
#include <vector>

#include "dpids/error.hpp"
#include "dpids/hash.hpp"
#include "dpids/packet.hpp"

namespace dpids {

constexpr std::uint32_t kHostBase = 0x0a000000;    // 10.0.0.0/8 clients
constexpr std::uint32_t kServerBase = 0x0b000000;  // 11.0.0.0/8 servers
constexpr std::uint16_t kBenignPayloadLo = 64;
constexpr std::uint16_t kBenignPayloadHi = 1400;
constexpr std::uint16_t kAttackPayloadLo = 40;
constexpr std::uint16_t kAttackPayloadHi = 63;
constexpr std::uint16_t kHeaderBytes = 40;
constexpr std::uint16_t kServicePort = 443;

namespace rnd {

inline double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t uniform(std::mt19937_64& rng, std::uint64_t lo,
                             std::uint64_t hi) {
    return lo + rng() % (hi - lo + 1);
}

}  // namespace rnd

// Ranks 1..n with weight rank^-s, drawn by inverse CDF.
class ZipfSampler {
  public:
    ZipfSampler(std::uint32_t n, double s) {
        if (n < 1) {
            throw ArgumentError("ZipfSampler: n must be >= 1");
        }
        if (s < 0.0) {
            throw ArgumentError("ZipfSampler: exponent must be >= 0");
        }
        cdf_.reserve(n);
        double acc = 0.0;
        for (std::uint32_t r = 1; r <= n; ++r) {
            acc += std::pow(static_cast<double>(r), -s);
            cdf_.push_back(acc);
        }
        for (auto& v : cdf_) v /= acc;
        cdf_.back() = 1.0;
    }

    std::uint32_t draw(std::mt19937_64& rng) const {
        const double u = rnd::u01(rng);
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        const auto idx = static_cast<std::uint32_t>(it - cdf_.begin());
        return std::min<std::uint32_t>(idx, static_cast<std::uint32_t>(cdf_.size()) - 1) + 1;
    }

  private:
    std::vector<double> cdf_;
};

struct GenConfig {
    std::uint64_t duration_us = 60'000'000;
    std::uint32_t pps = 8500;
    std::uint32_t n_hosts = 1024;
    std::uint32_t n_servers = 512;
    double zipf_s = 1.1;

    void validate() const {
        if (duration_us < 1) {
            throw ConfigError("duration_us must be >= 1");
        }
        if (pps < 1) {
            throw ConfigError("pps must be >= 1");
        }
        if (n_hosts < 1 || n_hosts > 0xFFFFFF) {
            throw ConfigError("n_hosts must be in [1, 2^24 - 1]");
        }
        if (n_servers < 1 || n_servers > 0xFFFFFF) {
            throw ConfigError("n_servers must be in [1, 2^24 - 1]");
        }
        if (zipf_s < 0.0) {
            throw ConfigError("zipf_s must be >= 0");
        }
    }
};

struct AttackConfig {
    double fraction = 0.04;       // attack share of traffic over its span
    double onset_fraction = 0.5;  // where in the trace the attack starts
    std::uint32_t target_ip = kServerBase + 1;

    void validate() const {
        if (!(fraction > 0.0) || !(fraction < 1.0)) {
            throw ConfigError("attack fraction must be in (0, 1)");
        }
        if (onset_fraction < 0.0 || onset_fraction >= 1.0) {
            throw ConfigError("onset_fraction must be in [0, 1)");
        }
    }
};

inline std::vector<Packet> generate_benign(const GenConfig& cfg,
                                           std::uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    const ZipfSampler hosts(cfg.n_hosts, cfg.zipf_s);
    const ZipfSampler servers(cfg.n_servers, cfg.zipf_s);

    const std::uint64_t n = std::max<std::uint64_t>(
        1, cfg.duration_us * cfg.pps / 1'000'000);
    const double mean_iat = 1e6 / cfg.pps;

    std::vector<Packet> out;
    out.reserve(n);
    double t = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        t += -std::log(1.0 - rnd::u01(rng)) * mean_iat;
        const std::uint32_t host = hosts.draw(rng);
        const std::uint32_t server = servers.draw(rng);

        Packet p;
        p.ts_us = static_cast<std::uint64_t>(t);
        p.src_ip = kHostBase + host;
        p.dst_ip = kServerBase + server;
        // Stable per-pair source port keeps a (host, server) conversation one
        // flow across its lifetime.
        const std::uint64_t pair =
            (static_cast<std::uint64_t>(host) << 32) | server;
        const std::uint8_t pb[8] = {
            static_cast<std::uint8_t>(pair >> 56), static_cast<std::uint8_t>(pair >> 48),
            static_cast<std::uint8_t>(pair >> 40), static_cast<std::uint8_t>(pair >> 32),
            static_cast<std::uint8_t>(pair >> 24), static_cast<std::uint8_t>(pair >> 16),
            static_cast<std::uint8_t>(pair >> 8),  static_cast<std::uint8_t>(pair)};
        p.src_port = static_cast<std::uint16_t>(
            1024 + murmur64a(pb, 0x5eedf10u) % 64512);
        p.dst_port = kServicePort;
        p.proto = 6;
        p.payload_len = static_cast<std::uint16_t>(
            rnd::uniform(rng, kBenignPayloadLo, kBenignPayloadHi));
        p.pkt_len = static_cast<std::uint16_t>(p.payload_len + kHeaderBytes);
        p.attack = false;
        out.push_back(p);
    }
    return out;
}

// Adds attack packets so they make up `fraction` of all traffic from the
// onset point to the end of the trace: n_attack = f * n_span / (1 - f),
// spread evenly across the span, each from a fresh random spoofed source.
inline std::vector<Packet> inject_attack(std::vector<Packet> benign,
                                         const AttackConfig& cfg,
                                         std::uint64_t seed) {
    cfg.validate();
    if (benign.empty()) {
        throw ArgumentError("inject_attack needs a non-empty trace");
    }
    std::mt19937_64 rng(seed);
    const std::uint64_t t0 = benign.front().ts_us;
    const std::uint64_t t1 = benign.back().ts_us;
    const std::uint64_t onset =
        t0 + static_cast<std::uint64_t>(static_cast<double>(t1 - t0) *
                                        cfg.onset_fraction);
    std::uint64_t n_span = 0;
    for (const auto& p : benign) {
        if (p.ts_us >= onset) ++n_span;
    }
    const auto n_attack = static_cast<std::uint64_t>(std::llround(
        cfg.fraction * static_cast<double>(n_span) / (1.0 - cfg.fraction)));
    if (n_attack == 0) {
        return benign;
    }

    std::vector<Packet> attack;
    attack.reserve(n_attack);
    const double span = static_cast<double>(t1 - onset);
    for (std::uint64_t j = 0; j < n_attack; ++j) {
        Packet p;
        p.ts_us = onset + static_cast<std::uint64_t>(
                              span * (static_cast<double>(j) + 0.5) /
                              static_cast<double>(n_attack));
        p.src_ip = static_cast<std::uint32_t>(rng());  // spoofed
        p.dst_ip = cfg.target_ip;
        p.src_port = static_cast<std::uint16_t>(rnd::uniform(rng, 1024, 65535));
        p.dst_port = kServicePort;
        p.proto = 6;
        p.payload_len = static_cast<std::uint16_t>(
            rnd::uniform(rng, kAttackPayloadLo, kAttackPayloadHi));
        p.pkt_len = static_cast<std::uint16_t>(p.payload_len + kHeaderBytes);
        p.attack = true;
        attack.push_back(p);
    }

    std::vector<Packet> merged;
    merged.reserve(benign.size() + attack.size());
    std::merge(benign.begin(), benign.end(), attack.begin(), attack.end(),
               std::back_inserter(merged),
               [](const Packet& a, const Packet& b) { return a.ts_us < b.ts_us; });
    return merged;
}

// Ground truth per full observation window of `window_packets` packets:
// anomalous when the in-window attack share exceeds the threshold.
inline std::vector<bool> window_labels(const std::vector<Packet>& trace,
                                       std::uint32_t window_packets,
                                       double threshold_fraction) {
    if (window_packets < 1) {
        throw ArgumentError("window_packets must be >= 1");
    }
    std::vector<bool> labels;
    const std::size_t full = trace.size() / window_packets;
    for (std::size_t w = 0; w < full; ++w) {
        std::uint32_t attacks = 0;
        for (std::size_t i = w * window_packets; i < (w + 1) * window_packets; ++i) {
            if (trace[i].attack) ++attacks;
        }
        labels.push_back(static_cast<double>(attacks) /
                             static_cast<double>(window_packets) >
                         threshold_fraction);
    }
    return labels;
}

}  // namespace dpids
