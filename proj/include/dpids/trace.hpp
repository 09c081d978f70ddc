// Packet trace files: one CSV row per packet, timestamps non-decreasing.
//
//   ts_us,src_ip,dst_ip,src_port,dst_port,proto,pkt_len,payload_len,attack
//
// IPs are dotted quads, attack is 0/1 ground truth from the generator.
#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dpids/error.hpp"
#include "dpids/packet.hpp"

namespace dpids {

inline std::string ip_to_string(std::uint32_t ip) {
    return std::to_string(ip >> 24) + "." + std::to_string((ip >> 16) & 0xFF) +
           "." + std::to_string((ip >> 8) & 0xFF) + "." + std::to_string(ip & 0xFF);
}

inline std::uint32_t ip_from_string(const std::string& s) {
    std::uint32_t ip = 0;
    std::size_t pos = 0;
    for (int octet = 0; octet < 4; ++octet) {
        if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos]))) {
            throw ArgumentError("bad IPv4 address '" + s + "'");
        }
        std::uint32_t v = 0;
        std::size_t digits = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            v = v * 10 + static_cast<std::uint32_t>(s[pos] - '0');
            ++pos;
            if (++digits > 3 || v > 255) {
                throw ArgumentError("bad IPv4 address '" + s + "'");
            }
        }
        ip = (ip << 8) | v;
        if (octet < 3) {
            if (pos >= s.size() || s[pos] != '.') {
                throw ArgumentError("bad IPv4 address '" + s + "'");
            }
            ++pos;
        }
    }
    if (pos != s.size()) {
        throw ArgumentError("bad IPv4 address '" + s + "'");
    }
    return ip;
}

inline constexpr const char* kTraceHeader =
    "ts_us,src_ip,dst_ip,src_port,dst_port,proto,pkt_len,payload_len,attack";

inline void save_trace(std::ostream& os, const std::vector<Packet>& trace) {
    os << kTraceHeader << "\n";
    for (const auto& p : trace) {
        os << p.ts_us << "," << ip_to_string(p.src_ip) << ","
           << ip_to_string(p.dst_ip) << "," << p.src_port << "," << p.dst_port
           << "," << static_cast<unsigned>(p.proto) << "," << p.pkt_len << ","
           << p.payload_len << "," << (p.attack ? 1 : 0) << "\n";
    }
    if (!os) {
        throw IoError("trace write failed");
    }
}

inline void save_trace_file(const std::string& path,
                            const std::vector<Packet>& trace) {
    std::ofstream os(path);
    if (!os) {
        throw IoError("cannot open " + path + " for writing");
    }
    save_trace(os, trace);
}

namespace detail {

inline std::uint64_t parse_u64_field(const std::string& s, std::uint64_t max,
                                     std::size_t line, const char* what) {
    if (s.empty()) {
        throw ParseError(std::string("empty ") + what, line);
    }
    std::uint64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') {
            throw ParseError(std::string("bad ") + what + " '" + s + "'", line);
        }
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
        if (v > max) {
            throw ParseError(std::string(what) + " out of range", line);
        }
    }
    return v;
}

}  // namespace detail

inline std::vector<Packet> load_trace(std::istream& is) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(is, line) || line != kTraceHeader) {
        throw ParseError("bad trace header", lineno);
    }
    std::vector<Packet> out;
    std::uint64_t prev_ts = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string cur;
        std::istringstream ls(line);
        while (std::getline(ls, cur, ',')) fields.push_back(cur);
        if (fields.size() != 9) {
            throw ParseError("expected 9 fields", lineno);
        }
        Packet p;
        p.ts_us = detail::parse_u64_field(fields[0], (std::uint64_t{1} << 48) - 1,
                                          lineno, "ts_us");
        try {
            p.src_ip = ip_from_string(fields[1]);
            p.dst_ip = ip_from_string(fields[2]);
        } catch (const ArgumentError& e) {
            throw ParseError(e.what(), lineno);
        }
        p.src_port = static_cast<std::uint16_t>(
            detail::parse_u64_field(fields[3], 65535, lineno, "src_port"));
        p.dst_port = static_cast<std::uint16_t>(
            detail::parse_u64_field(fields[4], 65535, lineno, "dst_port"));
        p.proto = static_cast<std::uint8_t>(
            detail::parse_u64_field(fields[5], 255, lineno, "proto"));
        p.pkt_len = static_cast<std::uint16_t>(
            detail::parse_u64_field(fields[6], 65535, lineno, "pkt_len"));
        p.payload_len = static_cast<std::uint16_t>(
            detail::parse_u64_field(fields[7], 65535, lineno, "payload_len"));
        if (p.payload_len > p.pkt_len) {
            throw ParseError("payload_len exceeds pkt_len", lineno);
        }
        const auto attack =
            detail::parse_u64_field(fields[8], 1, lineno, "attack");
        p.attack = attack == 1;
        if (!out.empty() && p.ts_us < prev_ts) {
            throw TraceOrderError("timestamps decrease at line " +
                                  std::to_string(lineno));
        }
        prev_ts = p.ts_us;
        out.push_back(p);
    }
    return out;
}

inline std::vector<Packet> load_trace_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw IoError("cannot open " + path);
    }
    return load_trace(is);
}

}  // namespace dpids
