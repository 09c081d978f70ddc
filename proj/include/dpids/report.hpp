// Report wire format: the digest a switch streams to its control plane at
// each window boundary.
//
//   header (11 bytes): magic 0x50344944 (u32 BE), version (u8, = 1),
//                      window_id (u32 BE), flow_count (u16 BE)
//   per flow (63 bytes): key (13) then descriptor (50):
//     pkt_count     u32   byte_count  u48   payload_bytes u48
//     sum_iat       u48   sum_iat_sq  u48   first_ts      u48
//     last_ts       u48   min_iat     u24   max_iat       u24
//     min_payload   u16   max_payload u16
// All integers big-endian. In-memory stats already saturate at these widths,
// so serialize/parse is an identity round trip.
#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dpids/error.hpp"
#include "dpids/flow.hpp"

namespace dpids {

constexpr std::uint32_t kReportMagic = 0x50344944;
constexpr std::uint8_t kReportVersion = 1;
constexpr std::size_t kReportHeaderBytes = 11;
constexpr std::size_t kReportFlowBytes = 63;

namespace detail {

inline void put_be(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
    for (int i = bytes - 1; i >= 0; --i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

inline std::uint64_t get_be(std::span<const std::uint8_t> in, std::size_t off,
                            int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        v = (v << 8) | in[off + static_cast<std::size_t>(i)];
    }
    return v;
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_report(const FlowWindow& w) {
    if (w.flows.size() > 65535) {
        throw LengthError("report holds at most 65535 flows");
    }
    std::vector<std::uint8_t> out;
    out.reserve(kReportHeaderBytes + kReportFlowBytes * w.flows.size());
    detail::put_be(out, kReportMagic, 4);
    out.push_back(kReportVersion);
    detail::put_be(out, w.window_id, 4);
    detail::put_be(out, w.flows.size(), 2);
    for (const auto& f : w.flows) {
        std::uint8_t kb[FlowKey::kWireBytes];
        f.key.to_bytes(kb);
        out.insert(out.end(), kb, kb + FlowKey::kWireBytes);
        const FlowStats& s = f.stats;
        detail::put_be(out, s.pkt_count, 4);
        detail::put_be(out, s.byte_count, 6);
        detail::put_be(out, s.payload_bytes, 6);
        detail::put_be(out, s.sum_iat, 6);
        detail::put_be(out, s.sum_iat_sq, 6);
        detail::put_be(out, s.first_ts, 6);
        detail::put_be(out, s.last_ts, 6);
        detail::put_be(out, s.min_iat, 3);
        detail::put_be(out, s.max_iat, 3);
        detail::put_be(out, s.min_payload, 2);
        detail::put_be(out, s.max_payload, 2);
    }
    return out;
}

inline FlowWindow parse_report(std::span<const std::uint8_t> buf) {
    if (buf.size() < kReportHeaderBytes) {
        throw LengthError("report shorter than its header");
    }
    if (detail::get_be(buf, 0, 4) != kReportMagic) {
        throw FormatError("bad report magic");
    }
    if (buf[4] != kReportVersion) {
        throw VersionError("unsupported report version " + std::to_string(buf[4]));
    }
    FlowWindow w;
    w.window_id = static_cast<std::uint32_t>(detail::get_be(buf, 5, 4));
    const std::size_t n = detail::get_be(buf, 9, 2);
    if (buf.size() != kReportHeaderBytes + n * kReportFlowBytes) {
        throw LengthError("report length does not match its flow count");
    }
    w.flows.reserve(n);
    std::size_t off = kReportHeaderBytes;
    for (std::size_t i = 0; i < n; ++i) {
        FlowRecord r;
        r.key = FlowKey::from_bytes(buf.data() + off);
        off += FlowKey::kWireBytes;
        FlowStats& s = r.stats;
        s.pkt_count = static_cast<std::uint32_t>(detail::get_be(buf, off, 4));
        s.byte_count = detail::get_be(buf, off + 4, 6);
        s.payload_bytes = detail::get_be(buf, off + 10, 6);
        s.sum_iat = detail::get_be(buf, off + 16, 6);
        s.sum_iat_sq = detail::get_be(buf, off + 22, 6);
        s.first_ts = detail::get_be(buf, off + 28, 6);
        s.last_ts = detail::get_be(buf, off + 34, 6);
        s.min_iat = static_cast<std::uint32_t>(detail::get_be(buf, off + 40, 3));
        s.max_iat = static_cast<std::uint32_t>(detail::get_be(buf, off + 43, 3));
        s.min_payload = static_cast<std::uint16_t>(detail::get_be(buf, off + 46, 2));
        s.max_payload = static_cast<std::uint16_t>(detail::get_be(buf, off + 48, 2));
        off += 50;
        w.flows.push_back(std::move(r));
    }
    return w;
}

// Stream framing for report files: each report prefixed by its u32 BE length.
inline void write_reports(std::ostream& os, const std::vector<FlowWindow>& ws) {
    for (const auto& w : ws) {
        const auto blob = serialize_report(w);
        std::vector<std::uint8_t> len;
        detail::put_be(len, blob.size(), 4);
        os.write(reinterpret_cast<const char*>(len.data()),
                 static_cast<std::streamsize>(len.size()));
        os.write(reinterpret_cast<const char*>(blob.data()),
                 static_cast<std::streamsize>(blob.size()));
    }
    if (!os) {
        throw IoError("report stream write failed");
    }
}

inline std::vector<FlowWindow> read_reports(std::istream& is) {
    std::vector<FlowWindow> out;
    for (;;) {
        std::uint8_t lenb[4];
        is.read(reinterpret_cast<char*>(lenb), 4);
        if (is.gcount() == 0 && is.eof()) break;
        if (is.gcount() != 4) {
            throw LengthError("truncated report length prefix");
        }
        const std::size_t len = detail::get_be(std::span<const std::uint8_t>(lenb, 4), 0, 4);
        std::vector<std::uint8_t> blob(len);
        is.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(len));
        if (static_cast<std::size_t>(is.gcount()) != len) {
            throw LengthError("truncated report body");
        }
        out.push_back(parse_report(blob));
    }
    return out;
}

inline void write_reports_file(const std::string& path,
                               const std::vector<FlowWindow>& ws) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("cannot open " + path + " for writing");
    }
    write_reports(os, ws);
}

inline std::vector<FlowWindow> read_reports_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("cannot open " + path);
    }
    return read_reports(is);
}

}  // namespace dpids
