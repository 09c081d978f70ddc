// The packet view shared by every pipeline: what a parser would hand to the
// ingress stage. The attack flag is generator ground truth for scoring; no
// pipeline component reads it.
#pragma once

#include <cstdint>

namespace dpids {

struct Packet {
    std::uint64_t ts_us = 0;
    std::uint32_t src_ip = 0;
    std::uint32_t dst_ip = 0;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint8_t proto = 6;
    std::uint16_t pkt_len = 0;
    std::uint16_t payload_len = 0;
    bool attack = false;

    bool operator==(const Packet&) const = default;
};

}  // namespace dpids
