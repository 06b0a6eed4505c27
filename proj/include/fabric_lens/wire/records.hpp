// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "fabric_lens/common/ids.hpp"
#include "fabric_lens/common/ip_address.hpp"

namespace fabric_lens::wire {

// Per-peer MPI byte totals reported by one rank for one interval.
struct MpiRecord {
    std::uint64_t timestamp_ns = 0;
    JobId job_id = 0;
    std::uint32_t rank = 0;
    std::uint32_t peer_rank = 0;
    Guid src_guid;
    Guid dst_guid;
    std::uint64_t bytes_sent = 0;
    std::uint64_t bytes_recv = 0;
    std::uint32_t interval_ms = 0;

    bool operator==(const MpiRecord&) const = default;
};

// count / smallest event / largest event / total bytes of one operation kind.
struct IoStats {
    std::uint64_t count = 0;
    std::uint64_t min = 0;
    std::uint64_t max = 0;
    std::uint64_t sum = 0;

    bool operator==(const IoStats&) const = default;
};

// Lustre client statistics of one process against one OST.
struct IoRecord {
    std::uint64_t timestamp_ns = 0;
    JobId job_id = 0;
    std::uint32_t rank = 0;
    std::uint32_t pid = 0;
    Guid node_guid;
    std::string ost_name;
    IpAddress oss_ip;
    IoStats read;
    IoStats write;
    std::uint32_t interval_ms = 0;

    bool operator==(const IoRecord&) const = default;
};

// Cumulative port counters of one (device, port).
struct CounterSample {
    std::uint64_t timestamp_ns = 0;
    Guid device;
    std::uint16_t port = 0;
    std::uint64_t xmit_bytes = 0;
    std::uint64_t rcv_bytes = 0;
    std::uint64_t xmit_pkts = 0;
    std::uint64_t rcv_pkts = 0;
    std::uint64_t unicast_xmit_bytes = 0;
    std::uint64_t unicast_rcv_bytes = 0;
    std::uint64_t multicast_xmit_bytes = 0;
    std::uint64_t multicast_rcv_bytes = 0;

    bool operator==(const CounterSample&) const = default;
};

// Cumulative port error counters of one (device, port).
struct PortErrorSample {
    std::uint64_t timestamp_ns = 0;
    Guid device;
    std::uint16_t port = 0;
    std::uint64_t link_downed = 0;
    std::uint64_t xmt_discards = 0;
    std::uint64_t rcv_errors = 0;
    std::uint64_t vl15_dropped = 0;

    bool operator==(const PortErrorSample&) const = default;
};

using TelemetryRecord = std::variant<MpiRecord, IoRecord, CounterSample, PortErrorSample>;

std::uint64_t timestamp_of(const TelemetryRecord& record);

}  // namespace fabric_lens::wire
