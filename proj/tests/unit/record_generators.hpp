// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <string>

#include "fabric_lens/wire/records.hpp"

namespace fabric_lens::testing {

// Random generators of invariant-respecting telemetry records.
class RecordGenerator {
public:
    explicit RecordGenerator(std::uint64_t seed) : rng_(seed) {}

    std::uint64_t u64() { return rng_(); }
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : rng_() % n; }

    wire::IoStats io_stats() {
        wire::IoStats s;
        s.count = below(4) == 0 ? 0 : 1 + below(1000);
        if (s.count == 0) {
            return s;
        }
        s.min = below(1ull << 30);
        s.max = s.min + below(1ull << 30);
        // Any sum in [count*min, count*max] is consistent.
        s.sum = s.count * s.min + below(s.count * (s.max - s.min) + 1);
        return s;
    }

    wire::MpiRecord mpi() {
        wire::MpiRecord r;
        r.timestamp_ns = u64();
        r.job_id = u64();
        r.rank = static_cast<std::uint32_t>(u64());
        r.peer_rank = below(8) == 0 ? r.rank : static_cast<std::uint32_t>(u64());
        r.src_guid = Guid{u64()};
        r.dst_guid = r.rank == r.peer_rank && below(2) == 0 ? r.src_guid : Guid{r.src_guid.value + 1 + below(1000)};
        r.bytes_sent = u64();
        r.bytes_recv = u64();
        r.interval_ms = static_cast<std::uint32_t>(u64());
        return r;
    }

    wire::IoRecord io() {
        wire::IoRecord r;
        r.timestamp_ns = u64();
        r.job_id = u64();
        r.rank = static_cast<std::uint32_t>(u64());
        r.pid = static_cast<std::uint32_t>(u64());
        r.node_guid = Guid{u64()};
        auto len = below(128);
        for (std::uint64_t i = 0; i < len; ++i) {
            r.ost_name.push_back(static_cast<char>(1 + below(255)));
        }
        std::array<std::uint8_t, 16> ip{};
        for (auto& b : ip) {
            b = static_cast<std::uint8_t>(u64());
        }
        r.oss_ip = below(2) == 0 ? IpAddress::from_v4(static_cast<std::uint32_t>(u64())) : IpAddress(ip);
        r.read = io_stats();
        r.write = io_stats();
        r.interval_ms = static_cast<std::uint32_t>(u64());
        return r;
    }

    wire::CounterSample counter() {
        wire::CounterSample c;
        c.timestamp_ns = u64();
        c.device = Guid{u64()};
        c.port = static_cast<std::uint16_t>(u64());
        c.unicast_xmit_bytes = below(1ull << 62);
        c.multicast_xmit_bytes = below(1ull << 62);
        c.xmit_bytes = c.unicast_xmit_bytes + c.multicast_xmit_bytes + below(1ull << 40);
        c.unicast_rcv_bytes = below(1ull << 62);
        c.multicast_rcv_bytes = below(1ull << 62);
        c.rcv_bytes = c.unicast_rcv_bytes + c.multicast_rcv_bytes + below(1ull << 40);
        c.xmit_pkts = u64();
        c.rcv_pkts = u64();
        return c;
    }

    wire::PortErrorSample port_errors() {
        wire::PortErrorSample e;
        e.timestamp_ns = u64();
        e.device = Guid{u64()};
        e.port = static_cast<std::uint16_t>(u64());
        e.link_downed = u64();
        e.xmt_discards = u64();
        e.rcv_errors = u64();
        e.vl15_dropped = u64();
        return e;
    }

    wire::TelemetryRecord any() {
        switch (below(4)) {
            case 0:
                return mpi();
            case 1:
                return io();
            case 2:
                return counter();
            default:
                return port_errors();
        }
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace fabric_lens::testing
