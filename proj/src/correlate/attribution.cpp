// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/correlate/attribution.hpp"

#include <optional>
#include <unordered_map>

namespace fabric_lens::correlate {

using fabric::DeviceType;
using fabric::PortRef;

std::map<JobId, JobBytes> LinkBreakdown::job_totals() const {
    std::map<JobId, JobBytes> out;
    for (const auto& d : dir) {
        for (const auto& [job, bytes] : d.per_job) {
            out[job].mpi += bytes.mpi;
            out[job].io += bytes.io;
        }
    }
    return out;
}

bool LinkBreakdown::is_zero() const {
    for (const auto& d : dir) {
        if (d.total != 0 || d.mpi != 0 || d.io != 0 || d.unicast != 0 || d.multicast != 0 || !d.per_job.empty()) {
            return false;
        }
    }
    return true;
}

std::string_view to_string(QuarantineReason reason) {
    switch (reason) {
        case QuarantineReason::UnresolvedHost:
            return "UnresolvedHost";
        case QuarantineReason::UnknownGuid:
            return "UnknownGuid";
        case QuarantineReason::UnknownPort:
            return "UnknownPort";
    }
    return "?";
}

namespace {

std::optional<Lid> host_lid(const fabric::FabricTopology& t, Guid guid) {
    auto ref = t.find(guid);
    if (!ref || ref->type != DeviceType::Host) {
        return std::nullopt;
    }
    return t.lid_of(*ref);
}

class Booker {
public:
    Booker(const fabric::FabricTopology& t, const fabric::RoutingTable& r, Attribution& out)
        : topology_(t), routing_(r), out_(out) {}

    void book(Lid src, Lid dst, JobId job, std::uint64_t bytes, bool io) {
        if (bytes == 0 || src == dst) {
            return;
        }
        for (const auto& hop : path(src, dst)) {
            auto& d = out_.links[hop.link.value].dir[index_of(hop.dir)];
            auto& j = d.per_job[job];
            if (io) {
                d.io += bytes;
                j.io += bytes;
            } else {
                d.mpi += bytes;
                j.mpi += bytes;
            }
        }
    }

private:
    const fabric::Path& path(Lid src, Lid dst) {
        const auto key = (std::uint32_t{src.value} << 16) | dst.value;
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            it = cache_.emplace(key, fabric::route_path(topology_, routing_, src, dst)).first;
        }
        return it->second;
    }

    const fabric::FabricTopology& topology_;
    const fabric::RoutingTable& routing_;
    Attribution& out_;
    std::unordered_map<std::uint32_t, fabric::Path> cache_;
};

std::uint64_t delta(std::uint64_t now, std::uint64_t before, const wire::CounterSample& s) {
    if (now < before) {
        throw CorrelateError(CorrelateErrc::CounterRegression,
                             "counter regression on " + s.device.to_hex() + ":" + std::to_string(s.port));
    }
    return now - before;
}

wire::CounterSample counter_delta(const wire::CounterSample& now, const CounterBaseline& before) {
    wire::CounterSample base;
    if (auto it = before.find(PortRef{now.device, now.port}); it != before.end()) {
        base = it->second;
    }
    wire::CounterSample d = now;
    d.xmit_bytes = delta(now.xmit_bytes, base.xmit_bytes, now);
    d.rcv_bytes = delta(now.rcv_bytes, base.rcv_bytes, now);
    d.xmit_pkts = delta(now.xmit_pkts, base.xmit_pkts, now);
    d.rcv_pkts = delta(now.rcv_pkts, base.rcv_pkts, now);
    d.unicast_xmit_bytes = delta(now.unicast_xmit_bytes, base.unicast_xmit_bytes, now);
    d.unicast_rcv_bytes = delta(now.unicast_rcv_bytes, base.unicast_rcv_bytes, now);
    d.multicast_xmit_bytes = delta(now.multicast_xmit_bytes, base.multicast_xmit_bytes, now);
    d.multicast_rcv_bytes = delta(now.multicast_rcv_bytes, base.multicast_rcv_bytes, now);
    return d;
}

}  // namespace

Attribution attribute(const fabric::FabricTopology& topology, const fabric::RoutingTable& routing,
                      const wire::TelemetryBatch& batch, const HostMaps& maps, const CounterBaseline& before) {
    Attribution out;
    out.interval = batch.interval;
    out.links.resize(topology.links().size());
    for (std::uint32_t i = 0; i < out.links.size(); ++i) {
        out.links[i].link = LinkId{i};
        out.links[i].interval = batch.interval;
    }
    Booker booker(topology, routing, out);

    for (const auto& r : batch.mpi) {
        auto src = host_lid(topology, r.src_guid);
        auto dst = host_lid(topology, r.dst_guid);
        if (!src || !dst) {
            out.quarantine.push_back({QuarantineReason::UnknownGuid, r.job_id, r.bytes_sent + r.bytes_recv,
                                      "mpi record " + r.src_guid.to_hex() + " -> " + r.dst_guid.to_hex()});
            continue;
        }
        booker.book(*src, *dst, r.job_id, r.bytes_sent, false);
        booker.book(*dst, *src, r.job_id, r.bytes_recv, false);
    }

    for (const auto& r : batch.io) {
        auto client = host_lid(topology, r.node_guid);
        if (!client) {
            out.quarantine.push_back({QuarantineReason::UnknownGuid, r.job_id, r.read.sum + r.write.sum,
                                      "io record from " + r.node_guid.to_hex()});
            continue;
        }
        auto oss = resolve_device(maps, topology, r.oss_ip);
        if (!oss || oss->type != DeviceType::Host) {
            out.quarantine.push_back({QuarantineReason::UnresolvedHost, r.job_id, r.read.sum + r.write.sum,
                                      "oss " + r.oss_ip.to_string() + " for " + r.ost_name});
            continue;
        }
        const auto server = topology.lid_of(*oss);
        booker.book(*client, server, r.job_id, r.write.sum, true);
        booker.book(server, *client, r.job_id, r.read.sum, true);
    }

    // Counter deltas per (link, end). The sender's xmit side is preferred;
    // the receiver's rcv side covers a missing sample.
    std::vector<std::array<std::optional<wire::CounterSample>, 2>> ends(topology.links().size());
    for (const auto& s : batch.counters) {
        auto link = topology.link_at(s.device, s.port);
        if (!link) {
            out.quarantine.push_back({QuarantineReason::UnknownPort, 0, 0,
                                      "counter sample for " + s.device.to_hex() + ":" + std::to_string(s.port)});
            continue;
        }
        const auto& l = topology.link(*link);
        const int end = l.end_a == PortRef{s.device, s.port} ? 0 : 1;
        ends[link->value][end] = counter_delta(s, before);
    }
    for (std::uint32_t i = 0; i < ends.size(); ++i) {
        for (auto dir : {Direction::AtoB, Direction::BtoA}) {
            const auto& tx = ends[i][dir == Direction::AtoB ? 0 : 1];
            const auto& rx = ends[i][dir == Direction::AtoB ? 1 : 0];
            auto& d = out.links[i].dir[index_of(dir)];
            if (tx) {
                d.total = tx->xmit_bytes;
                d.unicast = tx->unicast_xmit_bytes;
                d.multicast = tx->multicast_xmit_bytes;
            } else if (rx) {
                d.total = rx->rcv_bytes;
                d.unicast = rx->unicast_rcv_bytes;
                d.multicast = rx->multicast_rcv_bytes;
            }
        }
    }
    return out;
}

Attribution attribute_strict(const fabric::FabricTopology& topology, const fabric::RoutingTable& routing,
                             const wire::TelemetryBatch& batch, const HostMaps& maps, const CounterBaseline& before) {
    auto out = attribute(topology, routing, batch, maps, before);
    for (const auto& q : out.quarantine) {
        throw CorrelateError(q.reason == QuarantineReason::UnresolvedHost ? CorrelateErrc::UnresolvedHost
                                                                          : CorrelateErrc::UnknownGuid,
                             q.detail);
    }
    return out;
}

void advance_baseline(CounterBaseline& baseline, const wire::TelemetryBatch& batch) {
    for (const auto& s : batch.counters) {
        baseline[PortRef{s.device, s.port}] = s;
    }
}

}  // namespace fabric_lens::correlate
