// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/sim/simulator.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "fabric_lens/fabric/views.hpp"

namespace fabric_lens::sim {

using fabric::DeviceRef;
using fabric::DeviceType;
using fabric::HostKind;
using fabric::Path;

namespace {

std::uint64_t packets_for(std::uint64_t bytes) { return (bytes + kMtuBytes - 1) / kMtuBytes; }

[[noreturn]] void fail(SimErrc code, std::string message) { throw SimError(code, std::move(message)); }

}  // namespace

std::string_view to_string(ErrorCounter counter) {
    switch (counter) {
        case ErrorCounter::LinkDowned:
            return "LinkDowned";
        case ErrorCounter::XmtDiscards:
            return "XmtDiscards";
        case ErrorCounter::RcvErrors:
            return "RcvErrors";
        case ErrorCounter::VL15Dropped:
            return "VL15Dropped";
    }
    return "?";
}

Simulator::Simulator(fabric::FabricTopology topology, fabric::RoutingTable routing, SimulatorOptions options)
    : topology_(std::move(topology)),
      routing_(std::move(routing)),
      options_(options),
      rng_(options.seed),
      ports_(topology_.links().size() * 2) {
    for (const auto& link : topology_.links()) {
        for (int end = 0; end < 2; ++end) {
            auto& p = ports_[link.id.value * 2 + end];
            const auto& ref = end == 0 ? link.end_a : link.end_b;
            p.counters.device = ref.device;
            p.counters.port = ref.port;
            p.errors.device = ref.device;
            p.errors.port = ref.port;
        }
    }
}

std::uint64_t Simulator::timestamp_of(IntervalIndex interval) const {
    const std::uint64_t len = std::uint64_t{options_.interval_ms} * 1'000'000ull;
    return options_.epoch_ns + static_cast<std::uint64_t>(interval) * len + len / 2;
}

Simulator::PortCounters& Simulator::port_of(LinkId link, Direction outbound, bool sender) {
    // The sending end of AtoB traffic is end_a.
    const bool end_a = (outbound == Direction::AtoB) == sender;
    return ports_[link.value * 2 + (end_a ? 0 : 1)];
}

Path Simulator::multicast_tree(const JobSpec& spec, const Multicast& mc) const {
    auto view = fabric::job_subgraph(topology_, routing_, spec.nodes);
    std::set<LinkId> in_view(view.links.begin(), view.links.end());

    const auto source = topology_.require(spec.nodes.front());
    std::map<DeviceRef, fabric::Hop> parent;
    std::set<DeviceRef> seen{source};
    std::deque<DeviceRef> queue{source};
    while (!queue.empty()) {
        auto cur = queue.front();
        queue.pop_front();
        std::vector<const fabric::Attachment*> next;
        for (const auto& att : topology_.attachments(cur)) {
            if (in_view.count(att.link) != 0 && seen.count(att.peer) == 0) {
                next.push_back(&att);
            }
        }
        // Children by LID; the lowest link id wins among parallel links.
        std::sort(next.begin(), next.end(), [&](const auto* a, const auto* b) {
            auto la = topology_.lid_of(a->peer);
            auto lb = topology_.lid_of(b->peer);
            return la != lb ? la < lb : a->link < b->link;
        });
        for (const auto* att : next) {
            if (seen.insert(att->peer).second) {
                parent[att->peer] = {att->link, att->outbound};
                queue.push_back(att->peer);
            }
        }
    }

    std::set<std::pair<LinkId, Direction>> hops;
    for (auto member : mc.group) {
        auto at = topology_.require(member);
        while (at != source) {
            const auto& hop = parent.at(at);
            hops.insert({hop.link, hop.dir});
            at = topology_.near_end(hop.link, hop.dir);
        }
    }
    Path tree;
    for (const auto& [link, dir] : hops) {
        tree.push_back({link, dir});
    }
    return tree;
}

Simulator::PreparedJob Simulator::prepare(const JobSpec& spec) const {
    if (jobs_.count(spec.id) != 0) {
        fail(SimErrc::OverlappingJobId, "job " + std::to_string(spec.id) + " already scheduled");
    }
    if (spec.nodes.empty()) {
        fail(SimErrc::InvalidJob, "job " + std::to_string(spec.id) + " has no nodes");
    }
    if (spec.start < 0 || spec.end <= spec.start) {
        fail(SimErrc::InvalidJob, "job " + std::to_string(spec.id) + " has an empty lifetime");
    }
    std::set<Guid> distinct;
    std::vector<DeviceRef> hosts;
    for (auto guid : spec.nodes) {
        auto ref = topology_.find(guid);
        if (!ref || ref->type != DeviceType::Host) {
            fail(SimErrc::UnknownGuid, "job node " + guid.to_hex() + " is not a host");
        }
        if (!distinct.insert(guid).second) {
            fail(SimErrc::InvalidJob, "job node " + guid.to_hex() + " listed twice");
        }
        hosts.push_back(*ref);
    }

    PreparedJob job;
    job.spec = spec;
    const auto interval_ms = options_.interval_ms;

    if (const auto* a2a = std::get_if<AllToAll>(&spec.pattern)) {
        for (std::uint32_t i = 0; i < hosts.size(); ++i) {
            for (std::uint32_t j = 0; j < hosts.size(); ++j) {
                if (i == j) {
                    continue;
                }
                wire::MpiRecord r;
                r.job_id = spec.id;
                r.rank = i;
                r.peer_rank = j;
                r.src_guid = spec.nodes[i];
                r.dst_guid = spec.nodes[j];
                r.bytes_sent = a2a->bytes_per_pair;
                r.interval_ms = interval_ms;
                job.mpi_template.push_back(r);
                job.unicast_flows.push_back(
                    {fabric::route_path(topology_, routing_, topology_.lid_of(hosts[i]), topology_.lid_of(hosts[j])),
                     a2a->bytes_per_pair});
            }
        }
    } else if (const auto* ckpt = std::get_if<Checkpoint>(&spec.pattern)) {
        if (ckpt->osts.empty()) {
            fail(SimErrc::InvalidJob, "checkpoint job " + std::to_string(spec.id) + " lists no OST");
        }
        job.io_flows = true;
        for (const auto& ost : ckpt->osts) {
            auto oss = topology_.find(ost.oss);
            if (!oss || oss->type != DeviceType::Host) {
                fail(SimErrc::UnknownGuid, "OSS " + ost.oss.to_hex() + " is not a host");
            }
            if (topology_.host_at(*oss).kind != HostKind::Storage) {
                fail(SimErrc::InvalidJob, "OST " + ost.name + " is not on a storage host");
            }
            if (ost.name.empty() || ost.name.size() > 127) {
                fail(SimErrc::InvalidJob, "OST name must be 1..127 bytes");
            }
        }
        const wire::IoStats one_event{1, ckpt->bytes_per_proc, ckpt->bytes_per_proc, ckpt->bytes_per_proc};
        for (std::uint32_t i = 0; i < hosts.size(); ++i) {
            for (const auto& ost : ckpt->osts) {
                const auto oss = *topology_.find(ost.oss);
                wire::IoRecord r;
                r.job_id = spec.id;
                r.rank = i;
                r.pid = 10000 + i;
                r.node_guid = spec.nodes[i];
                r.ost_name = ost.name;
                r.oss_ip = topology_.host_at(oss).ip;
                (ckpt->direction == IoDirection::Write ? r.write : r.read) = one_event;
                r.interval_ms = interval_ms;
                job.io_template.push_back(r);

                const auto node_lid = topology_.lid_of(hosts[i]);
                const auto oss_lid = topology_.lid_of(oss);
                job.unicast_flows.push_back(
                    {ckpt->direction == IoDirection::Write ? fabric::route_path(topology_, routing_, node_lid, oss_lid)
                                                           : fabric::route_path(topology_, routing_, oss_lid, node_lid),
                     ckpt->bytes_per_proc});
            }
        }
    } else {
        const auto& mc = std::get<Multicast>(spec.pattern);
        for (auto member : mc.group) {
            if (!topology_.find(member)) {
                fail(SimErrc::UnknownGuid, "multicast member " + member.to_hex() + " is unknown");
            }
            if (distinct.count(member) == 0) {
                fail(SimErrc::InvalidJob, "multicast member " + member.to_hex() + " is not a job node");
            }
        }
        job.multicast_tree = multicast_tree(spec, mc);
        job.multicast_bytes = mc.bytes_per_interval;
    }
    return job;
}

JobId Simulator::schedule_job(const JobSpec& spec) {
    auto prepared = prepare(spec);
    jobs_.emplace(spec.id, spec);
    prepared_.push_back(std::move(prepared));
    std::sort(prepared_.begin(), prepared_.end(),
              [](const PreparedJob& a, const PreparedJob& b) { return a.spec.id < b.spec.id; });
    return spec.id;
}

void Simulator::inject_fault(const FaultInjection& fault) {
    if (!topology_.link_at(fault.device, fault.port)) {
        fail(SimErrc::InvalidFault, "fault target " + fault.device.to_hex() + ":" + std::to_string(fault.port) +
                                        " has no link");
    }
    faults_.push_back(fault);
}

SimulatedInterval Simulator::step() {
    const auto interval = next_interval_++;
    const auto ts = timestamp_of(interval);

    SimulatedInterval out;
    out.batch.interval = interval;
    out.truth.resize(topology_.links().size());

    for (const auto& job : prepared_) {
        if (interval < job.spec.start || interval >= job.spec.end) {
            continue;
        }
        for (auto r : job.mpi_template) {
            r.timestamp_ns = ts;
            out.batch.mpi.push_back(r);
        }
        for (auto r : job.io_template) {
            r.timestamp_ns = ts;
            out.batch.io.push_back(std::move(r));
        }
        for (const auto& flow : job.unicast_flows) {
            for (const auto& hop : flow.path) {
                auto& d = out.truth[hop.link.value].dir[index_of(hop.dir)];
                (job.io_flows ? d.io : d.mpi) += flow.bytes;
                d.per_job[job.spec.id] += flow.bytes;
                d.packets += packets_for(flow.bytes);
            }
        }
        for (const auto& hop : job.multicast_tree) {
            auto& d = out.truth[hop.link.value].dir[index_of(hop.dir)];
            d.multicast += job.multicast_bytes;
            d.packets += packets_for(job.multicast_bytes);
        }
    }

    if (options_.noise_max_bytes > 0) {
        std::uniform_int_distribution<std::uint64_t> jitter(0, options_.noise_max_bytes);
        for (auto& link : out.truth) {
            for (auto& d : link.dir) {
                d.noise = jitter(rng_);
                d.packets += packets_for(d.noise);
            }
        }
    }

    for (std::uint32_t l = 0; l < out.truth.size(); ++l) {
        for (auto dir : {Direction::AtoB, Direction::BtoA}) {
            const auto& d = out.truth[l].dir[index_of(dir)];
            auto& tx = port_of(LinkId{l}, dir, true).counters;
            tx.xmit_bytes += d.total();
            tx.unicast_xmit_bytes += d.unicast();
            tx.multicast_xmit_bytes += d.multicast;
            tx.xmit_pkts += d.packets;
            auto& rx = port_of(LinkId{l}, dir, false).counters;
            rx.rcv_bytes += d.total();
            rx.unicast_rcv_bytes += d.unicast();
            rx.multicast_rcv_bytes += d.multicast;
            rx.rcv_pkts += d.packets;
        }
    }

    for (const auto& fault : faults_) {
        if (fault.interval != interval) {
            continue;
        }
        const auto link = *topology_.link_at(fault.device, fault.port);
        const auto& l = topology_.link(link);
        auto& port = ports_[link.value * 2 + (l.end_a == fabric::PortRef{fault.device, fault.port} ? 0 : 1)];
        port.has_errors = true;
        switch (fault.counter) {
            case ErrorCounter::LinkDowned:
                port.errors.link_downed += fault.increment;
                break;
            case ErrorCounter::XmtDiscards:
                port.errors.xmt_discards += fault.increment;
                break;
            case ErrorCounter::RcvErrors:
                port.errors.rcv_errors += fault.increment;
                break;
            case ErrorCounter::VL15Dropped:
                port.errors.vl15_dropped += fault.increment;
                break;
        }
    }

    out.batch.counters.reserve(ports_.size());
    for (auto& port : ports_) {
        port.counters.timestamp_ns = ts;
        out.batch.counters.push_back(port.counters);
        if (port.has_errors) {
            port.errors.timestamp_ns = ts;
            out.batch.port_errors.push_back(port.errors);
        }
    }
    return out;
}

std::vector<wire::TelemetryBatch> Simulator::advance(std::size_t intervals) {
    std::vector<wire::TelemetryBatch> out;
    out.reserve(intervals);
    for (std::size_t i = 0; i < intervals; ++i) {
        out.push_back(step().batch);
    }
    return out;
}

}  // namespace fabric_lens::sim
