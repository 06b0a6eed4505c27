// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/fabric/views.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace fabric_lens::fabric {

TopologyView full_view(const FabricTopology& topology) {
    TopologyView view;
    view.devices.reserve(topology.device_count());
    for (std::uint32_t i = 0; i < topology.switches().size(); ++i) {
        view.devices.push_back({DeviceType::Switch, i});
    }
    for (std::uint32_t i = 0; i < topology.hosts().size(); ++i) {
        view.devices.push_back({DeviceType::Host, i});
    }
    view.links.reserve(topology.links().size());
    for (const auto& link : topology.links()) {
        view.links.push_back(link.id);
    }
    return view;
}

TopologyView job_subgraph(const FabricTopology& topology, const RoutingTable& routing, std::span<const Guid> job_nodes) {
    std::vector<DeviceRef> hosts;
    for (auto guid : job_nodes) {
        auto ref = topology.find(guid);
        if (!ref || ref->type != DeviceType::Host) {
            throw FabricError(FabricErrc::UnknownGuid, "job node " + guid.to_hex() + " is not a host");
        }
        hosts.push_back(*ref);
    }
    std::sort(hosts.begin(), hosts.end());
    hosts.erase(std::unique(hosts.begin(), hosts.end()), hosts.end());

    std::set<DeviceRef> devices(hosts.begin(), hosts.end());
    std::set<LinkId> links;

    // Routing is destination based, so every source host behind one edge
    // switch shares the path after its first link. Walk once per
    // (source edge switch, destination).
    std::map<DeviceRef, std::vector<DeviceRef>> by_edge;
    for (auto h : hosts) {
        const auto& up = topology.host_uplink(h);
        links.insert(up.link);
        devices.insert(up.peer);
        by_edge[up.peer].push_back(h);
    }
    for (auto dst : hosts) {
        const auto dst_lid = topology.lid_of(dst);
        for (const auto& [edge, members] : by_edge) {
            const bool other_source = members.size() > 1 || members.front() != dst;
            if (!other_source) {
                continue;
            }
            for (const auto& hop : route_from_switch(topology, routing, edge, dst_lid)) {
                links.insert(hop.link);
                devices.insert(topology.far_end(hop.link, hop.dir));
            }
        }
    }

    TopologyView view;
    view.devices.assign(devices.begin(), devices.end());
    view.links.assign(links.begin(), links.end());
    return view;
}

TopologyView cluster_compute_hosts(const FabricTopology& topology, const TopologyView& view) {
    TopologyView out;
    out.links = view.links;
    std::map<DeviceRef, HostGroup> groups;
    for (auto ref : view.devices) {
        if (ref.type == DeviceType::Host && topology.host_at(ref).kind == HostKind::Compute) {
            auto edge = topology.edge_of(ref);
            auto& group = groups[edge];
            group.edge_switch = edge;
            group.members.push_back(ref);
        } else {
            out.devices.push_back(ref);
        }
    }
    for (auto& [edge, group] : groups) {
        out.groups.push_back(std::move(group));
    }
    // Pre-existing groups of the input view are carried through unchanged.
    out.groups.insert(out.groups.end(), view.groups.begin(), view.groups.end());
    return out;
}

}  // namespace fabric_lens::fabric
