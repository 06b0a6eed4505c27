// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "fabric_lens/fabric/routing.hpp"
#include "fabric_lens/fabric/topology.hpp"

namespace fabric_lens::fabric {

// Compute hosts of one edge switch drawn as a single node.
struct HostGroup {
    DeviceRef edge_switch;
    std::vector<DeviceRef> members;

    bool operator==(const HostGroup&) const = default;
};

// A renderable subset of the fabric. Devices and links are sorted and
// unique; a link whose host end is grouped stays in `links` and is drawn
// against the group.
struct TopologyView {
    std::vector<DeviceRef> devices;
    std::vector<LinkId> links;
    std::vector<HostGroup> groups;

    bool operator==(const TopologyView&) const = default;
};

TopologyView full_view(const FabricTopology& topology);

// Union of routed paths between every ordered pair of job hosts, plus each
// host's own link. Throws UnknownGuid when a GUID is not a host.
TopologyView job_subgraph(const FabricTopology& topology, const RoutingTable& routing, std::span<const Guid> job_nodes);

// Collapses the compute hosts of each edge switch present in `view` into one
// group. Storage hosts and switch-switch links are kept as they are.
TopologyView cluster_compute_hosts(const FabricTopology& topology, const TopologyView& view);

inline TopologyView cluster_compute_view(const FabricTopology& topology) {
    return cluster_compute_hosts(topology, full_view(topology));
}

}  // namespace fabric_lens::fabric
