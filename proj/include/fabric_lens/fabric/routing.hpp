// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fabric_lens/fabric/topology.hpp"

namespace fabric_lens::fabric {

// Destination-LID forwarding table for every switch. Entries are output
// ports; port 0 means "no route".
class RoutingTable {
public:
    RoutingTable() = default;

    // Table with every entry unset, sized for `topology`.
    static RoutingTable empty_for(const FabricTopology& topology);

    std::uint16_t out_port(std::uint32_t switch_index, std::uint32_t host_index) const {
        return ports_[switch_index * host_count_ + host_index];
    }
    void set(std::uint32_t switch_index, std::uint32_t host_index, std::uint16_t port) {
        ports_[switch_index * host_count_ + host_index] = port;
    }

    std::size_t switch_count() const { return switch_count_; }
    std::size_t host_count() const { return host_count_; }
    bool complete() const;

    bool operator==(const RoutingTable&) const = default;

private:
    std::size_t switch_count_ = 0;
    std::size_t host_count_ = 0;
    std::vector<std::uint16_t> ports_;
};

// Static routes for a two-level fat tree. A destination on the local edge
// switch goes straight down; otherwise the edge switch picks up-link
// `dst_lid mod up_link_count` from its up-links ordered by (root LID, link
// id), and the root picks `dst_lid mod n` among its parallel links to the
// destination's edge switch, ordered by link id.
//
// Throws UnroutableTopology when the fabric is not a two-level fat tree in
// which every edge switch reaches every root switch.
RoutingTable compute_routing(const FabricTopology& topology);

// Applies `route <switch-guid> <dst-lid> <out-port>` lines on top of `table`.
void apply_routes(RoutingTable& table, const FabricTopology& topology, std::string_view text);

// Renders the full table in the route-file format; stable for a given input.
std::string serialize_routes(const RoutingTable& table, const FabricTopology& topology);

struct Hop {
    LinkId link;
    Direction dir = Direction::AtoB;

    bool operator==(const Hop&) const = default;
};

using Path = std::vector<Hop>;

// Follows the table hop by hop from host `src` to host `dst`. Throws
// UnknownLid, MissingRoute, or RoutingLoop (more hops than devices).
Path route_path(const FabricTopology& topology, const RoutingTable& routing, Lid src, Lid dst);

// Same walk, starting at a switch instead of a host.
Path route_from_switch(const FabricTopology& topology, const RoutingTable& routing, DeviceRef start, Lid dst);

}  // namespace fabric_lens::fabric
