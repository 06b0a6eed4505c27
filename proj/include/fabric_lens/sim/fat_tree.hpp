// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "fabric_lens/fabric/topology.hpp"

namespace fabric_lens::sim {

// Shape of a generated two-level fat tree.
//
// Every edge switch links to every root switch `links_per_edge_root_pair`
// times. Real clusters rarely divide evenly, so two trims let a spec hit
// exact device and link counts: the last `host_shortfall` edge switches carry
// one compute host fewer, and `extra_uplinks` additional edge-root links are
// spread over distinct (edge, root) pairs.
struct FatTreeSpec {
    std::uint32_t edge_switches = 1;
    std::uint32_t root_switches = 1;
    std::uint32_t hosts_per_edge = 1;
    std::uint32_t storage_hosts_per_edge = 0;
    std::uint32_t links_per_edge_root_pair = 1;
    std::uint64_t link_capacity_bps = 100'000'000'000ull;
    std::uint32_t host_shortfall = 0;
    std::uint32_t extra_uplinks = 0;

    std::uint64_t host_count() const;
    std::uint64_t switch_count() const { return std::uint64_t{edge_switches} + root_switches; }
    std::uint64_t link_count() const;

    bool operator==(const FatTreeSpec&) const = default;
};

// 2 edge, 2 root, 2 compute hosts per edge switch, single links.
FatTreeSpec reference_spec();
// 1,738 hosts / 109 switches / 3,579 links.
FatTreeSpec osc_scale_spec();
// 8,811 hosts / 494 switches / 22,819 links.
FatTreeSpec frontera_scale_spec();

// Deterministic given the spec. Switch LIDs: roots 1..R, then edges; hosts
// follow with sequential LIDs, compute before storage on each edge switch.
// Throws std::invalid_argument for an inconsistent spec.
fabric::FabricTopology generate_fat_tree(const FatTreeSpec& spec);

}  // namespace fabric_lens::sim
