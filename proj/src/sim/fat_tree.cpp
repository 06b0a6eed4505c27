// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/sim/fat_tree.hpp"

#include <cstdio>
#include <stdexcept>

namespace fabric_lens::sim {

using fabric::HostKind;
using fabric::HostNode;
using fabric::Link;
using fabric::PortRef;
using fabric::SwitchKind;
using fabric::SwitchNode;

namespace {

constexpr std::uint64_t kSwitchGuidBase = 0x0008f10500000000ull;
constexpr std::uint64_t kHostGuidBase = 0x0002c90300000000ull;
constexpr std::uint32_t kComputeNet = 0x0A010000;  // 10.1.0.0/16
constexpr std::uint32_t kStorageNet = 0x0A020000;  // 10.2.0.0/16

std::string numbered(const char* prefix, std::uint64_t n) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%05llu", prefix, static_cast<unsigned long long>(n));
    return buf;
}

}  // namespace

std::uint64_t FatTreeSpec::host_count() const {
    return std::uint64_t{edge_switches} * (hosts_per_edge + storage_hosts_per_edge) - host_shortfall;
}

std::uint64_t FatTreeSpec::link_count() const {
    return host_count() + std::uint64_t{edge_switches} * root_switches * links_per_edge_root_pair + extra_uplinks;
}

FatTreeSpec reference_spec() {
    FatTreeSpec s;
    s.edge_switches = 2;
    s.root_switches = 2;
    s.hosts_per_edge = 2;
    return s;
}

FatTreeSpec osc_scale_spec() {
    FatTreeSpec s;
    s.edge_switches = 89;
    s.root_switches = 20;
    s.hosts_per_edge = 19;
    s.storage_hosts_per_edge = 1;
    s.host_shortfall = 42;
    s.extra_uplinks = 61;
    s.link_capacity_bps = 100'000'000'000ull;
    return s;
}

FatTreeSpec frontera_scale_spec() {
    FatTreeSpec s;
    s.edge_switches = 464;
    s.root_switches = 30;
    s.hosts_per_edge = 19;
    s.host_shortfall = 5;
    s.extra_uplinks = 88;
    s.link_capacity_bps = 200'000'000'000ull;
    return s;
}

fabric::FabricTopology generate_fat_tree(const FatTreeSpec& spec) {
    if (spec.edge_switches == 0 || spec.root_switches == 0 || spec.hosts_per_edge == 0 ||
        spec.links_per_edge_root_pair == 0) {
        throw std::invalid_argument("fat tree counts must be at least 1");
    }
    if (spec.link_capacity_bps == 0) {
        throw std::invalid_argument("link capacity must be positive");
    }
    if (spec.host_shortfall > spec.edge_switches) {
        throw std::invalid_argument("host_shortfall exceeds the number of edge switches");
    }
    if (spec.host_shortfall > 0 && spec.hosts_per_edge + spec.storage_hosts_per_edge < 2) {
        throw std::invalid_argument("host_shortfall would leave an edge switch without hosts");
    }
    if (std::uint64_t{spec.extra_uplinks} > std::uint64_t{spec.edge_switches} * spec.root_switches) {
        throw std::invalid_argument("extra_uplinks exceeds the number of edge-root pairs");
    }
    if (spec.switch_count() + spec.host_count() > 0xBFFF) {
        throw std::invalid_argument("fabric does not fit the unicast LID space");
    }

    const auto E = spec.edge_switches;
    const auto R = spec.root_switches;
    std::vector<std::uint32_t> next_port(E + R, 1);  // roots first, then edges
    auto root_guid = [&](std::uint32_t r) { return Guid{kSwitchGuidBase | (r + 1)}; };
    auto edge_guid = [&](std::uint32_t e) { return Guid{kSwitchGuidBase | (R + e + 1)}; };

    std::vector<HostNode> hosts;
    std::vector<Link> links;
    hosts.reserve(spec.host_count());
    links.reserve(spec.link_count());
    auto add_link = [&](PortRef a, PortRef b) {
        links.push_back({LinkId{static_cast<std::uint32_t>(links.size())}, a, b, spec.link_capacity_bps});
    };

    std::uint16_t lid = static_cast<std::uint16_t>(E + R + 1);
    std::uint64_t compute_ordinal = 0;
    std::uint64_t storage_ordinal = 0;
    for (std::uint32_t e = 0; e < E; ++e) {
        const bool short_edge = e >= E - spec.host_shortfall;
        const auto compute = spec.hosts_per_edge - (short_edge ? 1 : 0);
        for (std::uint32_t i = 0; i < compute + spec.storage_hosts_per_edge; ++i) {
            const bool storage = i >= compute;
            HostNode h;
            h.guid = Guid{kHostGuidBase | (hosts.size() + 1)};
            h.lid = Lid{lid++};
            if (storage) {
                ++storage_ordinal;
                h.hostname = numbered("oss", storage_ordinal);
                h.ip = IpAddress::from_v4(kStorageNet + static_cast<std::uint32_t>(storage_ordinal));
                h.kind = HostKind::Storage;
            } else {
                ++compute_ordinal;
                h.hostname = numbered("node", compute_ordinal);
                h.ip = IpAddress::from_v4(kComputeNet + static_cast<std::uint32_t>(compute_ordinal));
                h.kind = HostKind::Compute;
            }
            add_link({h.guid, 1}, {edge_guid(e), static_cast<std::uint16_t>(next_port[R + e]++)});
            hosts.push_back(std::move(h));
        }
    }

    auto uplink = [&](std::uint32_t e, std::uint32_t r) {
        add_link({edge_guid(e), static_cast<std::uint16_t>(next_port[R + e]++)},
                 {root_guid(r), static_cast<std::uint16_t>(next_port[r]++)});
    };
    for (std::uint32_t e = 0; e < E; ++e) {
        for (std::uint32_t r = 0; r < R; ++r) {
            for (std::uint32_t l = 0; l < spec.links_per_edge_root_pair; ++l) {
                uplink(e, r);
            }
        }
    }
    // (p mod E, (p / E + p mod E) mod R) visits each pair at most once for p < E*R.
    for (std::uint32_t p = 0; p < spec.extra_uplinks; ++p) {
        const auto e = p % E;
        uplink(e, (p / E + e) % R);
    }

    std::vector<SwitchNode> switches;
    switches.reserve(E + R);
    for (std::uint32_t r = 0; r < R; ++r) {
        switches.push_back({root_guid(r), Lid{static_cast<std::uint16_t>(r + 1)}, SwitchKind::Root, next_port[r] - 1});
    }
    for (std::uint32_t e = 0; e < E; ++e) {
        switches.push_back(
            {edge_guid(e), Lid{static_cast<std::uint16_t>(R + e + 1)}, SwitchKind::Edge, next_port[R + e] - 1});
    }
    return fabric::FabricTopology::create(std::move(switches), std::move(hosts), std::move(links));
}

}  // namespace fabric_lens::sim
