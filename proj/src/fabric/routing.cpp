// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/fabric/routing.hpp"

#include <algorithm>
#include <charconv>

#include "fabric_lens/common/text.hpp"

namespace fabric_lens::fabric {

namespace {

[[noreturn]] void unroutable(const std::string& why) {
    throw FabricError(FabricErrc::UnroutableTopology, why);
}

}  // namespace

RoutingTable RoutingTable::empty_for(const FabricTopology& topology) {
    RoutingTable table;
    table.switch_count_ = topology.switches().size();
    table.host_count_ = topology.hosts().size();
    table.ports_.assign(table.switch_count_ * table.host_count_, 0);
    return table;
}

bool RoutingTable::complete() const {
    return std::none_of(ports_.begin(), ports_.end(), [](std::uint16_t p) { return p == 0; });
}

RoutingTable compute_routing(const FabricTopology& topology) {
    auto table = RoutingTable::empty_for(topology);
    const auto switches = topology.switches();
    const auto hosts = topology.hosts();

    std::vector<std::uint32_t> roots;
    std::vector<std::uint32_t> edges;
    for (std::uint32_t i = 0; i < switches.size(); ++i) {
        (switches[i].kind == SwitchKind::Root ? roots : edges).push_back(i);
    }
    if (edges.size() > 1 && roots.empty()) {
        unroutable("several edge switches but no root switch");
    }

    // Up-links of each edge switch ordered by (root LID, link id); for each
    // root, its down-links grouped by edge switch and ordered by link id.
    std::vector<std::vector<const Attachment*>> uplinks(switches.size());
    std::vector<std::vector<std::vector<std::uint16_t>>> downlinks(switches.size());

    for (auto e : edges) {
        std::vector<bool> reaches(switches.size(), false);
        for (const auto& att : topology.attachments({DeviceType::Switch, e})) {
            if (att.peer.type == DeviceType::Host) {
                continue;
            }
            if (switches[att.peer.index].kind != SwitchKind::Root) {
                unroutable("edge switch " + switches[e].guid.to_hex() + " links to another edge switch");
            }
            reaches[att.peer.index] = true;
            uplinks[e].push_back(&att);
        }
        for (auto r : roots) {
            if (!reaches[r]) {
                unroutable("edge switch " + switches[e].guid.to_hex() + " has no link to root switch " +
                           switches[r].guid.to_hex());
            }
        }
        std::sort(uplinks[e].begin(), uplinks[e].end(), [&](const Attachment* x, const Attachment* y) {
            auto lx = switches[x->peer.index].lid;
            auto ly = switches[y->peer.index].lid;
            return lx != ly ? lx < ly : x->link < y->link;
        });
    }
    for (auto r : roots) {
        downlinks[r].resize(switches.size());
        std::vector<std::pair<LinkId, const Attachment*>> sorted;
        for (const auto& att : topology.attachments({DeviceType::Switch, r})) {
            if (att.peer.type != DeviceType::Switch || switches[att.peer.index].kind != SwitchKind::Edge) {
                unroutable("root switch " + switches[r].guid.to_hex() + " links to a non-edge device");
            }
            sorted.emplace_back(att.link, &att);
        }
        std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        for (const auto& [id, att] : sorted) {
            downlinks[r][att->peer.index].push_back(att->local_port);
        }
    }

    for (std::uint32_t h = 0; h < hosts.size(); ++h) {
        const DeviceRef host{DeviceType::Host, h};
        const auto& att = topology.host_uplink(host);
        const auto dst_edge = att.peer.index;
        const std::uint32_t lid = hosts[h].lid.value;

        // The edge switch's port toward the host is the far end of the host link.
        const auto& link = topology.link(att.link);
        const auto down_port = att.outbound == Direction::AtoB ? link.end_b.port : link.end_a.port;

        for (auto e : edges) {
            if (e == dst_edge) {
                table.set(e, h, down_port);
            } else {
                const auto& ups = uplinks[e];
                table.set(e, h, ups[lid % ups.size()]->local_port);
            }
        }
        for (auto r : roots) {
            const auto& downs = downlinks[r][dst_edge];
            table.set(r, h, downs[lid % downs.size()]);
        }
    }
    return table;
}

void apply_routes(RoutingTable& table, const FabricTopology& topology, std::string_view text) {
    std::size_t line_no = 0;
    auto bad = [&](const std::string& why) {
        throw FabricError(FabricErrc::MalformedLine, "line " + std::to_string(line_no) + ": " + why);
    };
    for_each_line(text, [&](std::string_view line) {
        ++line_no;
        auto tokens = split_tokens(strip_comment(line));
        if (tokens.empty()) {
            return;
        }
        if (tokens.size() != 4 || tokens[0] != "route") {
            bad("expected 'route <switch-guid> <dst-lid> <out-port>'");
        }
        Guid guid;
        if (!Guid::parse_hex(tokens[1], guid)) {
            bad("bad GUID");
        }
        std::uint16_t lid = 0;
        std::uint16_t port = 0;
        auto r1 = std::from_chars(tokens[2].data(), tokens[2].data() + tokens[2].size(), lid);
        auto r2 = std::from_chars(tokens[3].data(), tokens[3].data() + tokens[3].size(), port);
        if (r1.ec != std::errc{} || r2.ec != std::errc{}) {
            bad("bad LID or port");
        }
        auto sw = topology.find(guid);
        if (!sw || sw->type != DeviceType::Switch) {
            bad("GUID is not a switch");
        }
        auto host = topology.host_index_of(Lid{lid});
        if (!host) {
            bad("LID " + std::to_string(lid) + " is not a host");
        }
        if (!topology.link_at(guid, port)) {
            bad("port " + std::to_string(port) + " has no link");
        }
        table.set(sw->index, *host, port);
    });
}

std::string serialize_routes(const RoutingTable& table, const FabricTopology& topology) {
    std::string out;
    const auto switches = topology.switches();
    const auto hosts = topology.hosts();
    out.reserve(table.switch_count() * table.host_count() * 32);
    for (std::uint32_t s = 0; s < switches.size(); ++s) {
        const auto guid = switches[s].guid.to_hex();
        for (std::uint32_t h = 0; h < hosts.size(); ++h) {
            auto port = table.out_port(s, h);
            if (port == 0) {
                continue;
            }
            out += "route ";
            out += guid;
            out += ' ';
            out += std::to_string(hosts[h].lid.value);
            out += ' ';
            out += std::to_string(port);
            out += '\n';
        }
    }
    return out;
}

namespace {

void walk(const FabricTopology& topology, const RoutingTable& routing, DeviceRef current, std::uint32_t dst_index,
          Path& path) {
    const DeviceRef dst{DeviceType::Host, dst_index};
    const std::size_t max_hops = topology.device_count();
    while (true) {
        if (path.size() > max_hops) {
            throw FabricError(FabricErrc::RoutingLoop,
                              "route to " + topology.name_of(dst) + " exceeds " + std::to_string(max_hops) + " hops");
        }
        const auto port = routing.out_port(current.index, dst_index);
        if (port == 0) {
            throw FabricError(FabricErrc::MissingRoute,
                              "switch " + topology.guid_of(current).to_hex() + " has no route to " + topology.name_of(dst));
        }
        const Attachment* next = nullptr;
        for (const auto& att : topology.attachments(current)) {
            if (att.local_port == port) {
                next = &att;
                break;
            }
        }
        if (next == nullptr) {
            throw FabricError(FabricErrc::MissingRoute, "switch " + topology.guid_of(current).to_hex() + " port " +
                                                            std::to_string(port) + " has no link");
        }
        path.push_back({next->link, next->outbound});
        if (next->peer.type == DeviceType::Host) {
            if (next->peer != dst) {
                throw FabricError(FabricErrc::MissingRoute, "route to " + topology.name_of(dst) +
                                                                " delivers to " + topology.name_of(next->peer));
            }
            return;
        }
        current = next->peer;
    }
}

}  // namespace

Path route_path(const FabricTopology& topology, const RoutingTable& routing, Lid src, Lid dst) {
    auto src_index = topology.host_index_of(src);
    auto dst_index = topology.host_index_of(dst);
    if (!src_index || !dst_index) {
        throw FabricError(FabricErrc::UnknownLid,
                          "LID " + std::to_string((!src_index ? src : dst).value) + " is not a host");
    }
    Path path;
    if (src == dst) {
        return path;
    }
    const auto& up = topology.host_uplink({DeviceType::Host, *src_index});
    path.push_back({up.link, up.outbound});
    walk(topology, routing, up.peer, *dst_index, path);
    return path;
}

Path route_from_switch(const FabricTopology& topology, const RoutingTable& routing, DeviceRef start, Lid dst) {
    auto dst_index = topology.host_index_of(dst);
    if (!dst_index) {
        throw FabricError(FabricErrc::UnknownLid, "LID " + std::to_string(dst.value) + " is not a host");
    }
    Path path;
    walk(topology, routing, start, *dst_index, path);
    return path;
}

}  // namespace fabric_lens::fabric
