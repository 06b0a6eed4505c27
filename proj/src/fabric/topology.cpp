// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/fabric/topology.hpp"

#include <algorithm>
#include <set>

namespace fabric_lens::fabric {

namespace {

constexpr std::uint16_t kMaxUnicastLid = 0xBFFF;

[[noreturn]] void fail(FabricErrc code, std::string message) {
    throw FabricError(code, std::move(message));
}

}  // namespace

FabricTopology FabricTopology::create(std::vector<SwitchNode> switches,
                                      std::vector<HostNode> hosts,
                                      std::vector<Link> links) {
    FabricTopology t;
    t.switches_ = std::move(switches);
    t.hosts_ = std::move(hosts);
    t.links_ = std::move(links);

    auto register_device = [&](Guid guid, Lid lid, DeviceRef ref) {
        if (lid.value == 0 || lid.value > kMaxUnicastLid) {
            fail(FabricErrc::InvalidTopology, "LID " + std::to_string(lid.value) + " outside unicast range");
        }
        if (!t.by_guid_.emplace(guid, ref).second) {
            fail(FabricErrc::DuplicateGuid, "duplicate GUID " + guid.to_hex());
        }
        if (!t.by_lid_.emplace(lid.value, ref).second) {
            fail(FabricErrc::DuplicateLid, "duplicate LID " + std::to_string(lid.value));
        }
    };

    for (std::uint32_t i = 0; i < t.switches_.size(); ++i) {
        const auto& sw = t.switches_[i];
        if (sw.port_count == 0) {
            fail(FabricErrc::InvalidTopology, "switch " + sw.guid.to_hex() + " has no ports");
        }
        register_device(sw.guid, sw.lid, {DeviceType::Switch, i});
    }
    for (std::uint32_t i = 0; i < t.hosts_.size(); ++i) {
        const auto& host = t.hosts_[i];
        if (host.hostname.empty()) {
            fail(FabricErrc::InvalidTopology, "host " + host.guid.to_hex() + " has an empty hostname");
        }
        register_device(host.guid, host.lid, {DeviceType::Host, i});
        if (!t.by_hostname_.emplace(host.hostname, DeviceRef{DeviceType::Host, i}).second) {
            fail(FabricErrc::InvalidTopology, "duplicate hostname " + host.hostname);
        }
    }

    t.attachments_.resize(t.device_count());
    t.link_end_a_.reserve(t.links_.size());
    t.link_end_b_.reserve(t.links_.size());
    std::set<PortRef> used_ports;

    for (std::size_t i = 0; i < t.links_.size(); ++i) {
        const auto& link = t.links_[i];
        if (link.id.value != i) {
            fail(FabricErrc::InvalidTopology, "link ids must be sequential from 0");
        }
        if (link.capacity_bps == 0) {
            fail(FabricErrc::InvalidTopology, "link " + std::to_string(i) + " has zero capacity");
        }
        auto a = t.find(link.end_a.device);
        auto b = t.find(link.end_b.device);
        if (!a || !b) {
            fail(FabricErrc::DanglingLinkEndpoint,
                 "link " + std::to_string(i) + " references unknown device " +
                     (!a ? link.end_a.device : link.end_b.device).to_hex());
        }
        if (link.end_a.device == link.end_b.device) {
            fail(FabricErrc::InvalidTopology, "link " + std::to_string(i) + " is a self loop");
        }
        for (const auto& [end, ref] : {std::pair{link.end_a, *a}, std::pair{link.end_b, *b}}) {
            if (end.port == 0) {
                fail(FabricErrc::PortConflict, "port 0 is not a data port (link " + std::to_string(i) + ")");
            }
            if (ref.type == DeviceType::Switch && end.port > t.switches_[ref.index].port_count) {
                fail(FabricErrc::PortConflict, "port " + std::to_string(end.port) + " exceeds port count of switch " +
                                                   end.device.to_hex());
            }
            if (!used_ports.insert(end).second) {
                fail(FabricErrc::PortConflict,
                     "port " + end.device.to_hex() + ":" + std::to_string(end.port) + " used by two links");
            }
        }
        t.link_end_a_.push_back(*a);
        t.link_end_b_.push_back(*b);
        t.attachments_[t.slot(*a)].push_back({link.id, link.end_a.port, Direction::AtoB, *b});
        t.attachments_[t.slot(*b)].push_back({link.id, link.end_b.port, Direction::BtoA, *a});
    }

    for (std::uint32_t i = 0; i < t.hosts_.size(); ++i) {
        const auto& att = t.attachments_[t.slot({DeviceType::Host, i})];
        const auto& host = t.hosts_[i];
        if (att.size() != 1) {
            fail(FabricErrc::InvalidTopology,
                 "host " + host.hostname + " must have exactly one link, has " + std::to_string(att.size()));
        }
        const auto peer = att.front().peer;
        if (peer.type != DeviceType::Switch || t.switches_[peer.index].kind != SwitchKind::Edge) {
            fail(FabricErrc::InvalidTopology, "host " + host.hostname + " must attach to an edge switch");
        }
    }
    for (std::uint32_t i = 0; i < t.switches_.size(); ++i) {
        const auto& sw = t.switches_[i];
        const auto& att = t.attachments_[t.slot({DeviceType::Switch, i})];
        const bool has_host = std::any_of(att.begin(), att.end(),
                                          [](const Attachment& a) { return a.peer.type == DeviceType::Host; });
        if (sw.kind == SwitchKind::Root && has_host) {
            fail(FabricErrc::InvalidTopology, "root switch " + sw.guid.to_hex() + " has a host link");
        }
        if (sw.kind == SwitchKind::Edge && !has_host) {
            fail(FabricErrc::InvalidTopology, "edge switch " + sw.guid.to_hex() + " has no host link");
        }
    }
    return t;
}

std::optional<DeviceRef> FabricTopology::find(Guid guid) const {
    auto it = by_guid_.find(guid);
    if (it == by_guid_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<DeviceRef> FabricTopology::find(Lid lid) const {
    auto it = by_lid_.find(lid.value);
    if (it == by_lid_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<DeviceRef> FabricTopology::find_hostname(std::string_view hostname) const {
    auto it = by_hostname_.find(std::string(hostname));
    if (it == by_hostname_.end()) {
        return std::nullopt;
    }
    return it->second;
}

DeviceRef FabricTopology::require(Guid guid) const {
    auto ref = find(guid);
    if (!ref) {
        fail(FabricErrc::UnknownGuid, "unknown GUID " + guid.to_hex());
    }
    return *ref;
}

Guid FabricTopology::guid_of(DeviceRef ref) const {
    return ref.type == DeviceType::Switch ? switches_.at(ref.index).guid : hosts_.at(ref.index).guid;
}

Lid FabricTopology::lid_of(DeviceRef ref) const {
    return ref.type == DeviceType::Switch ? switches_.at(ref.index).lid : hosts_.at(ref.index).lid;
}

std::string FabricTopology::name_of(DeviceRef ref) const {
    if (ref.type == DeviceType::Host) {
        return hosts_.at(ref.index).hostname;
    }
    const auto& sw = switches_.at(ref.index);
    return std::string(sw.kind == SwitchKind::Edge ? "edge-" : "root-") + std::to_string(sw.lid.value);
}

std::span<const Attachment> FabricTopology::attachments(DeviceRef ref) const {
    return attachments_.at(slot(ref));
}

std::optional<LinkId> FabricTopology::link_at(Guid device, std::uint16_t port) const {
    auto ref = find(device);
    if (!ref) {
        return std::nullopt;
    }
    for (const auto& a : attachments(*ref)) {
        if (a.local_port == port) {
            return a.link;
        }
    }
    return std::nullopt;
}

const Attachment& FabricTopology::host_uplink(DeviceRef host) const {
    return attachments_.at(slot(host)).front();
}

DeviceRef FabricTopology::edge_of(DeviceRef host) const { return host_uplink(host).peer; }

std::optional<std::uint32_t> FabricTopology::host_index_of(Lid lid) const {
    auto ref = find(lid);
    if (!ref || ref->type != DeviceType::Host) {
        return std::nullopt;
    }
    return ref->index;
}

DeviceRef FabricTopology::far_end(LinkId link, Direction dir) const {
    return dir == Direction::AtoB ? link_end_b_.at(link.value) : link_end_a_.at(link.value);
}

DeviceRef FabricTopology::near_end(LinkId link, Direction dir) const {
    return dir == Direction::AtoB ? link_end_a_.at(link.value) : link_end_b_.at(link.value);
}

std::string_view to_string(SwitchKind kind) { return kind == SwitchKind::Edge ? "edge" : "root"; }
std::string_view to_string(HostKind kind) { return kind == HostKind::Compute ? "compute" : "storage"; }

}  // namespace fabric_lens::fabric
