// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fabric_lens/common/error.hpp"
#include "fabric_lens/common/ids.hpp"
#include "fabric_lens/common/ip_address.hpp"

namespace fabric_lens::fabric {

enum class FabricErrc {
    DuplicateLid,
    DuplicateGuid,
    DanglingLinkEndpoint,
    PortConflict,
    MalformedLine,
    InvalidTopology,
    UnroutableTopology,
    UnknownLid,
    UnknownGuid,
    RoutingLoop,
    MissingRoute,
};

using FabricError = CodedError<FabricErrc>;

enum class SwitchKind : std::uint8_t { Edge, Root };
enum class HostKind : std::uint8_t { Compute, Storage };

struct SwitchNode {
    Guid guid;
    Lid lid;
    SwitchKind kind = SwitchKind::Edge;
    std::uint32_t port_count = 0;

    bool operator==(const SwitchNode&) const = default;
};

struct HostNode {
    Guid guid;
    Lid lid;
    std::string hostname;
    IpAddress ip;
    HostKind kind = HostKind::Compute;

    bool operator==(const HostNode&) const = default;
};

struct PortRef {
    Guid device;
    std::uint16_t port = 0;

    auto operator<=>(const PortRef&) const = default;
};

struct Link {
    LinkId id;
    PortRef end_a;
    PortRef end_b;
    std::uint64_t capacity_bps = 0;

    // Byte capacity of one direction over `seconds`.
    double capacity_bytes(double seconds) const {
        return static_cast<double>(capacity_bps) / 8.0 * seconds;
    }

    bool operator==(const Link&) const = default;
};

enum class DeviceType : std::uint8_t { Switch, Host };

// Index into FabricTopology::switches() or hosts().
struct DeviceRef {
    DeviceType type = DeviceType::Switch;
    std::uint32_t index = 0;

    auto operator<=>(const DeviceRef&) const = default;
};

// One end of a link as seen from a device.
struct Attachment {
    LinkId link;
    std::uint16_t local_port = 0;
    // Direction of traffic leaving this device over the link.
    Direction outbound = Direction::AtoB;
    DeviceRef peer;
};

// Immutable validated fabric graph. Construction checks every invariant
// (unique LIDs/GUIDs, port exclusivity, host/edge/root roles) and builds
// lookup indices; afterwards the object is safe for concurrent readers.
class FabricTopology {
public:
    FabricTopology() = default;

    // Throws FabricError on any invariant violation. Link ids must equal
    // their position in `links`.
    static FabricTopology create(std::vector<SwitchNode> switches,
                                 std::vector<HostNode> hosts,
                                 std::vector<Link> links);

    std::span<const SwitchNode> switches() const { return switches_; }
    std::span<const HostNode> hosts() const { return hosts_; }
    std::span<const Link> links() const { return links_; }

    const Link& link(LinkId id) const { return links_.at(id.value); }
    std::size_t device_count() const { return switches_.size() + hosts_.size(); }

    std::optional<DeviceRef> find(Guid guid) const;
    std::optional<DeviceRef> find(Lid lid) const;
    std::optional<DeviceRef> find_hostname(std::string_view hostname) const;

    // Throws UnknownGuid.
    DeviceRef require(Guid guid) const;

    Guid guid_of(DeviceRef ref) const;
    Lid lid_of(DeviceRef ref) const;
    std::string name_of(DeviceRef ref) const;

    const SwitchNode& switch_at(DeviceRef ref) const { return switches_.at(ref.index); }
    const HostNode& host_at(DeviceRef ref) const { return hosts_.at(ref.index); }

    std::span<const Attachment> attachments(DeviceRef ref) const;

    // Link plugged into (device, port), if any.
    std::optional<LinkId> link_at(Guid device, std::uint16_t port) const;

    // Edge switch a host hangs off, and the host's only link.
    DeviceRef edge_of(DeviceRef host) const;
    const Attachment& host_uplink(DeviceRef host) const;

    // Dense 0-based index of a host LID, usable for per-destination tables.
    std::optional<std::uint32_t> host_index_of(Lid lid) const;

    // Device at the far end when leaving over `link` in `dir`.
    DeviceRef far_end(LinkId link, Direction dir) const;
    DeviceRef near_end(LinkId link, Direction dir) const;

    bool operator==(const FabricTopology& other) const {
        return switches_ == other.switches_ && hosts_ == other.hosts_ && links_ == other.links_;
    }

private:
    std::size_t slot(DeviceRef ref) const {
        return ref.type == DeviceType::Switch ? ref.index : switches_.size() + ref.index;
    }

    std::vector<SwitchNode> switches_;
    std::vector<HostNode> hosts_;
    std::vector<Link> links_;

    std::unordered_map<Guid, DeviceRef> by_guid_;
    std::unordered_map<std::uint16_t, DeviceRef> by_lid_;
    std::unordered_map<std::string, DeviceRef> by_hostname_;
    std::vector<std::vector<Attachment>> attachments_;  // by slot()
    std::vector<DeviceRef> link_end_a_;
    std::vector<DeviceRef> link_end_b_;
};

// Topology text format, one record per line, `#` starts a comment:
//   switch <guid-hex16> <lid> <edge|root> <port_count>
//   host   <guid-hex16> <lid> <hostname> <ip> <compute|storage>
//   link   <guidA>:<portA> <guidB>:<portB> <capacity_gbps>
FabricTopology parse_topology(std::string_view text);
std::string serialize_topology(const FabricTopology& topology);

FabricTopology load_topology_file(const std::string& path);

std::string_view to_string(SwitchKind kind);
std::string_view to_string(HostKind kind);

}  // namespace fabric_lens::fabric
