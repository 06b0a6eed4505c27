// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <unordered_map>

#include "fabric_lens/common/error.hpp"
#include "fabric_lens/common/ids.hpp"
#include "fabric_lens/common/ip_address.hpp"
#include "fabric_lens/fabric/topology.hpp"

namespace fabric_lens::correlate {

enum class CorrelateErrc { UnresolvedHost, UnknownGuid, CounterRegression, MalformedLine, TooFewNodes, InvalidArgument };
using CorrelateError = CodedError<CorrelateErrc>;

// IP resolution sources. The hosts file wins; ARP entries are the fallback.
struct HostMaps {
    std::unordered_map<IpAddress, std::string> hosts;  // ip -> hostname
    std::unordered_map<IpAddress, Guid> arp;           // ip -> device guid

    // Seeds `hosts` from the address column of the topology file.
    static HostMaps from_topology(const fabric::FabricTopology& topology);
};

// `<ip> <hostname> [aliases...]`; '#' starts a comment. Later lines do not
// override earlier ones, as with /etc/hosts.
std::unordered_map<IpAddress, std::string> parse_hosts_file(std::string_view text);
// `<ip> <guid-hex16>`.
std::unordered_map<IpAddress, Guid> parse_arp_file(std::string_view text);

// Throws CorrelateError(UnresolvedHost) when neither source knows `ip`.
std::string resolve_host(const HostMaps& maps, const fabric::FabricTopology& topology, const IpAddress& ip);

// Like resolve_host but yields the topology device; a hosts-file name that is
// not in the topology falls through to ARP.
std::optional<fabric::DeviceRef> resolve_device(const HostMaps& maps, const fabric::FabricTopology& topology,
                                                const IpAddress& ip);

}  // namespace fabric_lens::correlate
