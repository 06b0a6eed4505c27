// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/correlate/host_maps.hpp"

#include "fabric_lens/common/text.hpp"

namespace fabric_lens::correlate {

namespace {

[[noreturn]] void bad_line(std::size_t line, const std::string& what) {
    throw CorrelateError(CorrelateErrc::MalformedLine, "line " + std::to_string(line) + ": " + what);
}

IpAddress parse_ip(std::size_t line, std::string_view token) {
    auto ip = IpAddress::parse(token);
    if (!ip) {
        bad_line(line, "bad address '" + std::string(token) + "'");
    }
    return *ip;
}

}  // namespace

HostMaps HostMaps::from_topology(const fabric::FabricTopology& topology) {
    HostMaps maps;
    for (const auto& h : topology.hosts()) {
        maps.hosts.emplace(h.ip, h.hostname);
    }
    return maps;
}

std::unordered_map<IpAddress, std::string> parse_hosts_file(std::string_view text) {
    std::unordered_map<IpAddress, std::string> out;
    std::size_t line = 0;
    for_each_line(text, [&](std::string_view raw) {
        ++line;
        auto tokens = split_tokens(strip_comment(raw));
        if (tokens.empty()) {
            return;
        }
        if (tokens.size() < 2) {
            bad_line(line, "expected '<ip> <hostname>'");
        }
        out.emplace(parse_ip(line, tokens[0]), std::string(tokens[1]));
    });
    return out;
}

std::unordered_map<IpAddress, Guid> parse_arp_file(std::string_view text) {
    std::unordered_map<IpAddress, Guid> out;
    std::size_t line = 0;
    for_each_line(text, [&](std::string_view raw) {
        ++line;
        auto tokens = split_tokens(strip_comment(raw));
        if (tokens.empty()) {
            return;
        }
        if (tokens.size() != 2) {
            bad_line(line, "expected '<ip> <guid>'");
        }
        Guid guid;
        if (!Guid::parse_hex(tokens[1], guid)) {
            bad_line(line, "bad guid '" + std::string(tokens[1]) + "'");
        }
        out.emplace(parse_ip(line, tokens[0]), guid);
    });
    return out;
}

std::optional<fabric::DeviceRef> resolve_device(const HostMaps& maps, const fabric::FabricTopology& topology,
                                                const IpAddress& ip) {
    if (auto it = maps.hosts.find(ip); it != maps.hosts.end()) {
        if (auto ref = topology.find_hostname(it->second)) {
            return ref;
        }
    }
    if (auto it = maps.arp.find(ip); it != maps.arp.end()) {
        return topology.find(it->second);
    }
    return std::nullopt;
}

std::string resolve_host(const HostMaps& maps, const fabric::FabricTopology& topology, const IpAddress& ip) {
    if (auto it = maps.hosts.find(ip); it != maps.hosts.end()) {
        return it->second;
    }
    if (auto it = maps.arp.find(ip); it != maps.arp.end()) {
        if (auto ref = topology.find(it->second)) {
            return topology.name_of(*ref);
        }
    }
    throw CorrelateError(CorrelateErrc::UnresolvedHost, "cannot resolve " + ip.to_string());
}

}  // namespace fabric_lens::correlate
