// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fabric_lens/common/text.hpp"
#include "fabric_lens/fabric/topology.hpp"

namespace fabric_lens::fabric {

namespace {

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
    throw FabricError(FabricErrc::MalformedLine, "line " + std::to_string(line_no) + ": " + why);
}

template <typename T>
T parse_uint(std::string_view token, std::size_t line_no, const char* what) {
    T value{};
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        malformed(line_no, std::string("bad ") + what + " '" + std::string(token) + "'");
    }
    return value;
}

Guid parse_guid(std::string_view token, std::size_t line_no) {
    Guid g;
    if (!Guid::parse_hex(token, g)) {
        malformed(line_no, "bad GUID '" + std::string(token) + "'");
    }
    return g;
}

PortRef parse_endpoint(std::string_view token, std::size_t line_no) {
    auto colon = token.rfind(':');
    if (colon == std::string_view::npos) {
        malformed(line_no, "link endpoint must be <guid>:<port>");
    }
    return {parse_guid(token.substr(0, colon), line_no),
            parse_uint<std::uint16_t>(token.substr(colon + 1), line_no, "port")};
}

std::uint64_t parse_gbps(std::string_view token, std::size_t line_no) {
    double gbps = 0.0;
    try {
        std::size_t used = 0;
        gbps = std::stod(std::string(token), &used);
        if (used != token.size()) {
            malformed(line_no, "bad capacity '" + std::string(token) + "'");
        }
    } catch (const std::logic_error&) {
        malformed(line_no, "bad capacity '" + std::string(token) + "'");
    }
    if (!std::isfinite(gbps) || gbps <= 0.0) {
        malformed(line_no, "capacity must be positive");
    }
    return static_cast<std::uint64_t>(std::llround(gbps * 1e9));
}

// Exact decimal rendering of an integral bit rate in Gb/s.
std::string format_gbps(std::uint64_t bps) {
    std::string out = std::to_string(bps / 1'000'000'000ull);
    auto frac = bps % 1'000'000'000ull;
    if (frac != 0) {
        std::string digits = std::to_string(frac);
        digits.insert(0, 9 - digits.size(), '0');
        while (digits.back() == '0') {
            digits.pop_back();
        }
        out += "." + digits;
    }
    return out;
}

}  // namespace

FabricTopology parse_topology(std::string_view text) {
    std::vector<SwitchNode> switches;
    std::vector<HostNode> hosts;
    std::vector<Link> links;

    std::size_t line_no = 0;
    for_each_line(text, [&](std::string_view line) {
        ++line_no;
        auto tokens = split_tokens(strip_comment(line));
        if (tokens.empty()) {
            return;
        }
        const auto& kind = tokens[0];
        if (kind == "switch") {
            if (tokens.size() != 5) {
                malformed(line_no, "switch record needs 4 fields");
            }
            SwitchNode sw;
            sw.guid = parse_guid(tokens[1], line_no);
            sw.lid = Lid{parse_uint<std::uint16_t>(tokens[2], line_no, "LID")};
            if (tokens[3] == "edge") {
                sw.kind = SwitchKind::Edge;
            } else if (tokens[3] == "root") {
                sw.kind = SwitchKind::Root;
            } else {
                malformed(line_no, "switch kind must be edge or root");
            }
            sw.port_count = parse_uint<std::uint32_t>(tokens[4], line_no, "port count");
            switches.push_back(sw);
        } else if (kind == "host") {
            if (tokens.size() != 6) {
                malformed(line_no, "host record needs 5 fields");
            }
            HostNode host;
            host.guid = parse_guid(tokens[1], line_no);
            host.lid = Lid{parse_uint<std::uint16_t>(tokens[2], line_no, "LID")};
            host.hostname = std::string(tokens[3]);
            auto ip = IpAddress::parse(tokens[4]);
            if (!ip) {
                malformed(line_no, "bad IP address '" + std::string(tokens[4]) + "'");
            }
            host.ip = *ip;
            if (tokens[5] == "compute") {
                host.kind = HostKind::Compute;
            } else if (tokens[5] == "storage") {
                host.kind = HostKind::Storage;
            } else {
                malformed(line_no, "host kind must be compute or storage");
            }
            hosts.push_back(std::move(host));
        } else if (kind == "link") {
            if (tokens.size() != 4) {
                malformed(line_no, "link record needs 3 fields");
            }
            Link link;
            link.id = LinkId{static_cast<std::uint32_t>(links.size())};
            link.end_a = parse_endpoint(tokens[1], line_no);
            link.end_b = parse_endpoint(tokens[2], line_no);
            link.capacity_bps = parse_gbps(tokens[3], line_no);
            links.push_back(link);
        } else {
            malformed(line_no, "unknown record '" + std::string(kind) + "'");
        }
    });

    return FabricTopology::create(std::move(switches), std::move(hosts), std::move(links));
}

std::string serialize_topology(const FabricTopology& topology) {
    std::string out;
    out.reserve(64 * (topology.device_count() + topology.links().size()));
    for (const auto& sw : topology.switches()) {
        out += "switch " + sw.guid.to_hex() + " " + std::to_string(sw.lid.value) + " " +
               std::string(to_string(sw.kind)) + " " + std::to_string(sw.port_count) + "\n";
    }
    for (const auto& host : topology.hosts()) {
        out += "host " + host.guid.to_hex() + " " + std::to_string(host.lid.value) + " " + host.hostname + " " +
               host.ip.to_string() + " " + std::string(to_string(host.kind)) + "\n";
    }
    for (const auto& link : topology.links()) {
        out += "link " + link.end_a.device.to_hex() + ":" + std::to_string(link.end_a.port) + " " +
               link.end_b.device.to_hex() + ":" + std::to_string(link.end_b.port) + " " +
               format_gbps(link.capacity_bps) + "\n";
    }
    return out;
}

FabricTopology load_topology_file(const std::string& path) {
    return parse_topology(read_text_file(path));
}

}  // namespace fabric_lens::fabric
