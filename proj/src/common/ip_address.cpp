// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/common/ip_address.hpp"

#include <arpa/inet.h>

#include <cstring>

namespace fabric_lens {

namespace {
constexpr std::array<std::uint8_t, 12> kV4MappedPrefix{0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0xff, 0xff};
}

std::optional<IpAddress> IpAddress::parse(std::string_view text) {
    std::string s(text);
    in_addr v4{};
    if (inet_pton(AF_INET, s.c_str(), &v4) == 1) {
        return from_v4(ntohl(v4.s_addr));
    }
    in6_addr v6{};
    if (inet_pton(AF_INET6, s.c_str(), &v6) == 1) {
        std::array<std::uint8_t, 16> bytes{};
        std::memcpy(bytes.data(), &v6, 16);
        return IpAddress(bytes);
    }
    return std::nullopt;
}

IpAddress IpAddress::from_v4(std::uint32_t host_order) {
    std::array<std::uint8_t, 16> bytes{};
    std::copy(kV4MappedPrefix.begin(), kV4MappedPrefix.end(), bytes.begin());
    bytes[12] = static_cast<std::uint8_t>(host_order >> 24);
    bytes[13] = static_cast<std::uint8_t>(host_order >> 16);
    bytes[14] = static_cast<std::uint8_t>(host_order >> 8);
    bytes[15] = static_cast<std::uint8_t>(host_order);
    return IpAddress(bytes);
}

bool IpAddress::is_v4() const {
    return std::equal(kV4MappedPrefix.begin(), kV4MappedPrefix.end(), bytes_.begin());
}

std::string IpAddress::to_string() const {
    char buf[INET6_ADDRSTRLEN] = {};
    if (is_v4()) {
        inet_ntop(AF_INET, bytes_.data() + 12, buf, sizeof(buf));
    } else {
        inet_ntop(AF_INET6, bytes_.data(), buf, sizeof(buf));
    }
    return buf;
}

}  // namespace fabric_lens
