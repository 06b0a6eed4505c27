// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace fabric_lens {

// IPv4 or IPv6 address held in 16-byte IPv6 form; IPv4 is stored IPv4-mapped
// (::ffff:a.b.c.d), which is also the on-wire representation.
class IpAddress {
public:
    IpAddress() = default;
    explicit IpAddress(const std::array<std::uint8_t, 16>& bytes) : bytes_(bytes) {}

    static std::optional<IpAddress> parse(std::string_view text);
    static IpAddress from_v4(std::uint32_t host_order);

    bool is_v4() const;
    // Dotted quad for IPv4-mapped addresses, RFC 5952 text otherwise.
    std::string to_string() const;

    const std::array<std::uint8_t, 16>& bytes() const { return bytes_; }

    auto operator<=>(const IpAddress&) const = default;

private:
    std::array<std::uint8_t, 16> bytes_{};
};

}  // namespace fabric_lens

template <>
struct std::hash<fabric_lens::IpAddress> {
    std::size_t operator()(const fabric_lens::IpAddress& ip) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (auto b : ip.bytes()) {
            h = (h ^ b) * 1099511628211ull;
        }
        return h;
    }
};
