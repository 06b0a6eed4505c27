// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace fabric_lens {

// 64-bit globally unique device identifier (host adapter or switch).
struct Guid {
    std::uint64_t value = 0;

    constexpr Guid() = default;
    constexpr explicit Guid(std::uint64_t v) : value(v) {}

    constexpr auto operator<=>(const Guid&) const = default;

    // 16 lowercase hex digits, no prefix.
    std::string to_hex() const;
    // Accepts 1..16 hex digits with an optional 0x prefix.
    static bool parse_hex(std::string_view text, Guid& out);
};

// 16-bit subnet-local identifier; routing tables key on it.
struct Lid {
    std::uint16_t value = 0;

    constexpr Lid() = default;
    constexpr explicit Lid(std::uint16_t v) : value(v) {}

    constexpr auto operator<=>(const Lid&) const = default;
};

// Ordinal of a link in its topology (file order).
struct LinkId {
    std::uint32_t value = 0;

    constexpr LinkId() = default;
    constexpr explicit LinkId(std::uint32_t v) : value(v) {}

    constexpr auto operator<=>(const LinkId&) const = default;
};

using JobId = std::uint64_t;
using IntervalIndex = std::int64_t;

// Direction over a link: forward runs end_a -> end_b.
enum class Direction : std::uint8_t { AtoB = 0, BtoA = 1 };

constexpr Direction reverse(Direction d) {
    return d == Direction::AtoB ? Direction::BtoA : Direction::AtoB;
}

constexpr std::size_t index_of(Direction d) { return static_cast<std::size_t>(d); }

}  // namespace fabric_lens

template <>
struct std::hash<fabric_lens::Guid> {
    std::size_t operator()(const fabric_lens::Guid& g) const noexcept {
        return std::hash<std::uint64_t>{}(g.value);
    }
};

template <>
struct std::hash<fabric_lens::LinkId> {
    std::size_t operator()(const fabric_lens::LinkId& l) const noexcept {
        return std::hash<std::uint32_t>{}(l.value);
    }
};
