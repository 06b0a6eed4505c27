// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "fabric_lens/store/types.hpp"

namespace fabric_lens::store {

// On-disk payload kinds. Each frame is u32 length, u32 crc32, payload; the
// payload's first byte is the kind.
enum class FrameKind : std::uint8_t { Commit = 1, RulePut = 2, RuleDelete = 3 };

inline constexpr std::uint8_t kFormatVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 8;

std::string encode_commit(const IntervalCommit& commit);
// Throws std::runtime_error on a malformed payload.
IntervalCommit decode_commit(std::string_view payload);

std::string encode_rule_put(std::uint64_t id, const std::string& text);
std::string encode_rule_delete(std::uint64_t id);

struct RuleFrame {
    FrameKind kind = FrameKind::RulePut;
    std::uint64_t id = 0;
    std::string text;
};
RuleFrame decode_rule_frame(std::string_view payload);

std::uint32_t crc32_of(std::string_view bytes);

}  // namespace fabric_lens::store
