// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/common/ids.hpp"

#include <charconv>

namespace fabric_lens {

std::string Guid::to_hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(16, '0');
    auto v = value;
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
        v >>= 4;
    }
    return out;
}

bool Guid::parse_hex(std::string_view text, Guid& out) {
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        text.remove_prefix(2);
    }
    if (text.empty() || text.size() > 16) {
        return false;
    }
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v, 16);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        return false;
    }
    out = Guid{v};
    return true;
}

}  // namespace fabric_lens
