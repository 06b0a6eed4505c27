// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fabric_lens {

// Helpers shared by the line-oriented file formats (topology, routes,
// hosts, arp, rules).

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            if (pos < text.size()) {
                fn(text.substr(pos));
            }
            break;
        }
        auto line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        fn(line);
        pos = end + 1;
    }
}

std::string_view strip_comment(std::string_view line);
std::vector<std::string_view> split_tokens(std::string_view line);

// Throws std::runtime_error when the file cannot be read.
std::string read_text_file(const std::string& path);

}  // namespace fabric_lens
