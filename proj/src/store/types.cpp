// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/store/types.hpp"

namespace fabric_lens::store {

std::string to_string(const Subject& subject) {
    switch (subject.kind) {
        case SubjectKind::Link:
            return "link:" + std::to_string(subject.id);
        case SubjectKind::Device:
            return "device:" + Guid{subject.id}.to_hex();
        case SubjectKind::Job:
            return "job:" + std::to_string(subject.id);
    }
    return "?";
}

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t event_id(std::uint64_t rule_id, const Subject& subject, IntervalIndex interval) {
    std::uint64_t h = mix(rule_id);
    h = mix(h ^ static_cast<std::uint64_t>(subject.kind));
    h = mix(h ^ subject.id);
    h = mix(h ^ static_cast<std::uint64_t>(interval));
    // Keep ids within the exact integer range of a double for JSON clients.
    return h & ((std::uint64_t{1} << 53) - 1);
}

std::string_view to_string(JobSource source) {
    return source == JobSource::Simulator ? "simulator" : "external";
}

}  // namespace fabric_lens::store
