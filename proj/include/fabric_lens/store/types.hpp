// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fabric_lens/common/ids.hpp"
#include "fabric_lens/correlate/analysis.hpp"
#include "fabric_lens/correlate/attribution.hpp"

namespace fabric_lens::store {

enum class SubjectKind : std::uint8_t { Link, Device, Job };

struct Subject {
    SubjectKind kind = SubjectKind::Link;
    std::uint64_t id = 0;  // link id, device guid or job id

    auto operator<=>(const Subject&) const = default;
};

// "link:12", "device:0002c90300000001", "job:7".
std::string to_string(const Subject& subject);

struct Event {
    std::uint64_t id = 0;
    IntervalIndex interval = 0;
    std::uint64_t timestamp_ns = 0;
    std::uint64_t rule_id = 0;
    Subject subject;
    std::vector<double> values;
    std::vector<JobId> jobs;  // jobs seen on the subject, for filtering
    std::string detail;

    bool operator==(const Event&) const = default;
};

// Stable id of the one event a rule may raise for a subject in an interval.
std::uint64_t event_id(std::uint64_t rule_id, const Subject& subject, IntervalIndex interval);

enum class JobSource : std::uint8_t { Simulator, External };

struct JobRecord {
    JobId id = 0;
    std::vector<Guid> nodes;
    IntervalIndex first = 0;
    IntervalIndex last = 0;
    JobSource source = JobSource::External;

    bool operator==(const JobRecord&) const = default;
};

struct DeviceRow {
    Guid device;
    correlate::DeviceMetrics metrics;

    bool operator==(const DeviceRow&) const = default;
};

// Everything the pipeline produced for one interval.
struct IntervalCommit {
    IntervalIndex interval = 0;
    std::uint32_t interval_ms = 0;
    std::vector<correlate::LinkBreakdown> links;  // only nonzero rows are kept
    std::vector<DeviceRow> devices;               // only nonzero rows are kept
    std::vector<Event> events;
    std::vector<JobRecord> jobs;
    std::vector<correlate::QuarantineEntry> quarantine;

    bool operator==(const IntervalCommit&) const = default;
};

std::string_view to_string(JobSource source);

}  // namespace fabric_lens::store
