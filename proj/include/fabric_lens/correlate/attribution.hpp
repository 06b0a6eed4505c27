// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "fabric_lens/correlate/host_maps.hpp"
#include "fabric_lens/fabric/routing.hpp"
#include "fabric_lens/wire/batch.hpp"

namespace fabric_lens::correlate {

struct JobBytes {
    std::uint64_t mpi = 0;
    std::uint64_t io = 0;

    std::uint64_t total() const { return mpi + io; }
    bool operator==(const JobBytes&) const = default;
};

// Bytes that crossed a link in one direction during one interval. total,
// unicast and multicast come from port counters; mpi, io and per_job from
// agent records.
struct DirectionBreakdown {
    std::uint64_t total = 0;
    std::uint64_t mpi = 0;
    std::uint64_t io = 0;
    std::uint64_t unicast = 0;
    std::uint64_t multicast = 0;
    std::map<JobId, JobBytes> per_job;

    bool operator==(const DirectionBreakdown&) const = default;
};

struct LinkBreakdown {
    LinkId link;
    IntervalIndex interval = 0;
    std::array<DirectionBreakdown, 2> dir;  // indexed by index_of(Direction)

    // per_job summed over both directions.
    std::map<JobId, JobBytes> job_totals() const;
    bool is_zero() const;
    bool operator==(const LinkBreakdown&) const = default;
};

enum class QuarantineReason : std::uint8_t { UnresolvedHost, UnknownGuid, UnknownPort };

// A record the correlator could not place on the fabric.
struct QuarantineEntry {
    QuarantineReason reason = QuarantineReason::UnresolvedHost;
    JobId job = 0;
    std::uint64_t bytes = 0;
    std::string detail;

    bool operator==(const QuarantineEntry&) const = default;
};

struct Attribution {
    IntervalIndex interval = 0;
    std::vector<LinkBreakdown> links;  // one per topology link, by link id
    std::vector<QuarantineEntry> quarantine;
};

// Last counter sample seen per port. A port with no entry starts at zero.
using CounterBaseline = std::map<fabric::PortRef, wire::CounterSample>;

// Books every record of `batch` onto the links it crossed and takes
// per-direction totals from counter deltas against `before`. Records that
// cannot be placed go to the quarantine list instead of failing the interval.
// Throws CorrelateError(CounterRegression) when a counter moved backwards.
Attribution attribute(const fabric::FabricTopology& topology, const fabric::RoutingTable& routing,
                      const wire::TelemetryBatch& batch, const HostMaps& maps, const CounterBaseline& before = {});

// Same, but any quarantined record raises its error (UnresolvedHost or
// UnknownGuid) instead.
Attribution attribute_strict(const fabric::FabricTopology& topology, const fabric::RoutingTable& routing,
                             const wire::TelemetryBatch& batch, const HostMaps& maps,
                             const CounterBaseline& before = {});

// Folds the batch's counter samples into `baseline`.
void advance_baseline(CounterBaseline& baseline, const wire::TelemetryBatch& batch);

std::string_view to_string(QuarantineReason reason);

}  // namespace fabric_lens::correlate
