// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "fabric_lens/correlate/attribution.hpp"

namespace fabric_lens::correlate {

// Per-class byte totals of one device over one interval (or a sum of them).
// "sent" is traffic leaving the device over any of its links.
struct DeviceMetrics {
    std::uint64_t unicast_sent = 0;
    std::uint64_t unicast_recv = 0;
    std::uint64_t multicast_sent = 0;
    std::uint64_t multicast_recv = 0;
    std::uint64_t mpi_sent = 0;
    std::uint64_t mpi_recv = 0;
    std::uint64_t io_sent = 0;
    std::uint64_t io_recv = 0;
    std::uint64_t total_sent = 0;
    std::uint64_t total_recv = 0;

    DeviceMetrics& operator+=(const DeviceMetrics& other);
    bool is_zero() const { return *this == DeviceMetrics{}; }
    bool operator==(const DeviceMetrics&) const = default;
};

// Sums every attached link's outbound and inbound breakdown. A switch thus
// aggregates all its ports. `links` is indexed by link id.
DeviceMetrics device_metrics(const fabric::FabricTopology& topology, std::span<const LinkBreakdown> links,
                             fabric::DeviceRef device);

// Capacities of the links attached to `device`, bits/s.
std::vector<std::uint64_t> attached_capacities(const fabric::FabricTopology& topology, fabric::DeviceRef device);

enum class RadarMode : std::uint8_t { Absolute, Relative };

inline constexpr std::size_t kRadarAxes = 8;
// Fixed axis order, clockwise from 12 o'clock.
inline constexpr std::array<std::string_view, kRadarAxes> kRadarAxisNames = {
    "unicast_sent", "unicast_recv", "multicast_sent", "multicast_recv",
    "mpi_sent",     "mpi_recv",     "io_sent",        "io_recv"};

struct RadarVector {
    std::array<double, kRadarAxes> values{};
    RadarMode mode = RadarMode::Absolute;

    bool operator==(const RadarVector&) const = default;
};

// Absolute: bytes / (sum of attached capacity in bytes/s * seconds).
// Relative: sent axes / total_sent, recv axes / total_recv.
// Clamped to [0, 1]; a zero denominator yields 0.
RadarVector radar_values(const DeviceMetrics& metrics, std::span<const std::uint64_t> link_capacities_bps,
                         double interval_seconds, RadarMode mode);
// The same values before clamping.
std::array<double, kRadarAxes> radar_raw(const DeviceMetrics& metrics,
                                         std::span<const std::uint64_t> link_capacities_bps, double interval_seconds,
                                         RadarMode mode);

struct JobShare {
    JobId job = 0;
    std::uint64_t bytes = 0;  // largest single-direction bytes in one interval
    double fraction = 0.0;    // bytes over capacity bytes per interval

    bool operator==(const JobShare&) const = default;
};

struct SharedLinkReport {
    LinkId link;
    IntervalIndex first = 0;
    IntervalIndex last = 0;  // inclusive
    std::vector<JobShare> jobs;  // ascending job id
    double utilization = 0.0;    // peak over the range

    bool operator==(const SharedLinkReport&) const = default;
};

// Links where at least two jobs each moved at least min_fraction_per_job of
// the capacity in one direction. Consecutive intervals of one link with the
// same job set merge into one report. Ordered by (link, first interval).
std::vector<SharedLinkReport> shared_links(const fabric::FabricTopology& topology,
                                           std::span<const LinkBreakdown> breakdowns, double min_fraction_per_job,
                                           double interval_seconds);

// Hosts whose largest per-axis distance from the per-axis median exceeds
// delta. Needs at least three hosts of one mode.
std::vector<Guid> outlier_nodes(const std::map<Guid, RadarVector>& vectors, double delta);

}  // namespace fabric_lens::correlate
