// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "fabric_lens/correlate/attribution.hpp"
#include "fabric_lens/notify/rules.hpp"
#include "fabric_lens/store/store.hpp"
#include "fabric_lens/wire/batch.hpp"
#include "fabric_lens/wire/codec.hpp"

namespace fabric_lens::server {

struct PipelineOptions {
    std::uint32_t interval_ms = 5000;
    std::uint64_t epoch_ns = 0;
    // Live agents start mid-stream: the first sample of a port only sets its
    // baseline. A simulator starts from zero and wants the whole first delta.
    bool prime_baseline = true;
    store::JobSource job_source = store::JobSource::External;
};

struct PipelineStats {
    std::uint64_t datagrams = 0;
    std::uint64_t records = 0;
    std::uint64_t decode_errors = 0;
    std::uint64_t late_drops = 0;
    std::uint64_t commits = 0;
    std::uint64_t recommits = 0;
    std::uint64_t commit_failures = 0;
    std::uint64_t quarantined = 0;
    std::uint64_t events = 0;
    std::optional<IntervalIndex> watermark;       // newest interval seen
    std::optional<IntervalIndex> last_committed;
};

// What one commit changed, for the live stream.
struct LiveUpdate {
    IntervalIndex interval = 0;
    bool recommit = false;
    std::vector<std::pair<LinkId, double>> changed_links;  // total utilization
    std::vector<Guid> changed_devices;
    std::vector<store::Event> events;
};

// Buckets decoded telemetry by interval and turns closed intervals into
// store commits. An interval closes once telemetry of a later one arrives
// (or the clock passes it). Records up to kGraceIntervals behind the newest
// interval are still merged and their interval is recommitted; older ones
// are dropped and counted.
//
// ingest* may run on any thread. Commits are serialized; readers of the
// store never see a half-written interval.
class Pipeline {
public:
    Pipeline(const fabric::FabricTopology& topology, const fabric::RoutingTable& routing, correlate::HostMaps maps,
             store::Store& store, notify::RuleBook& rules, PipelineOptions options);

    // Never throws; malformed frames only bump decode_errors.
    void ingest_datagram(std::span<const std::uint8_t> bytes);
    void ingest(const wire::TelemetryRecord& record);
    void ingest_batch(const wire::TelemetryBatch& batch);

    // Commits every dirty interval older than the newest one seen.
    void commit_ready();
    // Also closes intervals that ended before `now_ns` minus half an interval.
    void advance_clock(std::uint64_t now_ns);
    // Commits everything pending, the newest interval included.
    void flush();

    // Resume point after a restart: counter and error state as of the end of
    // `last_committed`, which must not be recommitted.
    void prime(correlate::CounterBaseline baseline, std::map<fabric::PortRef, wire::PortErrorSample> errors,
               IntervalIndex last_committed);

    void on_commit(std::function<void(const LiveUpdate&)> callback);

    IntervalIndex interval_of(std::uint64_t timestamp_ns) const;
    std::uint64_t interval_start_ns(IntervalIndex interval) const;
    PipelineStats stats() const;

private:
    struct Slot {
        wire::TelemetryBatch batch;
        bool dirty = false;
        bool committed = false;
        correlate::CounterBaseline after;
        std::map<fabric::PortRef, wire::PortErrorSample> errors_after;
    };

    void commit_below(IntervalIndex limit);
    LiveUpdate commit_slot(IntervalIndex interval, Slot& slot, const wire::TelemetryBatch& batch,
                           const correlate::CounterBaseline& before,
                           const std::map<fabric::PortRef, wire::PortErrorSample>& errors_before, bool recommit);
    void raise_watermark(IntervalIndex interval);

    const fabric::FabricTopology& topology_;
    const fabric::RoutingTable& routing_;
    correlate::HostMaps maps_;
    store::Store& store_;
    notify::RuleBook& rules_;
    PipelineOptions options_;
    notify::RuleEngine engine_;

    // Guards slots_, watermark_ and the ingest counters.
    mutable std::mutex ingest_mutex_;
    std::map<IntervalIndex, Slot> slots_;
    std::optional<IntervalIndex> watermark_;
    std::optional<IntervalIndex> floor_;  // nothing at or below this is accepted
    PipelineStats stats_;

    // Serializes commits; guards the state below.
    std::mutex commit_mutex_;
    correlate::CounterBaseline evicted_after_;
    std::map<fabric::PortRef, wire::PortErrorSample> evicted_errors_;
    std::map<JobId, std::set<Guid>> job_nodes_;
    std::vector<double> published_links_;
    std::map<Guid, correlate::DeviceMetrics> published_devices_;
    std::vector<std::function<void(const LiveUpdate&)>> callbacks_;
};

}  // namespace fabric_lens::server
