// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/server/pipeline.hpp"

#include <algorithm>
#include <iostream>
#include <limits>

#include "fabric_lens/correlate/analysis.hpp"
#include "fabric_lens/viz/vizmodel.hpp"

namespace fabric_lens::server {

namespace {

using fabric::PortRef;

std::uint64_t interval_ns(std::uint32_t ms) { return std::uint64_t{ms} * 1'000'000ull; }

bool regressed(const wire::CounterSample& now, const wire::CounterSample& before) {
    return now.xmit_bytes < before.xmit_bytes || now.rcv_bytes < before.rcv_bytes ||
           now.xmit_pkts < before.xmit_pkts || now.rcv_pkts < before.rcv_pkts ||
           now.unicast_xmit_bytes < before.unicast_xmit_bytes || now.unicast_rcv_bytes < before.unicast_rcv_bytes ||
           now.multicast_xmit_bytes < before.multicast_xmit_bytes ||
           now.multicast_rcv_bytes < before.multicast_rcv_bytes;
}

double total_utilization(const fabric::FabricTopology& topology, const correlate::LinkBreakdown& b,
                         double seconds) {
    return viz::utilization_fraction(b.dir[0].total, b.dir[1].total, topology.link(b.link).capacity_bps, seconds);
}

}  // namespace

Pipeline::Pipeline(const fabric::FabricTopology& topology, const fabric::RoutingTable& routing,
                   correlate::HostMaps maps, store::Store& store, notify::RuleBook& rules, PipelineOptions options)
    : topology_(topology),
      routing_(routing),
      maps_(std::move(maps)),
      store_(store),
      rules_(rules),
      options_(options),
      engine_(topology, routing),
      published_links_(topology.links().size(), 0.0) {
    for (const auto& job : store_.jobs()) {
        job_nodes_[job.id].insert(job.nodes.begin(), job.nodes.end());
    }
    stats_.last_committed = store_.last_interval();
}

IntervalIndex Pipeline::interval_of(std::uint64_t timestamp_ns) const {
    if (timestamp_ns < options_.epoch_ns) {
        return -1;
    }
    return static_cast<IntervalIndex>((timestamp_ns - options_.epoch_ns) / interval_ns(options_.interval_ms));
}

std::uint64_t Pipeline::interval_start_ns(IntervalIndex interval) const {
    return options_.epoch_ns + static_cast<std::uint64_t>(interval) * interval_ns(options_.interval_ms);
}

void Pipeline::ingest_datagram(std::span<const std::uint8_t> bytes) {
    auto result = wire::decode_record(bytes);
    if (!result) {
        std::lock_guard lock(ingest_mutex_);
        ++stats_.datagrams;
        ++stats_.decode_errors;
        return;
    }
    {
        std::lock_guard lock(ingest_mutex_);
        ++stats_.datagrams;
    }
    ingest(result.record());
}

void Pipeline::ingest(const wire::TelemetryRecord& record) {
    const auto k = interval_of(wire::timestamp_of(record));
    std::lock_guard lock(ingest_mutex_);
    ++stats_.records;
    if (k < 0 || (floor_ && k <= *floor_) || (watermark_ && k < *watermark_ - store::kGraceIntervals)) {
        ++stats_.late_drops;
        return;
    }
    auto& slot = slots_[k];
    std::visit(
        [&](const auto& r) {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, wire::MpiRecord>) {
                slot.batch.mpi.push_back(r);
            } else if constexpr (std::is_same_v<T, wire::IoRecord>) {
                slot.batch.io.push_back(r);
            } else if constexpr (std::is_same_v<T, wire::CounterSample>) {
                slot.batch.counters.push_back(r);
            } else {
                slot.batch.port_errors.push_back(r);
            }
        },
        record);
    slot.batch.interval = k;
    slot.dirty = true;
    raise_watermark(k);
}

void Pipeline::ingest_batch(const wire::TelemetryBatch& batch) {
    for (const auto& r : batch.counters) {
        ingest(r);
    }
    for (const auto& r : batch.port_errors) {
        ingest(r);
    }
    for (const auto& r : batch.mpi) {
        ingest(r);
    }
    for (const auto& r : batch.io) {
        ingest(r);
    }
}

void Pipeline::raise_watermark(IntervalIndex interval) {
    if (!watermark_ || interval > *watermark_) {
        watermark_ = interval;
        stats_.watermark = interval;
    }
}

void Pipeline::commit_ready() {
    std::optional<IntervalIndex> limit;
    {
        std::lock_guard lock(ingest_mutex_);
        limit = watermark_;
    }
    if (limit) {
        commit_below(*limit);
    }
}

void Pipeline::advance_clock(std::uint64_t now_ns) {
    const auto half = interval_ns(options_.interval_ms) / 2;
    if (now_ns < options_.epoch_ns + half) {
        return;
    }
    const auto w = interval_of(now_ns - half);
    {
        std::lock_guard lock(ingest_mutex_);
        raise_watermark(w);
    }
    commit_below(w);
}

void Pipeline::flush() { commit_below(std::numeric_limits<IntervalIndex>::max()); }

void Pipeline::prime(correlate::CounterBaseline baseline, std::map<PortRef, wire::PortErrorSample> errors,
                     IntervalIndex last_committed) {
    std::lock_guard commit_lock(commit_mutex_);
    evicted_after_ = std::move(baseline);
    evicted_errors_ = std::move(errors);
    std::lock_guard lock(ingest_mutex_);
    floor_ = last_committed;
    raise_watermark(last_committed);
    slots_.erase(slots_.begin(), slots_.upper_bound(last_committed));
}

void Pipeline::on_commit(std::function<void(const LiveUpdate&)> callback) {
    std::lock_guard lock(commit_mutex_);
    callbacks_.push_back(std::move(callback));
}

PipelineStats Pipeline::stats() const {
    std::lock_guard lock(ingest_mutex_);
    return stats_;
}

void Pipeline::commit_below(IntervalIndex limit) {
    std::lock_guard commit_lock(commit_mutex_);

    struct Work {
        IntervalIndex interval;
        Slot* slot;
        wire::TelemetryBatch batch;
    };
    std::vector<Work> work;
    const correlate::CounterBaseline* before = &evicted_after_;
    const std::map<PortRef, wire::PortErrorSample>* errors_before = &evicted_errors_;
    {
        std::lock_guard lock(ingest_mutex_);
        auto first_dirty = std::find_if(slots_.begin(), slots_.lower_bound(limit),
                                        [](const auto& kv) { return kv.second.dirty; });
        if (first_dirty == slots_.lower_bound(limit)) {
            return;
        }
        if (first_dirty != slots_.begin()) {
            const auto& prev = std::prev(first_dirty)->second;
            before = &prev.after;
            errors_before = &prev.errors_after;
        }
        // Everything after the first dirty interval is redone too: its
        // counter deltas depend on the state the earlier interval leaves.
        for (auto it = first_dirty; it != slots_.end() && it->first < limit; ++it) {
            it->second.dirty = false;
            work.push_back(Work{it->first, &it->second, it->second.batch});
        }
    }

    std::vector<LiveUpdate> updates;
    for (auto& w : work) {
        const bool recommit = w.slot->committed;
        updates.push_back(commit_slot(w.interval, *w.slot, w.batch, *before, *errors_before, recommit));
        before = &w.slot->after;
        errors_before = &w.slot->errors_after;
    }

    {
        std::lock_guard lock(ingest_mutex_);
        if (watermark_) {
            const auto keep_from = *watermark_ - store::kGraceIntervals;
            while (!slots_.empty() && slots_.begin()->first < keep_from && slots_.begin()->second.committed &&
                   !slots_.begin()->second.dirty) {
                evicted_after_ = std::move(slots_.begin()->second.after);
                evicted_errors_ = std::move(slots_.begin()->second.errors_after);
                slots_.erase(slots_.begin());
            }
        }
    }

    for (const auto& u : updates) {
        for (const auto& cb : callbacks_) {
            cb(u);
        }
    }
}

// Only the `after` fields and `committed` of the slot are touched here; the
// batch belongs to the ingest side, so a copy comes in.
LiveUpdate Pipeline::commit_slot(IntervalIndex interval, Slot& slot, const wire::TelemetryBatch& batch,
                                 const correlate::CounterBaseline& before,
                                 const std::map<PortRef, wire::PortErrorSample>& errors_before, bool recommit) {
    const double seconds = options_.interval_ms / 1000.0;

    correlate::CounterBaseline base = before;
    for (const auto& s : batch.counters) {
        const PortRef port{s.device, s.port};
        auto it = base.find(port);
        if (it == base.end()) {
            if (options_.prime_baseline) {
                base.emplace(port, s);
            }
        } else if (regressed(s, it->second)) {
            // Counter reset (agent or switch restart): restart from this sample.
            it->second = s;
        }
    }

    auto attribution = correlate::attribute(topology_, routing_, batch, maps_, base);
    slot.after = std::move(base);
    correlate::advance_baseline(slot.after, batch);
    slot.errors_after = errors_before;
    for (const auto& e : batch.port_errors) {
        auto& cur = slot.errors_after[PortRef{e.device, e.port}];
        if (e.timestamp_ns >= cur.timestamp_ns) {
            cur = e;
        }
    }

    std::set<JobId> jobs_here;
    for (const auto& r : batch.mpi) {
        job_nodes_[r.job_id].insert(r.src_guid);
        job_nodes_[r.job_id].insert(r.dst_guid);
        jobs_here.insert(r.job_id);
    }
    for (const auto& r : batch.io) {
        job_nodes_[r.job_id].insert(r.node_guid);
        jobs_here.insert(r.job_id);
    }

    store::IntervalCommit commit;
    commit.interval = interval;
    commit.interval_ms = options_.interval_ms;
    for (const auto& b : attribution.links) {
        if (!b.is_zero()) {
            commit.links.push_back(b);
        }
    }
    notify::IntervalData data;
    data.interval = interval;
    data.timestamp_ns = interval_start_ns(interval);
    data.interval_seconds = seconds;
    data.links = attribution.links;
    data.errors = slot.errors_after;
    auto add_device = [&](fabric::DeviceRef ref) {
        auto m = correlate::device_metrics(topology_, attribution.links, ref);
        if (!m.is_zero()) {
            const auto guid = topology_.guid_of(ref);
            commit.devices.push_back(store::DeviceRow{guid, m});
            data.devices.emplace(guid, m);
        }
    };
    for (std::uint32_t i = 0; i < topology_.switches().size(); ++i) {
        add_device({fabric::DeviceType::Switch, i});
    }
    for (std::uint32_t i = 0; i < topology_.hosts().size(); ++i) {
        add_device({fabric::DeviceType::Host, i});
    }
    for (const auto& [job, nodes] : job_nodes_) {
        data.job_nodes.emplace(job, std::vector<Guid>(nodes.begin(), nodes.end()));
    }
    const auto rules = rules_.snapshot();
    commit.events = engine_.evaluate(data, rules);
    for (auto id : jobs_here) {
        const auto& nodes = job_nodes_[id];
        commit.jobs.push_back(
            store::JobRecord{id, std::vector<Guid>(nodes.begin(), nodes.end()), interval, interval, options_.job_source});
    }
    commit.quarantine = attribution.quarantine;

    bool stored = true;
    try {
        store_.append(commit);
    } catch (const store::StoreError& e) {
        stored = false;
        std::cerr << "fabric-lens: interval " << interval << " not committed: " << e.what() << "\n";
    }
    slot.committed = true;

    LiveUpdate update;
    update.interval = interval;
    update.recommit = recommit;
    {
        std::lock_guard lock(ingest_mutex_);
        if (!stored) {
            ++stats_.commit_failures;
        } else {
            ++(recommit ? stats_.recommits : stats_.commits);
            stats_.quarantined += commit.quarantine.size();
            stats_.events += commit.events.size();
            if (!stats_.last_committed || interval > *stats_.last_committed) {
                stats_.last_committed = interval;
            }
        }
    }
    if (!stored) {
        return update;
    }
    for (const auto& b : attribution.links) {
        const double u = total_utilization(topology_, b, seconds);
        auto& prev = published_links_[b.link.value];
        if (u != prev) {
            update.changed_links.emplace_back(b.link, u);
            prev = u;
        }
    }
    for (auto it = published_devices_.begin(); it != published_devices_.end();) {
        if (!data.devices.count(it->first)) {
            update.changed_devices.push_back(it->first);
            it = published_devices_.erase(it);
        } else {
            ++it;
        }
    }
    for (const auto& [guid, m] : data.devices) {
        auto [it, fresh] = published_devices_.try_emplace(guid, m);
        if (fresh || it->second != m) {
            it->second = m;
            update.changed_devices.push_back(guid);
        }
    }
    std::sort(update.changed_devices.begin(), update.changed_devices.end());
    update.events = commit.events;
    return update;
}

}  // namespace fabric_lens::server
