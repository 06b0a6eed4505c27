// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/store/json.hpp"

namespace fabric_lens::store {

using nlohmann::json;

json to_json(const correlate::DirectionBreakdown& d) {
    json jobs = json::object();
    for (const auto& [id, bytes] : d.per_job) {
        jobs[std::to_string(id)] = {{"mpi_bytes", bytes.mpi}, {"io_bytes", bytes.io}};
    }
    return {{"total_bytes", d.total},         {"mpi_bytes", d.mpi},
            {"io_bytes", d.io},               {"unicast_bytes", d.unicast},
            {"multicast_bytes", d.multicast}, {"per_job", std::move(jobs)}};
}

json to_json(const correlate::LinkBreakdown& b) {
    return {{"link", b.link.value},
            {"interval", b.interval},
            {"a_to_b", to_json(b.dir[index_of(Direction::AtoB)])},
            {"b_to_a", to_json(b.dir[index_of(Direction::BtoA)])}};
}

json to_json(const correlate::DeviceMetrics& m) {
    return {{"unicast_sent", m.unicast_sent},     {"unicast_recv", m.unicast_recv},
            {"multicast_sent", m.multicast_sent}, {"multicast_recv", m.multicast_recv},
            {"mpi_sent", m.mpi_sent},             {"mpi_recv", m.mpi_recv},
            {"io_sent", m.io_sent},               {"io_recv", m.io_recv},
            {"total_sent", m.total_sent},         {"total_recv", m.total_recv}};
}

json to_json(const correlate::QuarantineEntry& q) {
    return {{"reason", correlate::to_string(q.reason)}, {"job", q.job}, {"bytes", q.bytes}, {"detail", q.detail}};
}

json to_json(const Event& e) {
    return {{"id", e.id},
            {"interval", e.interval},
            {"timestamp_ns", e.timestamp_ns},
            {"rule", e.rule_id},
            {"subject", to_string(e.subject)},
            {"values", e.values},
            {"jobs", e.jobs},
            {"detail", e.detail}};
}

json to_json(const JobRecord& j) {
    json nodes = json::array();
    for (auto g : j.nodes) {
        nodes.push_back(g.to_hex());
    }
    return {{"id", j.id},
            {"nodes", std::move(nodes)},
            {"first_interval", j.first},
            {"last_interval", j.last},
            {"source", to_string(j.source)}};
}

json to_json(const IntervalCommit& c) {
    json links = json::array();
    for (const auto& l : c.links) {
        links.push_back(to_json(l));
    }
    json devices = json::array();
    for (const auto& d : c.devices) {
        auto row = to_json(d.metrics);
        row["device"] = d.device.to_hex();
        devices.push_back(std::move(row));
    }
    json events = json::array();
    for (const auto& e : c.events) {
        events.push_back(to_json(e));
    }
    json jobs = json::array();
    for (const auto& j : c.jobs) {
        jobs.push_back(to_json(j));
    }
    json quarantine = json::array();
    for (const auto& q : c.quarantine) {
        quarantine.push_back(to_json(q));
    }
    return {{"interval", c.interval}, {"interval_ms", c.interval_ms}, {"links", std::move(links)},
            {"devices", std::move(devices)}, {"events", std::move(events)}, {"jobs", std::move(jobs)},
            {"quarantine", std::move(quarantine)}};
}

}  // namespace fabric_lens::store
