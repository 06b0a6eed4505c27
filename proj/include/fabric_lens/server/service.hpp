// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <json.hpp>

#include "fabric_lens/correlate/analysis.hpp"
#include "fabric_lens/fabric/routing.hpp"
#include "fabric_lens/notify/rules.hpp"
#include "fabric_lens/store/store.hpp"

namespace fabric_lens::server {

// A request the API refuses; `status` is the HTTP status to answer with.
class ApiError : public std::runtime_error {
public:
    ApiError(int status, const std::string& message) : std::runtime_error(message), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

// Query parameters of one request, already URL-decoded.
using Params = std::multimap<std::string, std::string>;

inline constexpr std::size_t kDefaultPageLimit = 1000;

// The read side of the HTTP API as plain functions returning JSON, so the
// payloads can be built and timed without a socket. Every method throws
// ApiError(400) for bad parameters and ApiError(404) for unknown ids.
// Results for committed intervals are deterministic.
class Service {
public:
    Service(const fabric::FabricTopology& topology, const fabric::RoutingTable& routing, store::Store& store,
            notify::RuleBook* rules = nullptr);

    // Extra fields merged into /api/stats (pipeline counters and the like).
    void set_stats_source(std::function<nlohmann::json()> source) { stats_source_ = std::move(source); }

    nlohmann::json topology(const Params& params) const;
    nlohmann::json utilization(const Params& params) const;
    nlohmann::json link_breakdown(std::uint32_t link, const Params& params) const;
    nlohmann::json shared_links(const Params& params) const;
    nlohmann::json radarpie(const std::string& guid, const Params& params) const;
    nlohmann::json radarpie_all(const Params& params) const;
    nlohmann::json jobs(const Params& params) const;
    nlohmann::json job(JobId id) const;
    nlohmann::json job_outliers(JobId id, const Params& params) const;
    nlohmann::json rules(const Params& params) const;
    // Body: {"text": "rule ..."} or {"metric", "comparator", "threshold",
    // "scope", "period", "id"}. Returns the stored rule.
    nlohmann::json put_rule(const std::string& body);
    void delete_rule(std::uint64_t id);
    nlohmann::json events(const Params& params) const;
    nlohmann::json replay(const Params& params) const;
    nlohmann::json quarantine(const Params& params) const;
    nlohmann::json fan(const Params& params) const;
    nlohmann::json stats() const;

    const fabric::FabricTopology& fabric() const { return topology_; }
    double interval_seconds() const { return store_.interval_ms() / 1000.0; }

private:
    struct Range {
        IntervalIndex from = 0;
        IntervalIndex to = -1;  // empty when to < from
        bool empty() const { return to < from; }
    };
    Range range_of(const Params& params, bool whole_history) const;
    nlohmann::json device_json(fabric::DeviceRef ref) const;
    std::map<Guid, correlate::DeviceMetrics> device_sums(const Range& range, std::size_t& committed) const;
    nlohmann::json radar_json(fabric::DeviceRef ref, const correlate::DeviceMetrics& metrics, double seconds,
                              correlate::RadarMode mode) const;

    const fabric::FabricTopology& topology_;
    const fabric::RoutingTable& routing_;
    store::Store& store_;
    notify::RuleBook* rules_;
    std::function<nlohmann::json()> stats_source_;
    // Layered positions in [0, 1]^2, roots on top, for layout hints and the
    // fan control points of parallel links.
    std::vector<std::pair<double, double>> positions_;  // by device slot
};

// Parses a decimal query parameter; throws ApiError(400).
std::optional<std::int64_t> int_param(const Params& params, const std::string& name);
std::optional<std::string> string_param(const Params& params, const std::string& name);

}  // namespace fabric_lens::server
