// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fabric_lens/common/error.hpp"
#include "fabric_lens/correlate/analysis.hpp"
#include "fabric_lens/fabric/views.hpp"
#include "fabric_lens/store/store.hpp"
#include "fabric_lens/wire/records.hpp"

namespace fabric_lens::notify {

enum class NotifyErrc { InvalidThreshold, UnknownScope, InvalidRule, UnknownRule };
using NotifyError = CodedError<NotifyErrc>;

enum class Metric : std::uint8_t {
    LinkDowned,
    XmtDiscards,
    RcvErrors,
    VL15Dropped,
    BytesSent,
    BytesReceived,
    LinkUtilization,
    MpiLustreCoexist,
};

enum class Comparator : std::uint8_t { Exceeds, DropsBelow, Equals };

struct Scope {
    enum class Kind : std::uint8_t { All, Links, Job } kind = Kind::All;
    std::set<LinkId> links;
    JobId job = 0;

    bool operator==(const Scope&) const = default;
};

// Thresholds: fractions of capacity for LinkUtilization and
// MpiLustreCoexist, cumulative counts for the error counters, bytes per
// interval for BytesSent/BytesReceived.
struct Rule {
    std::uint64_t id = 0;
    Metric metric = Metric::LinkUtilization;
    Comparator comparator = Comparator::Exceeds;
    double threshold = 0.0;
    Scope scope;
    std::uint32_t period = 1;  // evaluate on intervals divisible by period

    bool operator==(const Rule&) const = default;
};

std::string_view to_string(Metric metric);
std::string_view to_string(Comparator comparator);
std::string to_string(const Scope& scope);
std::optional<Metric> parse_metric(std::string_view name);
std::optional<Comparator> parse_comparator(std::string_view name);

// Throws NotifyError(InvalidThreshold | UnknownScope | InvalidRule).
// `link_count` bounds link scopes; 0 skips that check.
void validate_rule(const Rule& rule, std::size_t link_count = 0);

// `rule <metric> <exceeds|drops_below|equals> <threshold> <scope> [period]`
// with scope `all`, `links:1,2,3` or `job:ID`.
Rule parse_rule_line(std::string_view line);
std::string format_rule(const Rule& rule);
// One rule per non-empty, non-comment line; ids are assigned 1, 2, ...
std::vector<Rule> parse_rules_file(std::string_view text);

// Everything the engine needs about one committed interval.
struct IntervalData {
    IntervalIndex interval = 0;
    std::uint64_t timestamp_ns = 0;
    double interval_seconds = 0.0;
    std::span<const correlate::LinkBreakdown> links;  // by link id
    std::map<Guid, correlate::DeviceMetrics> devices;
    // Latest cumulative error counters per port.
    std::map<fabric::PortRef, wire::PortErrorSample> errors;
    std::map<JobId, std::vector<Guid>> job_nodes;
};

bool compare(Comparator comparator, double value, double threshold, bool integral);

// Evaluates rules against committed intervals. At most one event per
// (rule, subject, interval).
class RuleEngine {
public:
    RuleEngine(const fabric::FabricTopology& topology, const fabric::RoutingTable& routing);

    std::vector<store::Event> evaluate(const IntervalData& data, std::span<const Rule> rules);

private:
    std::vector<LinkId> scope_links(const Scope& scope, const IntervalData& data);
    std::vector<fabric::DeviceRef> scope_devices(const Scope& scope, const IntervalData& data);
    const fabric::TopologyView* job_view(JobId job, const IntervalData& data);
    std::string link_label(LinkId link) const;

    const fabric::FabricTopology& topology_;
    const fabric::RoutingTable& routing_;
    std::map<JobId, std::pair<std::vector<Guid>, fabric::TopologyView>> job_views_;
};

std::vector<store::Event> evaluate_interval(const fabric::FabricTopology& topology,
                                            const fabric::RoutingTable& routing, const IntervalData& data,
                                            std::span<const Rule> rules);

// The live rule set. Thread safe. With a store attached, every change is
// persisted before it takes effect and the store's rules are loaded first.
class RuleBook {
public:
    explicit RuleBook(std::size_t link_count = 0, store::Store* persist = nullptr);

    // id 0 assigns the next free id. Returns the rule id.
    std::uint64_t upsert(Rule rule);
    // Throws NotifyError(UnknownRule).
    void remove(std::uint64_t id);
    std::optional<Rule> find(std::uint64_t id) const;
    std::vector<Rule> snapshot() const;

private:
    std::size_t link_count_;
    store::Store* persist_;
    mutable std::mutex mutex_;
    std::map<std::uint64_t, Rule> rules_;
    std::uint64_t next_id_ = 1;
};

}  // namespace fabric_lens::notify
