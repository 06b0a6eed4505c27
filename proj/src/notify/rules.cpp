// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/notify/rules.hpp"

#include <algorithm>
#include <cstdlib>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "fabric_lens/common/text.hpp"
#include "fabric_lens/viz/vizmodel.hpp"

namespace fabric_lens::notify {

namespace {

constexpr std::array<std::pair<Metric, std::string_view>, 8> kMetrics = {{
    {Metric::LinkDowned, "LinkDowned"},
    {Metric::XmtDiscards, "XmtDiscards"},
    {Metric::RcvErrors, "RcvErrors"},
    {Metric::VL15Dropped, "VL15Dropped"},
    {Metric::BytesSent, "BytesSent"},
    {Metric::BytesReceived, "BytesReceived"},
    {Metric::LinkUtilization, "LinkUtilization"},
    {Metric::MpiLustreCoexist, "MpiLustreCoexist"},
}};

constexpr std::array<std::pair<Comparator, std::string_view>, 3> kComparators = {{
    {Comparator::Exceeds, "exceeds"},
    {Comparator::DropsBelow, "drops_below"},
    {Comparator::Equals, "equals"},
}};

bool is_error_metric(Metric m) {
    return m == Metric::LinkDowned || m == Metric::XmtDiscards || m == Metric::RcvErrors || m == Metric::VL15Dropped;
}

[[noreturn]] void invalid(NotifyErrc code, const std::string& what) { throw NotifyError(code, what); }

template <typename T>
bool parse_number(std::string_view s, T& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

Scope parse_scope(std::string_view token) {
    Scope scope;
    if (token == "all") {
        return scope;
    }
    if (token.rfind("job:", 0) == 0) {
        scope.kind = Scope::Kind::Job;
        if (!parse_number(token.substr(4), scope.job)) {
            invalid(NotifyErrc::UnknownScope, "bad job scope '" + std::string(token) + "'");
        }
        return scope;
    }
    if (token.rfind("links:", 0) == 0) {
        scope.kind = Scope::Kind::Links;
        auto list = token.substr(6);
        while (!list.empty()) {
            auto comma = list.find(',');
            auto item = list.substr(0, comma);
            std::uint32_t id = 0;
            if (!parse_number(item, id)) {
                invalid(NotifyErrc::UnknownScope, "bad link id '" + std::string(item) + "'");
            }
            scope.links.insert(LinkId{id});
            if (comma == std::string_view::npos) {
                break;
            }
            list.remove_prefix(comma + 1);
        }
        if (scope.links.empty()) {
            invalid(NotifyErrc::UnknownScope, "empty link scope");
        }
        return scope;
    }
    invalid(NotifyErrc::UnknownScope, "unknown scope '" + std::string(token) + "'");
}

std::string percent(double f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", f * 100.0);
    return buf;
}

// Shortest form that parses back to the same double.
std::string number(double v) {
    char buf[32];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) {
            break;
        }
    }
    return buf;
}

}  // namespace

std::string_view to_string(Metric metric) {
    for (const auto& [m, name] : kMetrics) {
        if (m == metric) {
            return name;
        }
    }
    return "?";
}

std::string_view to_string(Comparator comparator) {
    for (const auto& [c, name] : kComparators) {
        if (c == comparator) {
            return name;
        }
    }
    return "?";
}

std::string to_string(const Scope& scope) {
    switch (scope.kind) {
        case Scope::Kind::All:
            return "all";
        case Scope::Kind::Job:
            return "job:" + std::to_string(scope.job);
        case Scope::Kind::Links: {
            std::string out = "links:";
            bool first = true;
            for (auto l : scope.links) {
                out += (first ? "" : ",") + std::to_string(l.value);
                first = false;
            }
            return out;
        }
    }
    return "?";
}

std::optional<Metric> parse_metric(std::string_view name) {
    for (const auto& [m, n] : kMetrics) {
        if (n == name) {
            return m;
        }
    }
    return std::nullopt;
}

std::optional<Comparator> parse_comparator(std::string_view name) {
    for (const auto& [c, n] : kComparators) {
        if (n == name) {
            return c;
        }
    }
    return std::nullopt;
}

void validate_rule(const Rule& rule, std::size_t link_count) {
    if (!std::isfinite(rule.threshold) || rule.threshold < 0.0) {
        invalid(NotifyErrc::InvalidThreshold, "threshold must be a finite number >= 0");
    }
    if (rule.period == 0) {
        invalid(NotifyErrc::InvalidRule, "period must be at least 1 interval");
    }
    if (rule.metric == Metric::MpiLustreCoexist && rule.comparator != Comparator::Exceeds) {
        invalid(NotifyErrc::InvalidRule, "MpiLustreCoexist only supports 'exceeds'");
    }
    if (rule.scope.kind == Scope::Kind::Links) {
        if (rule.scope.links.empty()) {
            invalid(NotifyErrc::UnknownScope, "empty link scope");
        }
        if (link_count != 0 && rule.scope.links.rbegin()->value >= link_count) {
            invalid(NotifyErrc::UnknownScope, "link " + std::to_string(rule.scope.links.rbegin()->value) +
                                                  " is not in the topology");
        }
    }
}

Rule parse_rule_line(std::string_view line) {
    auto tokens = split_tokens(strip_comment(line));
    if (tokens.size() < 5 || tokens.size() > 6 || tokens[0] != "rule") {
        invalid(NotifyErrc::InvalidRule, "expected 'rule <metric> <comparator> <threshold> <scope> [period]'");
    }
    Rule rule;
    auto metric = parse_metric(tokens[1]);
    if (!metric) {
        invalid(NotifyErrc::InvalidRule, "unknown metric '" + std::string(tokens[1]) + "'");
    }
    rule.metric = *metric;
    auto cmp = parse_comparator(tokens[2]);
    if (!cmp) {
        invalid(NotifyErrc::InvalidRule, "unknown comparator '" + std::string(tokens[2]) + "'");
    }
    rule.comparator = *cmp;
    try {
        std::size_t used = 0;
        rule.threshold = std::stod(std::string(tokens[3]), &used);
        if (used != tokens[3].size()) {
            throw std::invalid_argument("trailing");
        }
    } catch (const std::exception&) {
        invalid(NotifyErrc::InvalidThreshold, "bad threshold '" + std::string(tokens[3]) + "'");
    }
    rule.scope = parse_scope(tokens[4]);
    if (tokens.size() == 6 && !parse_number(tokens[5], rule.period)) {
        invalid(NotifyErrc::InvalidRule, "bad period '" + std::string(tokens[5]) + "'");
    }
    validate_rule(rule);
    return rule;
}

std::string format_rule(const Rule& rule) {
    std::string out = "rule " + std::string(to_string(rule.metric)) + " " + std::string(to_string(rule.comparator)) +
                      " " + number(rule.threshold) + " " + to_string(rule.scope);
    if (rule.period != 1) {
        out += " " + std::to_string(rule.period);
    }
    return out;
}

std::vector<Rule> parse_rules_file(std::string_view text) {
    std::vector<Rule> out;
    std::size_t line_no = 0;
    for_each_line(text, [&](std::string_view line) {
        ++line_no;
        if (split_tokens(strip_comment(line)).empty()) {
            return;
        }
        try {
            out.push_back(parse_rule_line(line));
        } catch (const NotifyError& e) {
            throw NotifyError(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
        }
        out.back().id = out.size();
    });
    return out;
}

bool compare(Comparator comparator, double value, double threshold, bool integral) {
    switch (comparator) {
        case Comparator::Exceeds:
            return value > threshold;
        case Comparator::DropsBelow:
            return value < threshold;
        case Comparator::Equals:
            return integral ? value == threshold : std::fabs(value - threshold) <= 1e-9;
    }
    return false;
}

RuleEngine::RuleEngine(const fabric::FabricTopology& topology, const fabric::RoutingTable& routing)
    : topology_(topology), routing_(routing) {}

const fabric::TopologyView* RuleEngine::job_view(JobId job, const IntervalData& data) {
    auto it = data.job_nodes.find(job);
    if (it == data.job_nodes.end() || it->second.empty()) {
        return nullptr;
    }
    auto cached = job_views_.find(job);
    if (cached == job_views_.end() || cached->second.first != it->second) {
        auto view = fabric::job_subgraph(topology_, routing_, it->second);
        cached = job_views_.insert_or_assign(job, std::make_pair(it->second, std::move(view))).first;
    }
    return &cached->second.second;
}

std::vector<LinkId> RuleEngine::scope_links(const Scope& scope, const IntervalData& data) {
    std::vector<LinkId> out;
    switch (scope.kind) {
        case Scope::Kind::All:
            for (const auto& l : topology_.links()) {
                out.push_back(l.id);
            }
            break;
        case Scope::Kind::Links:
            for (auto l : scope.links) {
                if (l.value < topology_.links().size()) {
                    out.push_back(l);
                }
            }
            break;
        case Scope::Kind::Job:
            if (const auto* view = job_view(scope.job, data)) {
                out = view->links;
                std::sort(out.begin(), out.end());
            }
            break;
    }
    return out;
}

std::vector<fabric::DeviceRef> RuleEngine::scope_devices(const Scope& scope, const IntervalData& data) {
    std::vector<fabric::DeviceRef> out;
    switch (scope.kind) {
        case Scope::Kind::All:
            for (std::uint32_t i = 0; i < topology_.switches().size(); ++i) {
                out.push_back({fabric::DeviceType::Switch, i});
            }
            for (std::uint32_t i = 0; i < topology_.hosts().size(); ++i) {
                out.push_back({fabric::DeviceType::Host, i});
            }
            break;
        case Scope::Kind::Links: {
            std::set<fabric::DeviceRef> ends;
            for (auto l : scope_links(scope, data)) {
                const auto& link = topology_.link(l);
                ends.insert(topology_.require(link.end_a.device));
                ends.insert(topology_.require(link.end_b.device));
            }
            out.assign(ends.begin(), ends.end());
            break;
        }
        case Scope::Kind::Job:
            if (const auto* view = job_view(scope.job, data)) {
                out = view->devices;
            }
            break;
    }
    return out;
}

std::string RuleEngine::link_label(LinkId id) const {
    const auto& l = topology_.link(id);
    return "link " + std::to_string(id.value) + " (" + topology_.name_of(topology_.require(l.end_a.device)) + ":" +
           std::to_string(l.end_a.port) + " - " + topology_.name_of(topology_.require(l.end_b.device)) + ":" +
           std::to_string(l.end_b.port) + ")";
}

std::vector<store::Event> RuleEngine::evaluate(const IntervalData& data, std::span<const Rule> rules) {
    std::vector<store::Event> out;
    std::set<std::pair<std::uint64_t, store::Subject>> fired;
    auto emit = [&](const Rule& rule, store::Subject subject, std::vector<double> values, std::vector<JobId> jobs,
                    std::string detail) {
        if (!fired.insert({rule.id, subject}).second) {
            return;
        }
        store::Event e;
        e.id = store::event_id(rule.id, subject, data.interval);
        e.interval = data.interval;
        e.timestamp_ns = data.timestamp_ns;
        e.rule_id = rule.id;
        e.subject = subject;
        e.values = std::move(values);
        e.jobs = std::move(jobs);
        e.detail = std::move(detail);
        out.push_back(std::move(e));
    };
    auto jobs_on = [&](LinkId link) {
        std::vector<JobId> jobs;
        if (link.value < data.links.size()) {
            for (const auto& [job, bytes] : data.links[link.value].job_totals()) {
                jobs.push_back(job);
            }
        }
        return jobs;
    };
    const auto rule_text = [](const Rule& r) {
        return std::string(to_string(r.metric)) + " " + std::string(to_string(r.comparator));
    };

    for (const auto& rule : rules) {
        if (rule.period > 1 && data.interval % rule.period != 0) {
            continue;
        }
        if (is_error_metric(rule.metric)) {
            for (auto link : scope_links(rule.scope, data)) {
                const auto& l = topology_.link(link);
                std::uint64_t value = 0;
                for (const auto& end : {l.end_a, l.end_b}) {
                    auto it = data.errors.find(end);
                    if (it == data.errors.end()) {
                        continue;
                    }
                    const auto& s = it->second;
                    const std::uint64_t v = rule.metric == Metric::LinkDowned    ? s.link_downed
                                            : rule.metric == Metric::XmtDiscards ? s.xmt_discards
                                            : rule.metric == Metric::RcvErrors   ? s.rcv_errors
                                                                                 : s.vl15_dropped;
                    value = std::max(value, v);
                }
                const auto v = static_cast<double>(value);
                if (compare(rule.comparator, v, rule.threshold, true)) {
                    emit(rule, {store::SubjectKind::Link, link.value}, {v}, jobs_on(link),
                         rule_text(rule) + " " + number(rule.threshold) + " on " + link_label(link) + ": " +
                             std::to_string(value));
                }
            }
        } else if (rule.metric == Metric::BytesSent || rule.metric == Metric::BytesReceived) {
            for (auto ref : scope_devices(rule.scope, data)) {
                const auto guid = topology_.guid_of(ref);
                std::uint64_t value = 0;
                if (auto it = data.devices.find(guid); it != data.devices.end()) {
                    value = rule.metric == Metric::BytesSent ? it->second.total_sent : it->second.total_recv;
                }
                const auto v = static_cast<double>(value);
                if (compare(rule.comparator, v, rule.threshold, true)) {
                    emit(rule, {store::SubjectKind::Device, guid.value}, {v}, {},
                         rule_text(rule) + " " + number(rule.threshold) + " on " + topology_.name_of(ref) + ": " +
                             std::to_string(value) + " bytes");
                }
            }
        } else {
            for (auto link : scope_links(rule.scope, data)) {
                if (link.value >= data.links.size()) {
                    continue;
                }
                const auto& b = data.links[link.value];
                const auto& l = topology_.link(link);
                const double cap = l.capacity_bytes(data.interval_seconds);
                if (rule.metric == Metric::LinkUtilization) {
                    const double u =
                        viz::utilization_fraction(b.dir[0].total, b.dir[1].total, l.capacity_bps, data.interval_seconds);
                    if (compare(rule.comparator, u, rule.threshold, false)) {
                        emit(rule, {store::SubjectKind::Link, link.value}, {u}, jobs_on(link),
                             rule_text(rule) + " " + percent(rule.threshold) + " on " + link_label(link) + ": " +
                                 percent(u));
                    }
                } else {
                    const double mpi =
                        static_cast<double>(std::max(b.dir[0].mpi, b.dir[1].mpi)) / cap;
                    const double io = static_cast<double>(std::max(b.dir[0].io, b.dir[1].io)) / cap;
                    if (mpi > rule.threshold && io > rule.threshold) {
                        emit(rule, {store::SubjectKind::Link, link.value}, {mpi, io}, jobs_on(link),
                             "MPI and Lustre traffic share " + link_label(link) + ": mpi " + percent(mpi) + ", io " +
                                 percent(io) + " of capacity (threshold " + percent(rule.threshold) + ")");
                    }
                }
            }
        }
    }
    return out;
}

std::vector<store::Event> evaluate_interval(const fabric::FabricTopology& topology,
                                            const fabric::RoutingTable& routing, const IntervalData& data,
                                            std::span<const Rule> rules) {
    RuleEngine engine(topology, routing);
    return engine.evaluate(data, rules);
}

RuleBook::RuleBook(std::size_t link_count, store::Store* persist) : link_count_(link_count), persist_(persist) {
    if (persist_ == nullptr) {
        return;
    }
    next_id_ = persist_->max_rule_id() + 1;
    for (const auto& [id, text] : persist_->rules()) {
        try {
            auto rule = parse_rule_line(text);
            rule.id = id;
            rules_[id] = rule;
        } catch (const NotifyError&) {
            // A rule text this build cannot read stays in the log untouched.
            continue;
        }
        next_id_ = std::max(next_id_, id + 1);
    }
}

std::uint64_t RuleBook::upsert(Rule rule) {
    validate_rule(rule, link_count_);
    std::lock_guard lock(mutex_);
    if (rule.id == 0) {
        rule.id = next_id_;
    }
    next_id_ = std::max(next_id_, rule.id + 1);
    if (persist_ != nullptr) {
        persist_->put_rule(rule.id, format_rule(rule));
    }
    rules_[rule.id] = rule;
    return rule.id;
}

void RuleBook::remove(std::uint64_t id) {
    std::lock_guard lock(mutex_);
    if (rules_.count(id) == 0) {
        throw NotifyError(NotifyErrc::UnknownRule, "rule " + std::to_string(id));
    }
    if (persist_ != nullptr) {
        persist_->delete_rule(id);
    }
    rules_.erase(id);
}

std::optional<Rule> RuleBook::find(std::uint64_t id) const {
    std::lock_guard lock(mutex_);
    if (auto it = rules_.find(id); it != rules_.end()) {
        return it->second;
    }
    return std::nullopt;
}

std::vector<Rule> RuleBook::snapshot() const {
    std::lock_guard lock(mutex_);
    std::vector<Rule> out;
    for (const auto& [id, r] : rules_) {
        out.push_back(r);
    }
    return out;
}

}  // namespace fabric_lens::notify
