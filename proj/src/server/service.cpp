// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/server/service.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "fabric_lens/correlate/host_maps.hpp"
#include "fabric_lens/fabric/views.hpp"
#include "fabric_lens/store/json.hpp"
#include "fabric_lens/viz/vizmodel.hpp"

namespace fabric_lens::server {

using nlohmann::json;
using fabric::DeviceRef;
using fabric::DeviceType;

namespace {

constexpr IntervalIndex kMaxSpan = 1'000'000;

[[noreturn]] void bad_request(const std::string& what) { throw ApiError(400, what); }
[[noreturn]] void not_found(const std::string& what) { throw ApiError(404, what); }

std::optional<double> double_param(const Params& params, const std::string& name) {
    auto text = string_param(params, name);
    if (!text) {
        return std::nullopt;
    }
    try {
        std::size_t used = 0;
        double v = std::stod(*text, &used);
        if (used != text->size() || !std::isfinite(v)) {
            bad_request("parameter '" + name + "' is not a number");
        }
        return v;
    } catch (const std::logic_error&) {
        bad_request("parameter '" + name + "' is not a number");
    }
}

bool flag_param(const Params& params, const std::string& name) {
    auto v = string_param(params, name);
    if (!v) {
        return false;
    }
    if (*v == "true" || *v == "1" || v->empty()) {
        return true;
    }
    if (*v == "false" || *v == "0") {
        return false;
    }
    bad_request("parameter '" + name + "' must be true or false");
}

// Applies limit/offset to `items` and wraps them under `key`.
json page(json items, const Params& params, const char* key) {
    const auto limit = int_param(params, "limit").value_or(static_cast<std::int64_t>(kDefaultPageLimit));
    const auto offset = int_param(params, "offset").value_or(0);
    if (limit <= 0 || offset < 0) {
        bad_request("limit must be positive and offset non-negative");
    }
    const auto total = static_cast<std::int64_t>(items.size());
    json slice = json::array();
    for (auto i = offset; i < total && i < offset + limit; ++i) {
        slice.push_back(std::move(items[static_cast<std::size_t>(i)]));
    }
    return json{{"total", total}, {"offset", offset}, {"limit", limit}, {key, std::move(slice)}};
}

std::uint64_t metric_bytes(const correlate::DirectionBreakdown& d, const std::string& metric) {
    if (metric == "mpi") {
        return d.mpi;
    }
    if (metric == "io") {
        return d.io;
    }
    if (metric == "unicast") {
        return d.unicast;
    }
    if (metric == "multicast") {
        return d.multicast;
    }
    return d.total;
}

std::string metric_param(const Params& params) {
    auto m = string_param(params, "metric").value_or("total");
    if (m != "total" && m != "mpi" && m != "io" && m != "unicast" && m != "multicast") {
        bad_request("unknown metric '" + m + "'");
    }
    return m;
}

correlate::RadarMode mode_param(const Params& params, correlate::RadarMode fallback) {
    auto m = string_param(params, "mode");
    if (!m) {
        return fallback;
    }
    if (*m == "absolute") {
        return correlate::RadarMode::Absolute;
    }
    if (*m == "relative") {
        return correlate::RadarMode::Relative;
    }
    bad_request("mode must be absolute or relative");
}

json band_json(double fraction) {
    const auto& band = viz::color_band(fraction);
    return json{{"band", band.name}, {"color", band.color}};
}

Guid guid_param(const std::string& text) {
    Guid guid;
    if (!Guid::parse_hex(text, guid)) {
        bad_request("bad GUID '" + text + "'");
    }
    return guid;
}

store::Subject parse_subject(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        bad_request("subject must look like link:N, device:GUID or job:N");
    }
    const auto kind = text.substr(0, colon);
    const auto value = text.substr(colon + 1);
    store::Subject s;
    if (kind == "device") {
        s.kind = store::SubjectKind::Device;
        s.id = guid_param(value).value;
        return s;
    }
    s.kind = kind == "link" ? store::SubjectKind::Link : store::SubjectKind::Job;
    if (kind != "link" && kind != "job") {
        bad_request("unknown subject kind '" + kind + "'");
    }
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), s.id);
    if (ec != std::errc() || p != value.data() + value.size()) {
        bad_request("bad subject id '" + value + "'");
    }
    return s;
}

json rule_json(const notify::Rule& r) {
    return json{{"id", r.id},
                {"metric", notify::to_string(r.metric)},
                {"comparator", notify::to_string(r.comparator)},
                {"threshold", r.threshold},
                {"scope", notify::to_string(r.scope)},
                {"period", r.period},
                {"text", notify::format_rule(r)}};
}

// Store lookups report unknown ids and bad ranges with their own codes.
template <typename Fn>
auto store_call(Fn&& fn) {
    try {
        return fn();
    } catch (const store::StoreError& e) {
        switch (e.code()) {
            case store::StoreErrc::UnknownLink:
            case store::StoreErrc::UnknownJob:
            case store::StoreErrc::UnknownGuid:
                not_found(e.what());
            case store::StoreErrc::InvalidRange:
                bad_request(e.what());
            default:
                throw ApiError(500, e.what());
        }
    }
}

std::size_t slot_of(const fabric::FabricTopology& t, DeviceRef ref) {
    return ref.type == DeviceType::Switch ? ref.index : t.switches().size() + ref.index;
}

}  // namespace

std::optional<std::string> string_param(const Params& params, const std::string& name) {
    auto it = params.find(name);
    if (it == params.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<std::int64_t> int_param(const Params& params, const std::string& name) {
    auto text = string_param(params, name);
    if (!text) {
        return std::nullopt;
    }
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(text->data(), text->data() + text->size(), v);
    if (ec != std::errc() || p != text->data() + text->size()) {
        bad_request("parameter '" + name + "' is not an integer");
    }
    return v;
}

Service::Service(const fabric::FabricTopology& topology, const fabric::RoutingTable& routing, store::Store& store,
                 notify::RuleBook* rules)
    : topology_(topology), routing_(routing), store_(store), rules_(rules) {
    positions_.resize(topology.device_count());
    std::vector<DeviceRef> roots, edges, hosts;
    for (std::uint32_t i = 0; i < topology.switches().size(); ++i) {
        (topology.switches()[i].kind == fabric::SwitchKind::Root ? roots : edges).push_back({DeviceType::Switch, i});
    }
    for (std::uint32_t i = 0; i < topology.hosts().size(); ++i) {
        hosts.push_back({DeviceType::Host, i});
    }
    // Hosts sit under their edge switch, in LID order.
    std::vector<std::pair<std::uint32_t, std::uint16_t>> rank(topology.hosts().size());
    for (auto h : hosts) {
        rank[h.index] = {topology.edge_of(h).index, topology.lid_of(h).value};
    }
    std::sort(hosts.begin(), hosts.end(), [&](DeviceRef a, DeviceRef b) { return rank[a.index] < rank[b.index]; });
    auto place = [&](const std::vector<DeviceRef>& row, double y) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            positions_[slot_of(topology, row[i])] = {(static_cast<double>(i) + 0.5) / static_cast<double>(row.size()), y};
        }
    };
    place(roots, 0.1);
    place(edges, 0.5);
    place(hosts, 0.9);
}

Service::Range Service::range_of(const Params& params, bool whole_history) const {
    const auto from = int_param(params, "from");
    const auto to = int_param(params, "to");
    const auto st = store_.stats();
    Range r;
    if (!from && !to) {
        if (!st.last_interval) {
            return r;
        }
        r.to = *st.last_interval;
        r.from = whole_history ? *st.first_interval : r.to;
        return r;
    }
    if (from && to) {
        r.from = *from;
        r.to = *to;
    } else if (from) {
        r.from = *from;
        r.to = std::max(*from, st.last_interval.value_or(*from));
    } else {
        r.to = *to;
        r.from = whole_history && st.first_interval ? std::min(*st.first_interval, *to) : *to;
    }
    if (r.from < 0 || r.to < r.from) {
        bad_request("need 0 <= from <= to");
    }
    if (r.to - r.from >= kMaxSpan) {
        bad_request("range spans more than " + std::to_string(kMaxSpan) + " intervals");
    }
    return r;
}

json Service::device_json(DeviceRef ref) const {
    const auto [x, y] = positions_[slot_of(topology_, ref)];
    json j{{"guid", topology_.guid_of(ref).to_hex()},
           {"lid", topology_.lid_of(ref).value},
           {"name", topology_.name_of(ref)},
           {"x", x},
           {"y", y}};
    if (ref.type == DeviceType::Switch) {
        j["type"] = "switch";
        j["role"] = fabric::to_string(topology_.switch_at(ref).kind);
    } else {
        const auto& h = topology_.host_at(ref);
        j["type"] = "host";
        j["role"] = fabric::to_string(h.kind);
        j["ip"] = h.ip.to_string();
    }
    return j;
}

json Service::topology(const Params& params) const {
    fabric::TopologyView view;
    std::optional<JobId> job;
    if (auto id = int_param(params, "job")) {
        if (*id < 0) {
            bad_request("bad job id");
        }
        job = static_cast<JobId>(*id);
        auto rec = store_.job(*job);
        if (!rec) {
            not_found("unknown job " + std::to_string(*job));
        }
        try {
            view = fabric::job_subgraph(topology_, routing_, rec->nodes);
        } catch (const fabric::FabricError& e) {
            throw ApiError(409, std::string("job does not map onto the fabric: ") + e.what());
        }
    } else {
        view = fabric::full_view(topology_);
    }
    const bool clustered = flag_param(params, "clustered");
    if (clustered) {
        view = fabric::cluster_compute_hosts(topology_, view);
    }

    // Drawing node of every device: itself, or its host group.
    std::map<DeviceRef, std::string> node_of;
    std::map<std::string, std::pair<double, double>> node_pos;
    json devices = json::array();
    for (auto ref : view.devices) {
        auto d = device_json(ref);
        node_of[ref] = d["guid"];
        node_pos[d["guid"]] = positions_[slot_of(topology_, ref)];
        devices.push_back(std::move(d));
    }
    json groups = json::array();
    for (const auto& g : view.groups) {
        const auto id = "group:" + topology_.guid_of(g.edge_switch).to_hex();
        json members = json::array();
        double x = 0.0;
        for (auto m : g.members) {
            members.push_back(topology_.guid_of(m).to_hex());
            node_of[m] = id;
            x += positions_[slot_of(topology_, m)].first;
        }
        x /= static_cast<double>(std::max<std::size_t>(1, g.members.size()));
        node_pos[id] = {x, 0.9};
        groups.push_back(json{{"id", id},
                              {"edge", topology_.guid_of(g.edge_switch).to_hex()},
                              {"members", std::move(members)},
                              {"x", x},
                              {"y", 0.9}});
    }

    // Parallel links between the same two drawing nodes form a bundle.
    std::map<std::pair<std::string, std::string>, std::vector<LinkId>> bundles;
    std::map<std::uint32_t, std::pair<std::string, std::string>> ends;
    for (auto id : view.links) {
        const auto& l = topology_.link(id);
        const auto a = node_of.at(topology_.near_end(id, Direction::AtoB));
        const auto b = node_of.at(topology_.far_end(id, Direction::AtoB));
        ends[id.value] = {a, b};
        bundles[std::minmax(a, b)].push_back(l.id);
    }
    json links = json::array();
    json bundle_list = json::array();
    std::map<std::uint32_t, std::pair<std::size_t, json>> placement;
    for (auto& [key, members] : bundles) {
        std::sort(members.begin(), members.end());
        const auto& first = ends.at(members.front().value);
        const auto pa = node_pos.at(first.first);
        const auto pb = node_pos.at(first.second);
        json ids = json::array();
        for (std::size_t k = 0; k < members.size(); ++k) {
            ids.push_back(members[k].value);
            json cp = nullptr;
            if (members.size() > 1) {
                auto p = viz::fan_control_point({pa.first, pa.second}, {pb.first, pb.second},
                                                static_cast<std::uint32_t>(members.size()),
                                                static_cast<std::uint32_t>(k + 1));
                cp = json{{"x", p.x}, {"y", p.y}};
            }
            placement[members[k].value] = {bundle_list.size(), std::move(cp)};
        }
        bundle_list.push_back(json{{"a", first.first}, {"b", first.second}, {"links", std::move(ids)}});
    }
    for (auto id : view.links) {
        const auto& l = topology_.link(id);
        const auto& [a, b] = ends.at(id.value);
        auto& [bundle, cp] = placement.at(id.value);
        links.push_back(json{{"id", id.value},
                             {"a", {{"guid", l.end_a.device.to_hex()}, {"port", l.end_a.port}, {"node", a}}},
                             {"b", {{"guid", l.end_b.device.to_hex()}, {"port", l.end_b.port}, {"node", b}}},
                             {"capacity_bps", l.capacity_bps},
                             {"bundle", bundle},
                             {"control_point", cp}});
    }

    json axes = json::array();
    const auto angles = viz::radar_axis_angles(correlate::kRadarAxes);
    for (std::size_t i = 0; i < correlate::kRadarAxes; ++i) {
        axes.push_back(json{{"name", correlate::kRadarAxisNames[i]}, {"angle", angles[i]}});
    }
    json bands = json::array();
    for (const auto& b : viz::color_bands()) {
        bands.push_back(json{{"band", b.name},
                             {"color", b.color},
                             {"lower", b.lower},
                             {"upper", std::isinf(b.upper) ? json(nullptr) : json(b.upper)}});
    }
    json out{{"interval_ms", store_.interval_ms()},
             {"clustered", clustered},
             {"devices", std::move(devices)},
             {"groups", std::move(groups)},
             {"links", std::move(links)},
             {"bundles", std::move(bundle_list)},
             {"radar_axes", std::move(axes)},
             {"bands", std::move(bands)}};
    if (job) {
        out["job"] = *job;
    }
    return out;
}

json Service::utilization(const Params& params) const {
    const auto metric = metric_param(params);
    const auto range = range_of(params, false);
    const auto n = topology_.links().size();
    std::vector<std::array<std::uint64_t, 2>> bytes(n, {0, 0});
    std::size_t committed = 0;
    json gaps = json::array();
    if (!range.empty()) {
        auto series = store_call([&] { return store_.query_links(range.from, range.to); });
        for (const auto& row : series.rows) {
            for (std::size_t d = 0; d < 2; ++d) {
                bytes[row.link.value][d] += metric_bytes(row.dir[d], metric);
            }
        }
        committed = static_cast<std::size_t>(range.to - range.from + 1) - series.gaps.size();
        gaps = series.gaps;
    }
    const double seconds = interval_seconds() * static_cast<double>(committed);
    json links = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& l = topology_.links()[i];
        const double f = seconds > 0 ? viz::utilization_fraction(bytes[i][0], bytes[i][1], l.capacity_bps, seconds)
                                     : 0.0;
        auto j = band_json(f);
        j["id"] = i;
        j["fraction"] = f;
        j["a_to_b"] = bytes[i][0];
        j["b_to_a"] = bytes[i][1];
        links.push_back(std::move(j));
    }
    // Design 1 draws parallel links once, colored by their aggregate.
    std::map<std::pair<Guid, Guid>, std::vector<std::uint32_t>> pairs;
    for (const auto& l : topology_.links()) {
        pairs[std::minmax(l.end_a.device, l.end_b.device)].push_back(l.id.value);
    }
    json bundles = json::array();
    for (const auto& [key, ids] : pairs) {
        if (ids.size() < 2) {
            continue;
        }
        std::vector<viz::LinkLoad> loads;
        for (auto id : ids) {
            loads.push_back({bytes[id][0], bytes[id][1], topology_.links()[id].capacity_bps});
        }
        const double f = seconds > 0 ? viz::aggregate_utilization(loads, seconds) : 0.0;
        auto j = band_json(f);
        j["a"] = key.first.to_hex();
        j["b"] = key.second.to_hex();
        j["links"] = ids;
        j["fraction"] = f;
        bundles.push_back(std::move(j));
    }
    auto out = page(std::move(links), params, "links");
    out["metric"] = metric;
    out["from"] = range.empty() ? json(nullptr) : json(range.from);
    out["to"] = range.empty() ? json(nullptr) : json(range.to);
    out["intervals"] = committed;
    out["gaps"] = std::move(gaps);
    out["bundles"] = std::move(bundles);
    return out;
}

json Service::link_breakdown(std::uint32_t link, const Params& params) const {
    if (link >= topology_.links().size()) {
        not_found("unknown link " + std::to_string(link));
    }
    const auto by = string_param(params, "by");
    if (by && *by != "job") {
        bad_request("by must be 'job'");
    }
    const auto range = range_of(params, true);
    const auto& l = topology_.links()[link];
    const double seconds = interval_seconds();
    json intervals = json::array();
    json gaps = json::array();
    struct JobSum {
        correlate::JobBytes dir[2];
        double peak = 0.0;
    };
    std::map<JobId, JobSum> jobs;
    std::uint64_t all_jobs = 0;
    if (!range.empty()) {
        auto series = store_call([&] {
            store::LinkFilter f;
            f.links.insert(LinkId{link});
            return store_.query_links(range.from, range.to, f);
        });
        gaps = series.gaps;
        for (const auto& row : series.rows) {
            intervals.push_back(json{
                {"interval", row.interval},
                {"a_to_b", store::to_json(row.dir[0])},
                {"b_to_a", store::to_json(row.dir[1])},
                {"fraction", viz::utilization_fraction(row.dir[0].total, row.dir[1].total, l.capacity_bps, seconds)}});
            for (std::size_t d = 0; d < 2; ++d) {
                for (const auto& [job, b] : row.dir[d].per_job) {
                    auto& s = jobs[job];
                    s.dir[d].mpi += b.mpi;
                    s.dir[d].io += b.io;
                    all_jobs += b.total();
                    s.peak = std::max(s.peak, static_cast<double>(b.total()) / l.capacity_bytes(seconds));
                }
            }
        }
    }
    auto out = page(std::move(intervals), params, "intervals");
    out["link"] = link;
    out["a"] = json{{"guid", l.end_a.device.to_hex()}, {"port", l.end_a.port}};
    out["b"] = json{{"guid", l.end_b.device.to_hex()}, {"port", l.end_b.port}};
    out["capacity_bps"] = l.capacity_bps;
    out["from"] = range.empty() ? json(nullptr) : json(range.from);
    out["to"] = range.empty() ? json(nullptr) : json(range.to);
    out["gaps"] = std::move(gaps);
    if (by) {
        json list = json::array();
        for (const auto& [job, s] : jobs) {
            const auto total = s.dir[0].total() + s.dir[1].total();
            list.push_back(json{
                {"job", job},
                {"a_to_b", {{"mpi", s.dir[0].mpi}, {"io", s.dir[0].io}}},
                {"b_to_a", {{"mpi", s.dir[1].mpi}, {"io", s.dir[1].io}}},
                {"bytes", total},
                {"share", all_jobs ? static_cast<double>(total) / static_cast<double>(all_jobs) : 0.0},
                {"peak_fraction", s.peak}});
        }
        out["jobs"] = std::move(list);
    }
    return out;
}

json Service::shared_links(const Params& params) const {
    const auto min_fraction = double_param(params, "min_fraction").value_or(0.1);
    if (min_fraction < 0.0 || min_fraction > 1.0) {
        bad_request("min_fraction must lie in [0, 1]");
    }
    const auto range = range_of(params, true);
    json list = json::array();
    if (!range.empty()) {
        auto series = store_call([&] { return store_.query_links(range.from, range.to); });
        for (const auto& r : correlate::shared_links(topology_, series.rows, min_fraction, interval_seconds())) {
            json jobs = json::array();
            for (const auto& s : r.jobs) {
                jobs.push_back(json{{"job", s.job}, {"bytes", s.bytes}, {"fraction", s.fraction}});
            }
            list.push_back(json{{"link", r.link.value},
                                {"first", r.first},
                                {"last", r.last},
                                {"utilization", r.utilization},
                                {"jobs", std::move(jobs)}});
        }
    }
    auto out = page(std::move(list), params, "links");
    out["min_fraction"] = min_fraction;
    return out;
}

json Service::radar_json(DeviceRef ref, const correlate::DeviceMetrics& m, double seconds,
                         correlate::RadarMode mode) const {
    const auto caps = correlate::attached_capacities(topology_, ref);
    const auto radar = correlate::radar_values(m, caps, seconds, mode);
    const std::array<std::uint64_t, correlate::kRadarAxes> raw = {
        m.unicast_sent, m.unicast_recv, m.multicast_sent, m.multicast_recv,
        m.mpi_sent,     m.mpi_recv,     m.io_sent,        m.io_recv};
    const auto angles = viz::radar_axis_angles(correlate::kRadarAxes);
    json axes = json::array();
    for (std::size_t i = 0; i < correlate::kRadarAxes; ++i) {
        axes.push_back(json{{"name", correlate::kRadarAxisNames[i]},
                            {"angle", angles[i]},
                            {"value", radar.values[i]},
                            {"bytes", raw[i]}});
    }
    return json{{"device", device_json(ref)},
                {"mode", mode == correlate::RadarMode::Absolute ? "absolute" : "relative"},
                {"values", radar.values},
                {"axes", std::move(axes)},
                {"total_sent", m.total_sent},
                {"total_recv", m.total_recv}};
}

json Service::radarpie(const std::string& guid_text, const Params& params) const {
    const auto guid = guid_param(guid_text);
    const auto ref = topology_.find(guid);
    if (!ref) {
        not_found("unknown device " + guid_text);
    }
    const auto mode = mode_param(params, correlate::RadarMode::Absolute);
    const auto range = range_of(params, false);
    correlate::DeviceMetrics sum;
    std::size_t committed = 0;
    if (!range.empty()) {
        for (const auto& s : store_call([&] { return store_.query_device(range.from, range.to, guid); })) {
            sum += s.metrics;
        }
        committed = store_.committed_intervals(range.from, range.to).size();
    }
    auto out = radar_json(*ref, sum, interval_seconds() * static_cast<double>(committed), mode);
    out["from"] = range.empty() ? json(nullptr) : json(range.from);
    out["to"] = range.empty() ? json(nullptr) : json(range.to);
    out["intervals"] = committed;
    return out;
}

std::map<Guid, correlate::DeviceMetrics> Service::device_sums(const Range& range, std::size_t& committed) const {
    std::map<Guid, correlate::DeviceMetrics> sums;
    committed = 0;
    if (range.empty()) {
        return sums;
    }
    for (auto k : store_call([&] { return store_.committed_intervals(range.from, range.to); })) {
        auto commit = store_.read_interval(k);
        if (!commit) {
            continue;
        }
        ++committed;
        for (const auto& row : commit->devices) {
            sums[row.device] += row.metrics;
        }
    }
    return sums;
}

json Service::radarpie_all(const Params& params) const {
    const auto mode = mode_param(params, correlate::RadarMode::Absolute);
    const auto type = string_param(params, "type").value_or("all");
    if (type != "all" && type != "switch" && type != "host") {
        bad_request("type must be all, switch or host");
    }
    const auto range = range_of(params, false);
    std::size_t committed = 0;
    const auto sums = device_sums(range, committed);
    const double seconds = interval_seconds() * static_cast<double>(committed);
    json list = json::array();
    auto emit = [&](DeviceRef ref) {
        auto it = sums.find(topology_.guid_of(ref));
        list.push_back(radar_json(ref, it == sums.end() ? correlate::DeviceMetrics{} : it->second, seconds, mode));
    };
    if (type != "host") {
        for (std::uint32_t i = 0; i < topology_.switches().size(); ++i) {
            emit({DeviceType::Switch, i});
        }
    }
    if (type != "switch") {
        for (std::uint32_t i = 0; i < topology_.hosts().size(); ++i) {
            emit({DeviceType::Host, i});
        }
    }
    auto out = page(std::move(list), params, "devices");
    out["mode"] = mode == correlate::RadarMode::Absolute ? "absolute" : "relative";
    out["from"] = range.empty() ? json(nullptr) : json(range.from);
    out["to"] = range.empty() ? json(nullptr) : json(range.to);
    out["intervals"] = committed;
    return out;
}

json Service::jobs(const Params& params) const {
    json list = json::array();
    for (const auto& j : store_.jobs()) {
        list.push_back(store::to_json(j));
    }
    return page(std::move(list), params, "jobs");
}

json Service::job(JobId id) const {
    auto rec = store_.job(id);
    if (!rec) {
        not_found("unknown job " + std::to_string(id));
    }
    auto out = store::to_json(*rec);
    try {
        const auto view = fabric::job_subgraph(topology_, routing_, rec->nodes);
        json devices = json::array();
        for (auto ref : view.devices) {
            devices.push_back(topology_.guid_of(ref).to_hex());
        }
        json links = json::array();
        for (auto l : view.links) {
            links.push_back(l.value);
        }
        out["subgraph"] = json{{"devices", std::move(devices)}, {"links", std::move(links)}};
    } catch (const fabric::FabricError&) {
        out["subgraph"] = nullptr;
    }
    return out;
}

json Service::job_outliers(JobId id, const Params& params) const {
    auto rec = store_.job(id);
    if (!rec) {
        not_found("unknown job " + std::to_string(id));
    }
    const auto delta = double_param(params, "delta").value_or(0.3);
    if (delta < 0.0) {
        bad_request("delta must be non-negative");
    }
    const auto mode = mode_param(params, correlate::RadarMode::Relative);
    Range range{rec->first, rec->last};
    if (params.count("from") || params.count("to")) {
        range = range_of(params, true);
    }
    const auto committed = store_.committed_intervals(range.from, range.to).size();
    const double seconds = interval_seconds() * static_cast<double>(committed);
    std::map<Guid, correlate::RadarVector> vectors;
    json values = json::object();
    for (auto guid : rec->nodes) {
        auto ref = topology_.find(guid);
        if (!ref) {
            continue;
        }
        correlate::DeviceMetrics sum;
        for (const auto& s : store_.query_device(range.from, range.to, guid)) {
            sum += s.metrics;
        }
        auto v = correlate::radar_values(sum, correlate::attached_capacities(topology_, *ref), seconds, mode);
        values[guid.to_hex()] = v.values;
        vectors.emplace(guid, v);
    }
    std::vector<Guid> outliers;
    try {
        outliers = correlate::outlier_nodes(vectors, delta);
    } catch (const correlate::CorrelateError& e) {
        bad_request(e.what());
    }
    json list = json::array();
    for (auto g : outliers) {
        list.push_back(g.to_hex());
    }
    return json{{"job", id},
                {"delta", delta},
                {"mode", mode == correlate::RadarMode::Absolute ? "absolute" : "relative"},
                {"from", range.from},
                {"to", range.to},
                {"outliers", std::move(list)},
                {"vectors", std::move(values)}};
}

json Service::rules(const Params& params) const {
    if (!rules_) {
        throw ApiError(503, "no rule book attached");
    }
    json list = json::array();
    for (const auto& r : rules_->snapshot()) {
        list.push_back(rule_json(r));
    }
    return page(std::move(list), params, "rules");
}

json Service::put_rule(const std::string& body) {
    if (!rules_) {
        throw ApiError(503, "no rule book attached");
    }
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        bad_request(std::string("body is not JSON: ") + e.what());
    }
    if (!j.is_object()) {
        bad_request("body must be a JSON object");
    }
    std::string line;
    try {
        if (j.contains("text")) {
            line = j.at("text").get<std::string>();
        } else {
            auto threshold = j.at("threshold");
            if (!threshold.is_number()) {
                bad_request("threshold must be a number");
            }
            std::ostringstream os;
            os.precision(17);
            os << "rule " << j.at("metric").get<std::string>() << " " << j.at("comparator").get<std::string>() << " "
               << threshold.get<double>() << " " << j.value("scope", std::string("all")) << " "
               << j.value("period", 1u);
            line = os.str();
        }
    } catch (const json::exception& e) {
        bad_request(std::string("bad rule fields: ") + e.what());
    }
    notify::Rule rule;
    try {
        rule = notify::parse_rule_line(line);
        rule.id = j.value("id", std::uint64_t{0});
        rule.id = rules_->upsert(rule);
    } catch (const notify::NotifyError& e) {
        bad_request(e.what());
    } catch (const json::exception& e) {
        bad_request(std::string("bad rule id: ") + e.what());
    }
    return rule_json(*rules_->find(rule.id));
}

void Service::delete_rule(std::uint64_t id) {
    if (!rules_) {
        throw ApiError(503, "no rule book attached");
    }
    try {
        rules_->remove(id);
    } catch (const notify::NotifyError& e) {
        not_found(e.what());
    }
}

json Service::events(const Params& params) const {
    const auto range = range_of(params, true);
    store::EventFilter filter;
    if (auto r = int_param(params, "rule")) {
        filter.rule_id = static_cast<std::uint64_t>(*r);
    }
    if (auto j = int_param(params, "job")) {
        filter.job = static_cast<JobId>(*j);
    }
    if (auto s = string_param(params, "subject")) {
        filter.subject = parse_subject(*s);
    }
    json list = json::array();
    if (!range.empty()) {
        for (const auto& e : store_call([&] { return store_.list_events(range.from, range.to, filter); })) {
            list.push_back(store::to_json(e));
        }
    }
    return page(std::move(list), params, "events");
}

json Service::replay(const Params& params) const {
    const auto metric = metric_param(params);
    const auto step = int_param(params, "step").value_or(1);
    if (step < 1) {
        bad_request("step must be at least 1");
    }
    const auto range = range_of(params, true);
    const auto limit = int_param(params, "limit").value_or(static_cast<std::int64_t>(kDefaultPageLimit));
    const auto offset = int_param(params, "offset").value_or(0);
    if (limit <= 0 || offset < 0) {
        bad_request("limit must be positive and offset non-negative");
    }
    const std::int64_t total = range.empty() ? 0 : (range.to - range.from) / step + 1;
    const double seconds = interval_seconds();
    json frames = json::array();
    for (auto i = offset; i < total && i < offset + limit; ++i) {
        const IntervalIndex k = range.from + i * step;
        auto commit = store_.read_interval(k);
        json links = json::array();
        if (commit) {
            for (const auto& row : commit->links) {
                const auto& l = topology_.link(row.link);
                const double f = viz::utilization_fraction(metric_bytes(row.dir[0], metric),
                                                           metric_bytes(row.dir[1], metric), l.capacity_bps, seconds);
                if (f > 0.0) {
                    auto j = band_json(f);
                    j["id"] = row.link.value;
                    j["fraction"] = f;
                    links.push_back(std::move(j));
                }
            }
        }
        frames.push_back(json{{"interval", k}, {"gap", !commit.has_value()}, {"links", std::move(links)}});
    }
    return json{{"metric", metric},
                {"from", range.empty() ? json(nullptr) : json(range.from)},
                {"to", range.empty() ? json(nullptr) : json(range.to)},
                {"step", step},
                {"total", total},
                {"offset", offset},
                {"limit", limit},
                {"frames", std::move(frames)}};
}

json Service::quarantine(const Params& params) const {
    const auto range = range_of(params, true);
    json list = json::array();
    if (!range.empty()) {
        for (auto k : store_call([&] { return store_.committed_intervals(range.from, range.to); })) {
            auto commit = store_.read_interval(k);
            if (!commit) {
                continue;
            }
            for (const auto& q : commit->quarantine) {
                auto j = store::to_json(q);
                j["interval"] = k;
                list.push_back(std::move(j));
            }
        }
    }
    return page(std::move(list), params, "entries");
}

json Service::fan(const Params& params) const {
    auto need = [&](const char* name) {
        auto v = double_param(params, name);
        if (!v) {
            bad_request(std::string("missing parameter '") + name + "'");
        }
        return *v;
    };
    const viz::Point a{need("ax"), need("ay")};
    const viz::Point b{need("bx"), need("by")};
    const auto n = int_param(params, "n").value_or(1);
    if (n < 1 || n > 4096) {
        bad_request("n must lie in [1, 4096]");
    }
    json points = json::array();
    if (n > 1) {
        for (std::uint32_t k = 1; k <= n; ++k) {
            auto p = viz::fan_control_point(a, b, static_cast<std::uint32_t>(n), k);
            points.push_back(json{{"k", k}, {"x", p.x}, {"y", p.y}});
        }
    }
    return json{{"n", n}, {"straight", n == 1}, {"control_points", std::move(points)}};
}

json Service::stats() const {
    const auto s = store_.stats();
    json out{{"store",
              {{"segments", s.segments},
               {"bytes", s.bytes},
               {"intervals", s.intervals},
               {"frames", s.frames},
               {"skipped_identical", s.skipped_identical},
               {"recovered_truncations", s.recovered_truncations},
               {"first_interval", s.first_interval ? json(*s.first_interval) : json(nullptr)},
               {"last_interval", s.last_interval ? json(*s.last_interval) : json(nullptr)}}},
             {"fabric",
              {{"switches", topology_.switches().size()},
               {"hosts", topology_.hosts().size()},
               {"links", topology_.links().size()}}},
             {"interval_ms", store_.interval_ms()}};
    if (stats_source_) {
        out.update(stats_source_());
    }
    return out;
}

}  // namespace fabric_lens::server
