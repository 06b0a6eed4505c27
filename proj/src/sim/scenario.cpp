// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/sim/scenario.hpp"

#include <algorithm>
#include <json.hpp>
#include <limits>

#include "fabric_lens/common/text.hpp"

namespace fabric_lens::sim {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& what) { throw ScenarioError(ScenarioErrc::Malformed, what); }

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        malformed(std::string("field '") + key + "': " + e.what());
    }
}

template <typename T>
T require(const json& j, const char* key) {
    if (!j.contains(key)) {
        malformed(std::string("missing field '") + key + "'");
    }
    return get_or<T>(j, key, T{});
}

Guid resolve_host(const fabric::FabricTopology& t, const std::string& name) {
    if (auto ref = t.find_hostname(name)) {
        return t.guid_of(*ref);
    }
    if (Guid guid; Guid::parse_hex(name, guid) && t.find(guid)) {
        return guid;
    }
    throw ScenarioError(ScenarioErrc::UnknownHost, "unknown device '" + name + "'");
}

std::vector<Guid> resolve_hosts(const fabric::FabricTopology& t, const json& list) {
    if (!list.is_array()) {
        malformed("host list must be an array");
    }
    std::vector<Guid> out;
    for (const auto& item : list) {
        if (!item.is_string()) {
            malformed("host names must be strings");
        }
        out.push_back(resolve_host(t, item.get<std::string>()));
    }
    return out;
}

std::vector<Guid> compute_hosts_by_lid(const fabric::FabricTopology& t) {
    std::vector<const fabric::HostNode*> hosts;
    for (const auto& h : t.hosts()) {
        if (h.kind == fabric::HostKind::Compute) {
            hosts.push_back(&h);
        }
    }
    std::sort(hosts.begin(), hosts.end(), [](const auto* a, const auto* b) { return a->lid < b->lid; });
    std::vector<Guid> out;
    for (const auto* h : hosts) {
        out.push_back(h->guid);
    }
    return out;
}

FatTreeSpec parse_fabric(const json& j) {
    FatTreeSpec s;
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (name == "reference") {
            return reference_spec();
        }
        if (name == "osc") {
            return osc_scale_spec();
        }
        if (name == "frontera") {
            return frontera_scale_spec();
        }
        malformed("unknown fabric preset '" + name + "'");
    }
    s.edge_switches = require<std::uint32_t>(j, "edge_switches");
    s.root_switches = require<std::uint32_t>(j, "root_switches");
    s.hosts_per_edge = require<std::uint32_t>(j, "hosts_per_edge");
    s.storage_hosts_per_edge = get_or<std::uint32_t>(j, "storage_hosts_per_edge", 0);
    s.links_per_edge_root_pair = get_or<std::uint32_t>(j, "links_per_edge_root_pair", 1);
    s.link_capacity_bps = get_or<std::uint64_t>(j, "link_capacity_bps", s.link_capacity_bps);
    s.host_shortfall = get_or<std::uint32_t>(j, "host_shortfall", 0);
    s.extra_uplinks = get_or<std::uint32_t>(j, "extra_uplinks", 0);
    return s;
}

ErrorCounter parse_counter(const std::string& name) {
    for (auto c : {ErrorCounter::LinkDowned, ErrorCounter::XmtDiscards, ErrorCounter::RcvErrors,
                   ErrorCounter::VL15Dropped}) {
        if (to_string(c) == name) {
            return c;
        }
    }
    malformed("unknown error counter '" + name + "'");
}

JobSpec parse_job(const fabric::FabricTopology& t, const json& j) {
    JobSpec job;
    job.id = require<JobId>(j, "id");
    if (j.contains("nodes")) {
        job.nodes = resolve_hosts(t, j.at("nodes"));
    } else {
        const auto count = require<std::size_t>(j, "node_count");
        const auto offset = get_or<std::size_t>(j, "node_offset", 0);
        const auto all = compute_hosts_by_lid(t);
        if (offset + count > all.size()) {
            malformed("job " + std::to_string(job.id) + " asks for more compute hosts than exist");
        }
        job.nodes.assign(all.begin() + static_cast<std::ptrdiff_t>(offset),
                         all.begin() + static_cast<std::ptrdiff_t>(offset + count));
    }
    job.start = get_or<IntervalIndex>(j, "start", 0);
    job.end = get_or<IntervalIndex>(j, "end", std::numeric_limits<IntervalIndex>::max());

    const auto pattern = require<std::string>(j, "pattern");
    if (pattern == "alltoall") {
        job.pattern = AllToAll{require<std::uint64_t>(j, "bytes_per_pair")};
    } else if (pattern == "checkpoint") {
        Checkpoint c;
        c.bytes_per_proc = require<std::uint64_t>(j, "bytes_per_proc");
        const auto dir = get_or<std::string>(j, "direction", "write");
        if (dir != "write" && dir != "read") {
            malformed("checkpoint direction must be 'read' or 'write'");
        }
        c.direction = dir == "write" ? IoDirection::Write : IoDirection::Read;
        if (!j.contains("osts") || !j.at("osts").is_array()) {
            malformed("checkpoint job needs an 'osts' array");
        }
        for (const auto& o : j.at("osts")) {
            c.osts.push_back({require<std::string>(o, "name"), resolve_host(t, require<std::string>(o, "oss"))});
        }
        job.pattern = std::move(c);
    } else if (pattern == "multicast") {
        Multicast m;
        m.group = resolve_hosts(t, j.contains("group") ? j.at("group") : json::array());
        m.bytes_per_interval = require<std::uint64_t>(j, "bytes_per_interval");
        job.pattern = std::move(m);
    } else {
        malformed("unknown pattern '" + pattern + "'");
    }
    return job;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        malformed(e.what());
    }
    if (!doc.is_object()) {
        malformed("scenario must be a JSON object");
    }
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };

    Scenario s;
    if (doc.contains("topology_file")) {
        s.topology = fabric::load_topology_file(resolve(require<std::string>(doc, "topology_file")).string());
    } else if (doc.contains("fabric")) {
        s.fabric_spec = parse_fabric(doc.at("fabric"));
        try {
            s.topology = generate_fat_tree(*s.fabric_spec);
        } catch (const std::invalid_argument& e) {
            malformed(e.what());
        }
    } else {
        malformed("scenario needs 'fabric' or 'topology_file'");
    }
    s.routing = fabric::compute_routing(s.topology);
    if (doc.contains("routes_file")) {
        fabric::apply_routes(s.routing, s.topology,
                             read_text_file(resolve(require<std::string>(doc, "routes_file")).string()));
    }

    s.options.interval_ms = get_or<std::uint32_t>(doc, "interval_ms", s.options.interval_ms);
    if (s.options.interval_ms == 0) {
        malformed("interval_ms must be positive");
    }
    s.options.epoch_ns = get_or<std::uint64_t>(doc, "epoch_ns", 0);
    s.options.seed = get_or<std::uint64_t>(doc, "seed", s.options.seed);
    s.options.noise_max_bytes = get_or<std::uint64_t>(doc, "noise_max_bytes", 0);

    for (const auto& j : doc.value("jobs", json::array())) {
        s.jobs.push_back(parse_job(s.topology, j));
    }
    for (const auto& f : doc.value("faults", json::array())) {
        FaultInjection fault;
        fault.device = resolve_host(s.topology, require<std::string>(f, "device"));
        fault.port = require<std::uint16_t>(f, "port");
        fault.counter = parse_counter(require<std::string>(f, "counter"));
        fault.interval = require<IntervalIndex>(f, "interval");
        fault.increment = get_or<std::uint64_t>(f, "increment", 1);
        s.faults.push_back(fault);
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    return parse_scenario(read_text_file(path.string()), path.parent_path());
}

Simulator make_simulator(const Scenario& scenario) {
    Simulator sim(scenario.topology, scenario.routing, scenario.options);
    for (const auto& job : scenario.jobs) {
        sim.schedule_job(job);
    }
    for (const auto& fault : scenario.faults) {
        sim.inject_fault(fault);
    }
    return sim;
}

}  // namespace fabric_lens::sim
