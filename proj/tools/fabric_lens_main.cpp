// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

// fabric-lens: collector daemon and operator commands.

#include <CLI11.hpp>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <thread>

#include "fabric_lens/fabric/routing.hpp"
#include "fabric_lens/server/server.hpp"
#include "fabric_lens/sim/fat_tree.hpp"
#include "fabric_lens/sim/scenario.hpp"
#include "fabric_lens/store/json.hpp"
#include "fabric_lens/wire/codec.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fabric_lens;

namespace {

constexpr const char* kDefaultDataDir = "fabric-lens-data";

// Explicit flag, then the environment, then the default.
fs::path data_dir_of(const std::string& flag) {
    if (!flag.empty()) {
        return flag;
    }
    if (const char* env = std::getenv(server::kDataDirEnv); env != nullptr && *env != '\0') {
        return env;
    }
    return kDefaultDataDir;
}

std::unique_ptr<store::Store> open_for_reading(const fs::path& dir) {
    auto ms = store::Store::stored_interval_ms(dir);
    if (!ms) {
        throw std::runtime_error("no store in " + dir.string());
    }
    store::StoreOptions options;
    options.read_only = true;
    return store::Store::open(dir, {}, *ms, options);
}

// Missing bounds default to the stored history.
std::pair<IntervalIndex, IntervalIndex> range_of(const store::Store& s, std::optional<IntervalIndex> from,
                                                 std::optional<IntervalIndex> to) {
    const auto st = s.stats();
    return {from.value_or(st.first_interval.value_or(0)), to.value_or(st.last_interval.value_or(-1))};
}

int run_serve(const std::string& config_path) {
    // Signals are taken synchronously below; block them before any thread
    // starts so every thread inherits the mask.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    auto config = server::load_config(config_path);
    server::Server srv(config);
    srv.start();
    std::cout << "fabric-lens: " << server::to_string(config.mode) << " mode, http " << config.http.address << ":"
              << srv.http_port() << ", ingest udp " << config.ingest.address << ":" << srv.ingest_port()
              << ", data " << config.data_dir.string() << std::endl;
    int sig = 0;
    sigwait(&set, &sig);
    std::cout << "fabric-lens: shutting down" << std::endl;
    srv.stop();
    return 0;
}

struct SimulateArgs {
    std::string scenario;
    std::uint64_t intervals = 10;
    std::optional<std::uint64_t> seed;
    std::string data_dir;
    std::string send;
    std::uint32_t pace_ms = 0;
    std::string rules;
};

int run_simulate(const SimulateArgs& args) {
    auto scenario = sim::load_scenario(args.scenario);
    if (args.seed) {
        scenario.options.seed = *args.seed;
    }
    auto simulator = sim::make_simulator(scenario);
    const double seconds = scenario.options.interval_ms / 1000.0;

    std::unique_ptr<server::UdpSender> sender;
    std::unique_ptr<store::Store> store;
    std::unique_ptr<notify::RuleBook> rules;
    std::unique_ptr<server::Pipeline> pipeline;
    if (!args.send.empty()) {
        const auto colon = args.send.rfind(':');
        if (colon == std::string::npos) {
            throw std::runtime_error("--send wants host:port");
        }
        sender = std::make_unique<server::UdpSender>(args.send.substr(0, colon),
                                                     static_cast<std::uint16_t>(std::stoi(args.send.substr(colon + 1))));
    } else {
        store::StoreCatalog catalog;
        catalog.link_count = scenario.topology.links().size();
        store = store::Store::open(data_dir_of(args.data_dir), catalog, scenario.options.interval_ms);
        rules = std::make_unique<notify::RuleBook>(catalog.link_count, store.get());
        server::ServerConfig cfg;
        cfg.rules_file = args.rules;
        server::seed_rules(*rules, *store, cfg);
        server::PipelineOptions opts;
        opts.interval_ms = scenario.options.interval_ms;
        opts.epoch_ns = scenario.options.epoch_ns;
        opts.prime_baseline = false;
        opts.job_source = store::JobSource::Simulator;
        pipeline = std::make_unique<server::Pipeline>(scenario.topology, scenario.routing,
                                                      correlate::HostMaps::from_topology(scenario.topology), *store,
                                                      *rules, opts);
        server::resume_simulation(simulator, *store, *pipeline);
    }

    std::map<std::string, std::uint64_t> records, bytes;
    double expected_io_bytes = 0.0;
    std::uint64_t run = 0;
    const auto first = simulator.next_interval();
    while (simulator.next_interval() < static_cast<IntervalIndex>(args.intervals)) {
        const auto k = simulator.next_interval();
        auto step = simulator.step();
        ++run;
        for (const auto& [id, job] : simulator.jobs()) {
            if (const auto* cp = std::get_if<sim::Checkpoint>(&job.pattern); cp && k >= job.start && k < job.end) {
                expected_io_bytes += wire::expected_io_rate(job.nodes.size(), cp->osts.size(), 1.0 / seconds) * seconds;
            }
        }
        server::for_each_datagram(step.batch, [&](std::span<const std::uint8_t> d) {
            static const char* names[] = {"", "mpi", "io", "counter", "port_error"};
            const auto type = d.size() > 3 && d[3] <= 4 ? names[d[3]] : "other";
            ++records[type];
            bytes[type] += d.size();
            if (sender) {
                sender->send(d);
            } else {
                pipeline->ingest_datagram(d);
            }
        });
        if (pipeline) {
            pipeline->commit_ready();
        }
        if (args.pace_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(args.pace_ms));
        }
    }
    json summary{{"first_interval", first},
                 {"intervals", run},
                 {"records", records},
                 {"datagram_bytes", bytes}};
    if (run > 0) {
        const double span = seconds * static_cast<double>(run);
        const double io_rate = static_cast<double>(bytes["io"]) / span;
        summary["io_bytes_per_second"] = io_rate;
        summary["expected_io_rate"] = expected_io_bytes / span;
        summary["io_rate_ratio"] = expected_io_bytes > 0 ? json(io_rate / (expected_io_bytes / span)) : json(nullptr);
    }
    if (pipeline) {
        pipeline->flush();
        const auto st = pipeline->stats();
        summary["committed"] = st.commits + st.recommits;
        summary["last_interval"] = st.last_committed ? json(*st.last_committed) : json(nullptr);
        summary["events"] = st.events;
        summary["data_dir"] = data_dir_of(args.data_dir).string();
    } else {
        summary["sent_to"] = args.send;
    }
    std::cout << summary.dump(2) << std::endl;
    return 0;
}

struct GenArgs {
    std::string preset;
    std::optional<std::uint32_t> edge, root, hosts_per_edge, storage_per_edge, links_per_pair, host_shortfall,
        extra_uplinks;
    std::optional<double> capacity_gbps;
    std::string out;
    std::string routes;
};

int run_gen_topology(const GenArgs& a) {
    sim::FatTreeSpec spec;
    if (a.preset == "reference") {
        spec = sim::reference_spec();
    } else if (a.preset == "osc") {
        spec = sim::osc_scale_spec();
    } else if (a.preset == "frontera") {
        spec = sim::frontera_scale_spec();
    } else if (!a.preset.empty()) {
        throw std::runtime_error("unknown preset '" + a.preset + "'");
    } else if (!a.edge || !a.root || !a.hosts_per_edge) {
        throw std::runtime_error("--edge, --root and --hosts-per-edge are required without --preset");
    }
    spec.edge_switches = a.edge.value_or(spec.edge_switches);
    spec.root_switches = a.root.value_or(spec.root_switches);
    spec.hosts_per_edge = a.hosts_per_edge.value_or(spec.hosts_per_edge);
    spec.storage_hosts_per_edge = a.storage_per_edge.value_or(spec.storage_hosts_per_edge);
    spec.links_per_edge_root_pair = a.links_per_pair.value_or(spec.links_per_edge_root_pair);
    spec.host_shortfall = a.host_shortfall.value_or(spec.host_shortfall);
    spec.extra_uplinks = a.extra_uplinks.value_or(spec.extra_uplinks);
    if (a.capacity_gbps) {
        spec.link_capacity_bps = static_cast<std::uint64_t>(*a.capacity_gbps * 1e9);
    }
    const auto topology = sim::generate_fat_tree(spec);
    {
        std::ofstream out(a.out);
        out << fabric::serialize_topology(topology);
        if (!out) {
            throw std::runtime_error("cannot write " + a.out);
        }
    }
    if (!a.routes.empty()) {
        std::ofstream out(a.routes);
        out << fabric::serialize_routes(fabric::compute_routing(topology), topology);
        if (!out) {
            throw std::runtime_error("cannot write " + a.routes);
        }
    }
    std::cout << json{{"hosts", topology.hosts().size()},
                      {"switches", topology.switches().size()},
                      {"links", topology.links().size()},
                      {"topology_file", a.out}}
                     .dump()
              << std::endl;
    return 0;
}

struct QueryArgs {
    std::string data_dir;
    std::optional<IntervalIndex> from, to;
    std::vector<std::uint32_t> links;
    std::optional<JobId> job;
    std::string guid;
    std::optional<std::uint64_t> rule;
};

int run_query_links(const QueryArgs& a) {
    auto s = open_for_reading(data_dir_of(a.data_dir));
    const auto [from, to] = range_of(*s, a.from, a.to);
    if (to < from) {
        return 0;
    }
    store::LinkFilter filter;
    for (auto l : a.links) {
        filter.links.insert(LinkId{l});
    }
    filter.job = a.job;
    auto series = s->query_links(from, to, filter);
    for (const auto& row : series.rows) {
        std::cout << store::to_json(row).dump() << "\n";
    }
    for (auto g : series.gaps) {
        std::cout << json{{"gap", g}}.dump() << "\n";
    }
    return 0;
}

int run_query_device(const QueryArgs& a) {
    Guid guid;
    if (!Guid::parse_hex(a.guid, guid)) {
        throw std::runtime_error("bad GUID '" + a.guid + "'");
    }
    auto s = open_for_reading(data_dir_of(a.data_dir));
    const auto [from, to] = range_of(*s, a.from, a.to);
    if (to < from) {
        return 0;
    }
    for (const auto& sample : s->query_device(from, to, guid)) {
        auto j = store::to_json(sample.metrics);
        j["interval"] = sample.interval;
        j["device"] = guid.to_hex();
        std::cout << j.dump() << "\n";
    }
    return 0;
}

int run_query_events(const QueryArgs& a) {
    auto s = open_for_reading(data_dir_of(a.data_dir));
    const auto [from, to] = range_of(*s, a.from, a.to);
    if (to < from) {
        return 0;
    }
    store::EventFilter filter;
    filter.rule_id = a.rule;
    filter.job = a.job;
    for (const auto& e : s->list_events(from, to, filter)) {
        std::cout << store::to_json(e).dump() << "\n";
    }
    return 0;
}

int run_dump(const QueryArgs& a, const std::string& out_path) {
    auto s = open_for_reading(data_dir_of(a.data_dir));
    const auto [from, to] = range_of(*s, a.from, a.to);
    std::ofstream out(out_path);
    if (!out) {
        throw std::runtime_error("cannot write " + out_path);
    }
    if (to >= from) {
        s->dump(from, to, out);
    }
    return out ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fabric-lens: InfiniBand fabric telemetry collector and analysis"};
    app.require_subcommand(1);

    std::string config_path;
    auto* serve = app.add_subcommand("serve", "Run the collector daemon and HTTP API");
    serve->add_option("--config", config_path, "Server config (JSON)")->required();

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Run a scenario into a store or towards a collector");
    simulate->add_option("--scenario", sim_args.scenario, "Scenario file (JSON)")->required();
    simulate->add_option("--intervals", sim_args.intervals, "Run until this many intervals exist")
        ->capture_default_str();
    simulate->add_option("--seed", sim_args.seed, "Override the scenario seed");
    simulate->add_option("--data-dir", sim_args.data_dir, "Store directory");
    simulate->add_option("--send", sim_args.send, "Send datagrams to host:port instead of storing");
    simulate->add_option("--pace-ms", sim_args.pace_ms, "Wall time between intervals");
    simulate->add_option("--rules", sim_args.rules, "Rules file seeding an empty store");

    GenArgs gen;
    auto* gen_topology = app.add_subcommand("gen-topology", "Write a two-level fat tree topology file");
    gen_topology->add_option("--preset", gen.preset, "reference, osc or frontera");
    gen_topology->add_option("--edge", gen.edge, "Edge switches");
    gen_topology->add_option("--root", gen.root, "Root switches");
    gen_topology->add_option("--hosts-per-edge", gen.hosts_per_edge, "Compute hosts per edge switch");
    gen_topology->add_option("--storage-per-edge", gen.storage_per_edge, "Storage hosts per edge switch");
    gen_topology->add_option("--links-per-pair", gen.links_per_pair, "Parallel links per edge-root pair");
    gen_topology->add_option("--capacity-gbps", gen.capacity_gbps, "Link capacity");
    gen_topology->add_option("--host-shortfall", gen.host_shortfall, "Trailing edge switches with one host fewer");
    gen_topology->add_option("--extra-uplinks", gen.extra_uplinks, "Additional edge-root links");
    gen_topology->add_option("-o,--output", gen.out, "Topology file to write")->required();
    gen_topology->add_option("--routes", gen.routes, "Also write the routing table here");

    QueryArgs q;
    auto* query = app.add_subcommand("query", "Read a store (safe while a server writes it)");
    query->require_subcommand(1);
    auto add_common = [&q](CLI::App* cmd) {
        cmd->add_option("--data-dir", q.data_dir, "Store directory");
        cmd->add_option("--from", q.from, "First interval");
        cmd->add_option("--to", q.to, "Last interval");
    };
    auto* query_links = query->add_subcommand("links", "Per-link breakdowns as JSON lines");
    add_common(query_links);
    query_links->add_option("--link", q.links, "Link id (repeatable)");
    query_links->add_option("--job", q.job, "Only this job's share");
    auto* query_device = query->add_subcommand("device", "Per-interval device metrics");
    add_common(query_device);
    query_device->add_option("--guid", q.guid, "Device GUID")->required();
    auto* query_events = query->add_subcommand("events", "Notification events");
    add_common(query_events);
    query_events->add_option("--rule", q.rule, "Rule id");
    query_events->add_option("--job", q.job, "Job id");

    std::string dump_out;
    auto* dump = app.add_subcommand("dump", "Write committed intervals as JSON lines");
    add_common(dump);
    dump->add_option("-o,--output", dump_out, "Output file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (serve->parsed()) {
            return run_serve(config_path);
        }
        if (simulate->parsed()) {
            return run_simulate(sim_args);
        }
        if (gen_topology->parsed()) {
            return run_gen_topology(gen);
        }
        if (query_links->parsed()) {
            return run_query_links(q);
        }
        if (query_device->parsed()) {
            return run_query_device(q);
        }
        if (query_events->parsed()) {
            return run_query_events(q);
        }
        if (dump->parsed()) {
            return run_dump(q, dump_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "fabric-lens: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
