// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/server/server.hpp"

#include <chrono>
#include <iostream>

#include "fabric_lens/common/text.hpp"
#include "fabric_lens/store/json.hpp"
#include "fabric_lens/wire/codec.hpp"

namespace fabric_lens::server {

using nlohmann::json;

namespace {

constexpr auto kCommitTick = std::chrono::milliseconds(50);

std::uint64_t now_ns() {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::system_clock::now().time_since_epoch())
            .count());
}

store::StoreCatalog catalog_of(const fabric::FabricTopology& t) {
    store::StoreCatalog c;
    c.link_count = t.links().size();
    for (const auto& s : t.switches()) {
        c.devices.insert(s.guid);
    }
    for (const auto& h : t.hosts()) {
        c.devices.insert(h.guid);
    }
    return c;
}

template <typename Record>
void send_record(const Record& r, std::vector<std::uint8_t>& buf,
                 const std::function<void(std::span<const std::uint8_t>)>& send) {
    const auto n = wire::encode_into(r, buf);
    send(std::span<const std::uint8_t>(buf.data(), n));
}

}  // namespace

void for_each_datagram(const wire::TelemetryBatch& batch,
                       const std::function<void(std::span<const std::uint8_t>)>& send) {
    std::vector<std::uint8_t> buf(wire::kMaxRecordSize);
    for (const auto& r : batch.counters) {
        send_record(r, buf, send);
    }
    for (const auto& r : batch.port_errors) {
        send_record(r, buf, send);
    }
    for (const auto& r : batch.mpi) {
        send_record(r, buf, send);
    }
    for (const auto& r : batch.io) {
        send_record(r, buf, send);
    }
}

void resume_simulation(sim::Simulator& sim, const store::Store& store, Pipeline& pipeline) {
    const auto last = store.last_interval();
    if (!last) {
        return;
    }
    correlate::CounterBaseline baseline;
    std::map<fabric::PortRef, wire::PortErrorSample> errors;
    while (sim.next_interval() <= *last) {
        auto step = sim.step();
        correlate::advance_baseline(baseline, step.batch);
        for (const auto& e : step.batch.port_errors) {
            errors[fabric::PortRef{e.device, e.port}] = e;
        }
    }
    pipeline.prime(std::move(baseline), std::move(errors), *last);
}

correlate::HostMaps load_host_maps(const fabric::FabricTopology& topology, const ServerConfig& config) {
    correlate::HostMaps maps;
    if (!config.hosts_file.empty()) {
        maps.hosts = correlate::parse_hosts_file(read_text_file(config.hosts_file.string()));
    }
    for (const auto& [ip, name] : correlate::HostMaps::from_topology(topology).hosts) {
        maps.hosts.try_emplace(ip, name);
    }
    if (!config.arp_file.empty()) {
        maps.arp = correlate::parse_arp_file(read_text_file(config.arp_file.string()));
    }
    return maps;
}

void seed_rules(notify::RuleBook& book, const store::Store& store, const ServerConfig& config) {
    if (config.rules_file.empty() || store.max_rule_id() != 0) {
        return;
    }
    for (const auto& rule : notify::parse_rules_file(read_text_file(config.rules_file.string()))) {
        book.upsert(rule);
    }
}

Server::Server(ServerConfig config) : config_(std::move(config)) {
    validate(config_);
    if (config_.mode == Mode::Simulate) {
        scenario_ = sim::load_scenario(config_.scenario_file);
        topology_ = scenario_->topology;
        routing_ = scenario_->routing;
        interval_ms_ = scenario_->options.interval_ms;
        epoch_ns_ = scenario_->options.epoch_ns;
    } else {
        topology_ = fabric::load_topology_file(config_.topology_file.string());
        routing_ = fabric::compute_routing(topology_);
        if (!config_.routes_file.empty()) {
            fabric::apply_routes(routing_, topology_, read_text_file(config_.routes_file.string()));
        }
        interval_ms_ = config_.interval_ms;
        epoch_ns_ = config_.epoch_ns;
    }
    if (interval_ms_ < 100) {
        throw ServerError(ServerErrc::InvalidConfig, "interval must be at least 100 ms");
    }

    store_ = store::Store::open(config_.data_dir, catalog_of(topology_), interval_ms_, config_.store);
    rules_ = std::make_unique<notify::RuleBook>(topology_.links().size(), store_.get());
    seed_rules(*rules_, *store_, config_);

    PipelineOptions opts;
    opts.interval_ms = interval_ms_;
    opts.epoch_ns = epoch_ns_;
    opts.prime_baseline = config_.mode == Mode::Live;
    opts.job_source = config_.mode == Mode::Simulate ? store::JobSource::Simulator : store::JobSource::External;
    pipeline_ = std::make_unique<Pipeline>(topology_, routing_, load_host_maps(topology_, config_), *store_, *rules_,
                                           opts);
    service_ = std::make_unique<Service>(topology_, routing_, *store_, rules_.get());
    service_->set_stats_source([this] { return runtime_stats(); });

    if (!config_.webhook_url.empty()) {
        webhook_ = std::make_unique<Webhook>(config_.webhook_url);
    }
    pipeline_->on_commit([this](const LiveUpdate& update) {
        const auto j = to_json(update);
        hub_.publish(j.dump());
        if (webhook_ && !update.events.empty()) {
            webhook_->post(json{{"interval", update.interval}, {"events", j.at("events")}}.dump());
        }
    });
}

Server::~Server() { stop(); }

void Server::start() {
    if (started_) {
        return;
    }
    http_ = std::make_unique<HttpApi>(*service_, hub_);
    http_port_ = http_->bind(config_.http);
    ingest_ = std::make_unique<UdpIngest>(config_.ingest, config_.ingest_buffer_bytes,
                                          [this](std::span<const std::uint8_t> d) { pipeline_->ingest_datagram(d); });
    started_ = true;
    ingest_->start();
    http_->start();
    committer_ = std::thread([this] { commit_loop(); });
    if (scenario_) {
        simulator_ = std::thread([this] { simulate_loop(); });
    }
}

void Server::stop() {
    if (!started_) {
        return;
    }
    {
        std::lock_guard lock(stop_mutex_);
        stopping_ = true;
    }
    stop_cv_.notify_all();
    if (simulator_.joinable()) {
        simulator_.join();
    }
    ingest_->stop();
    if (committer_.joinable()) {
        committer_.join();
    }
    pipeline_->flush();
    http_->stop();
    if (webhook_) {
        webhook_->stop();
    }
    started_ = false;
}

void Server::commit_loop() {
    std::unique_lock lock(stop_mutex_);
    while (!stopping_) {
        lock.unlock();
        try {
            if (config_.mode == Mode::Live) {
                pipeline_->advance_clock(now_ns());
            }
            pipeline_->commit_ready();
        } catch (const std::exception& e) {
            std::cerr << "fabric-lens: commit failed: " << e.what() << "\n";
        }
        lock.lock();
        stop_cv_.wait_for(lock, kCommitTick, [&] { return stopping_; });
    }
}

void Server::simulate_loop() {
    try {
        auto sim = sim::make_simulator(*scenario_);
        resume_simulation(sim, *store_, *pipeline_);
        const auto pace = std::chrono::milliseconds(config_.simulate_pace_ms.value_or(interval_ms_));
        const auto limit = static_cast<IntervalIndex>(config_.simulate_intervals);
        std::unique_lock lock(stop_mutex_);
        while (!stopping_ && (limit == 0 || sim.next_interval() < limit)) {
            lock.unlock();
            auto step = sim.step();
            // Through the wire codec, exactly as a remote agent would send it.
            for_each_datagram(step.batch,
                              [this](std::span<const std::uint8_t> d) { pipeline_->ingest_datagram(d); });
            pipeline_->commit_ready();
            lock.lock();
            stop_cv_.wait_for(lock, pace, [&] { return stopping_; });
        }
        const bool finished = !stopping_;
        lock.unlock();
        if (finished) {
            pipeline_->flush();
            sim_done_ = true;
        }
    } catch (const std::exception& e) {
        std::cerr << "fabric-lens: simulation stopped: " << e.what() << "\n";
    }
}

json Server::runtime_stats() const {
    const auto s = pipeline_->stats();
    json out{{"mode", to_string(config_.mode)},
             {"pipeline",
              {{"datagrams", s.datagrams},
               {"records", s.records},
               {"decode_errors", s.decode_errors},
               {"late_drops", s.late_drops},
               {"commits", s.commits},
               {"recommits", s.recommits},
               {"commit_failures", s.commit_failures},
               {"quarantined", s.quarantined},
               {"events", s.events},
               {"watermark", s.watermark ? json(*s.watermark) : json(nullptr)},
               {"last_committed", s.last_committed ? json(*s.last_committed) : json(nullptr)}}},
             {"live_subscribers", hub_.subscribers()}};
    if (ingest_) {
        out["ingest"] = json{{"port", ingest_->port()},
                             {"receive_buffer_bytes", ingest_->receive_buffer_bytes()},
                             {"datagrams", ingest_->datagrams()}};
    }
    if (webhook_) {
        out["webhook"] = json{{"sent", webhook_->sent()}, {"failed", webhook_->failed()}};
    }
    if (scenario_) {
        out["simulation_done"] = sim_done_.load();
    }
    return out;
}

}  // namespace fabric_lens::server
