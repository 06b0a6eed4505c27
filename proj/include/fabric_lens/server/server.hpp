// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <thread>

#include "fabric_lens/correlate/host_maps.hpp"
#include "fabric_lens/notify/rules.hpp"
#include "fabric_lens/server/config.hpp"
#include "fabric_lens/server/http.hpp"
#include "fabric_lens/server/ingest.hpp"
#include "fabric_lens/server/live.hpp"
#include "fabric_lens/server/pipeline.hpp"
#include "fabric_lens/server/service.hpp"
#include "fabric_lens/server/webhook.hpp"
#include "fabric_lens/sim/scenario.hpp"
#include "fabric_lens/store/store.hpp"

namespace fabric_lens::server {

// Encodes every record of `batch` (counters, port errors, MPI, I/O) and
// passes each frame to `send`.
void for_each_datagram(const wire::TelemetryBatch& batch,
                       const std::function<void(std::span<const std::uint8_t>)>& send);

// Continues a simulated run stored in `store`: replays the committed
// prefix through `sim` without emitting it and primes `pipeline` with the
// counter state it leaves. No-op on an empty store.
void resume_simulation(sim::Simulator& sim, const store::Store& store, Pipeline& pipeline);

// Hosts file entries first, then the topology's own addresses; ARP from file.
correlate::HostMaps load_host_maps(const fabric::FabricTopology& topology, const ServerConfig& config);

// Rules from `config.rules_file` seed an empty rule book; once the store
// holds rules (or ever did), the store wins.
void seed_rules(notify::RuleBook& book, const store::Store& store, const ServerConfig& config);

// The collector daemon: UDP ingest, interval pipeline, store, rules and the
// HTTP API, plus the in-process simulator in simulate mode.
class Server {
public:
    // Loads the fabric, opens the store and rule book. Throws ServerError,
    // fabric and store errors.
    explicit Server(ServerConfig config);
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    // Binds both sockets (ServerError BindFailure) and starts every thread.
    void start();
    // Stops ingest and simulation, commits what is pending, stops the API.
    void stop();

    std::uint16_t http_port() const { return http_port_; }
    std::uint16_t ingest_port() const { return ingest_ ? ingest_->port() : 0; }
    // Simulate mode: the configured number of intervals has been committed.
    bool simulation_done() const { return sim_done_.load(); }

    const ServerConfig& config() const { return config_; }
    const fabric::FabricTopology& topology() const { return topology_; }
    Pipeline& pipeline() { return *pipeline_; }
    Service& service() { return *service_; }
    store::Store& store() { return *store_; }

private:
    void commit_loop();
    void simulate_loop();
    nlohmann::json runtime_stats() const;

    ServerConfig config_;
    std::optional<sim::Scenario> scenario_;
    fabric::FabricTopology topology_;
    fabric::RoutingTable routing_;
    std::uint32_t interval_ms_ = 0;
    std::uint64_t epoch_ns_ = 0;

    std::unique_ptr<store::Store> store_;
    std::unique_ptr<notify::RuleBook> rules_;
    std::unique_ptr<Pipeline> pipeline_;
    std::unique_ptr<Service> service_;
    LiveHub hub_;
    std::unique_ptr<Webhook> webhook_;
    std::unique_ptr<HttpApi> http_;
    std::unique_ptr<UdpIngest> ingest_;
    std::uint16_t http_port_ = 0;

    std::mutex stop_mutex_;
    std::condition_variable stop_cv_;
    bool stopping_ = false;
    bool started_ = false;
    std::atomic<bool> sim_done_{false};
    std::thread committer_;
    std::thread simulator_;
};

}  // namespace fabric_lens::server
