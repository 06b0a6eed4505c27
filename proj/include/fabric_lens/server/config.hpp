// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "fabric_lens/common/error.hpp"
#include "fabric_lens/store/store.hpp"

namespace fabric_lens::server {

enum class ServerErrc { InvalidConfig, UnreadablePath, BindFailure };
using ServerError = CodedError<ServerErrc>;

inline constexpr const char* kDataDirEnv = "FABRIC_LENS_DATA_DIR";

struct Endpoint {
    std::string address = "127.0.0.1";
    std::uint16_t port = 0;  // 0 picks a free port
};

enum class Mode : std::uint8_t { Live, Simulate };

// JSON layout, relative paths resolved against the config file:
//   {
//     "ingest": {"address": "0.0.0.0", "port": 7070},
//     "http": {"address": "127.0.0.1", "port": 8080},
//     "interval_ms": 5000, "epoch_ns": 0,
//     "data_dir": "/var/lib/fabric-lens",
//     "topology_file": "cluster.topo", "routes_file": "cluster.routes",
//     "hosts_file": "/etc/hosts", "arp_file": "arp.txt", "rules_file": "rules.txt",
//     "mode": "live",
//     "scenario_file": "scenario.json",
//     "simulate": {"intervals": 0, "pace_ms": 5000},
//     "webhook_url": "http://127.0.0.1:9000/hook",
//     "store": {"max_segments": 0, "max_total_bytes": 0, "sync": true},
//     "ingest_buffer_bytes": 67108864
//   }
// In simulate mode the scenario supplies the fabric, interval length and epoch.
struct ServerConfig {
    Endpoint ingest{"127.0.0.1", 7070};
    Endpoint http{"127.0.0.1", 8080};
    std::uint32_t interval_ms = 5000;
    std::uint64_t epoch_ns = 0;
    std::filesystem::path data_dir = "fabric-lens-data";
    std::filesystem::path topology_file;
    std::filesystem::path routes_file;
    std::filesystem::path hosts_file;
    std::filesystem::path arp_file;
    std::filesystem::path rules_file;
    Mode mode = Mode::Live;
    std::filesystem::path scenario_file;
    std::uint64_t simulate_intervals = 0;  // 0: until stopped
    // Wall time between simulated intervals; unset means one interval length.
    std::optional<std::uint32_t> simulate_pace_ms;
    std::string webhook_url;               // empty: no webhook
    store::StoreOptions store;
    std::size_t ingest_buffer_bytes = 64u << 20;
};

// Throws ServerError(InvalidConfig) on unknown modes or bad field types.
ServerConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
// Reads the file, applies the data directory override from the environment
// and validates.
ServerConfig load_config(const std::filesystem::path& path);

// FABRIC_LENS_DATA_DIR, when set and non-empty, replaces data_dir.
void apply_environment(ServerConfig& config);

// Interval of at least 100 ms, readable input files, a scenario in simulate
// mode and a topology in live mode. Throws ServerError.
void validate(const ServerConfig& config);

std::string_view to_string(Mode mode);

}  // namespace fabric_lens::server
