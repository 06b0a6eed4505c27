// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fabric_lens/common/error.hpp"
#include "fabric_lens/sim/fat_tree.hpp"
#include "fabric_lens/sim/simulator.hpp"

namespace fabric_lens::sim {

enum class ScenarioErrc { Malformed, UnknownHost };
using ScenarioError = CodedError<ScenarioErrc>;

// A fabric plus the jobs and faults to run over it.
//
// JSON layout:
//   {
//     "fabric": {"edge_switches": 2, "root_switches": 2, "hosts_per_edge": 2, ...},
//     "topology_file": "cluster.topo",          // instead of "fabric"
//     "routes_file": "cluster.routes",          // optional overrides
//     "interval_ms": 5000, "epoch_ns": 0, "seed": 1, "noise_max_bytes": 0,
//     "jobs": [
//       {"id": 1, "nodes": ["node00001", "0x0002c90300000002"], "start": 0, "end": 10,
//        "pattern": "alltoall", "bytes_per_pair": 1000},
//       {"id": 2, "node_count": 2, "node_offset": 4, "pattern": "checkpoint",
//        "bytes_per_proc": 1048576, "direction": "write",
//        "osts": [{"name": "scratch-OST0000", "oss": "oss00001"}]},
//       {"id": 3, "nodes": [...], "pattern": "multicast", "group": [...], "bytes_per_interval": 4096}
//     ],
//     "faults": [{"device": "node00001", "port": 1, "counter": "XmtDiscards", "interval": 3, "increment": 1}]
//   }
// Hosts are named by hostname or GUID. `node_count`/`node_offset` pick compute
// hosts in LID order. A job without "end" runs forever.
struct Scenario {
    fabric::FabricTopology topology;
    fabric::RoutingTable routing;
    std::optional<FatTreeSpec> fabric_spec;
    SimulatorOptions options;
    std::vector<JobSpec> jobs;
    std::vector<FaultInjection> faults;
};

// Relative file names resolve against `base_dir`.
Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

// Simulator with every job scheduled and fault injected.
Simulator make_simulator(const Scenario& scenario);

}  // namespace fabric_lens::sim
