// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "fabric_lens/common/error.hpp"
#include "fabric_lens/fabric/routing.hpp"
#include "fabric_lens/fabric/topology.hpp"
#include "fabric_lens/wire/batch.hpp"

namespace fabric_lens::sim {

enum class SimErrc { UnknownGuid, OverlappingJobId, InvalidJob, InvalidFault };
using SimError = CodedError<SimErrc>;

// Packet synthesis MTU.
inline constexpr std::uint64_t kMtuBytes = 4096;

struct OstTarget {
    std::string name;
    Guid oss;  // storage host serving the OST

    bool operator==(const OstTarget&) const = default;
};

enum class IoDirection : std::uint8_t { Read, Write };

// Every ordered pair of job nodes exchanges `bytes_per_pair` each interval.
struct AllToAll {
    std::uint64_t bytes_per_pair = 0;
    bool operator==(const AllToAll&) const = default;
};

// Each job node reads or writes `bytes_per_proc` against every listed OST.
struct Checkpoint {
    std::uint64_t bytes_per_proc = 0;
    std::vector<OstTarget> osts;
    IoDirection direction = IoDirection::Write;
    bool operator==(const Checkpoint&) const = default;
};

// The first job node multicasts to `group` along a spanning tree.
struct Multicast {
    std::vector<Guid> group;
    std::uint64_t bytes_per_interval = 0;
    bool operator==(const Multicast&) const = default;
};

using TrafficPattern = std::variant<AllToAll, Checkpoint, Multicast>;

struct JobSpec {
    JobId id = 0;
    std::vector<Guid> nodes;
    TrafficPattern pattern;
    IntervalIndex start = 0;  // first active interval
    IntervalIndex end = 0;    // one past the last active interval

    bool operator==(const JobSpec&) const = default;
};

enum class ErrorCounter : std::uint8_t { LinkDowned, XmtDiscards, RcvErrors, VL15Dropped };

// Adds `increment` to one error counter of (device, port) at `interval`.
struct FaultInjection {
    Guid device;
    std::uint16_t port = 0;
    ErrorCounter counter = ErrorCounter::XmtDiscards;
    IntervalIndex interval = 0;
    std::uint64_t increment = 1;
};

struct SimulatorOptions {
    std::uint32_t interval_ms = 5000;
    std::uint64_t epoch_ns = 0;
    std::uint64_t seed = 1;
    // Upper bound of the uniform per-link, per-direction byte jitter; 0 disables it.
    std::uint64_t noise_max_bytes = 0;
};

// Exact bytes the simulator put on one link direction in one interval.
struct DirectionTruth {
    std::uint64_t mpi = 0;
    std::uint64_t io = 0;
    std::uint64_t multicast = 0;
    std::uint64_t noise = 0;
    std::uint64_t packets = 0;
    std::map<JobId, std::uint64_t> per_job;  // MPI + IO bytes by job

    std::uint64_t unicast() const { return mpi + io; }
    std::uint64_t total() const { return mpi + io + multicast + noise; }
};

struct LinkTruth {
    std::array<DirectionTruth, 2> dir;
};

struct SimulatedInterval {
    wire::TelemetryBatch batch;
    std::vector<LinkTruth> truth;  // indexed by link id
};

// Drives synthetic traffic over a fabric and emits agent records plus port
// counters that agree with each other. Single owner; not thread safe.
class Simulator {
public:
    Simulator(fabric::FabricTopology topology, fabric::RoutingTable routing, SimulatorOptions options = {});

    // Throws SimError: UnknownGuid, OverlappingJobId, InvalidJob.
    JobId schedule_job(const JobSpec& spec);
    void inject_fault(const FaultInjection& fault);

    SimulatedInterval step();
    std::vector<wire::TelemetryBatch> advance(std::size_t intervals);

    IntervalIndex next_interval() const { return next_interval_; }
    const std::map<JobId, JobSpec>& jobs() const { return jobs_; }
    const fabric::FabricTopology& topology() const { return topology_; }
    const fabric::RoutingTable& routing() const { return routing_; }
    const SimulatorOptions& options() const { return options_; }

    std::uint64_t timestamp_of(IntervalIndex interval) const;

private:
    struct Flow {
        fabric::Path path;
        std::uint64_t bytes = 0;
    };
    struct PreparedJob {
        JobSpec spec;
        std::vector<wire::MpiRecord> mpi_template;
        std::vector<wire::IoRecord> io_template;
        std::vector<Flow> unicast_flows;
        fabric::Path multicast_tree;
        std::uint64_t multicast_bytes = 0;
        bool io_flows = false;
    };
    struct PortCounters {
        wire::CounterSample counters;
        wire::PortErrorSample errors;
        bool has_errors = false;
    };

    PreparedJob prepare(const JobSpec& spec) const;
    fabric::Path multicast_tree(const JobSpec& spec, const Multicast& mc) const;
    PortCounters& port_of(LinkId link, Direction outbound, bool sender);

    fabric::FabricTopology topology_;
    fabric::RoutingTable routing_;
    SimulatorOptions options_;
    std::mt19937_64 rng_;
    IntervalIndex next_interval_ = 0;

    std::map<JobId, JobSpec> jobs_;
    std::vector<PreparedJob> prepared_;
    std::vector<FaultInjection> faults_;
    // Two entries per link: end_a then end_b.
    std::vector<PortCounters> ports_;
};

std::string_view to_string(ErrorCounter counter);

}  // namespace fabric_lens::sim
