// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <map>
#include <set>

#include "fabric_lens/sim/fat_tree.hpp"
#include "fabric_lens/sim/scenario.hpp"
#include "fabric_lens/sim/simulator.hpp"
#include "test_support.hpp"

using namespace fabric_lens;
using namespace fabric_lens::sim;

namespace {

std::vector<Guid> compute_guids(const fabric::FabricTopology& t, std::size_t n, std::size_t offset = 0) {
    std::vector<Guid> out;
    for (const auto& h : t.hosts()) {
        if (h.kind == fabric::HostKind::Compute) {
            if (offset > 0) {
                --offset;
                continue;
            }
            if (out.size() < n) {
                out.push_back(h.guid);
            }
        }
    }
    return out;
}

Guid storage_guid(const fabric::FabricTopology& t, std::size_t which = 0) {
    for (const auto& h : t.hosts()) {
        if (h.kind == fabric::HostKind::Storage && which-- == 0) {
            return h.guid;
        }
    }
    return {};
}

Simulator make_sim(const FatTreeSpec& spec, SimulatorOptions opts = {}) {
    auto t = generate_fat_tree(spec);
    auto r = fabric::compute_routing(t);
    return Simulator(std::move(t), std::move(r), opts);
}

// Counter deltas between consecutive samples of the same port.
std::map<std::pair<Guid, std::uint16_t>, wire::CounterSample> index_counters(const wire::TelemetryBatch& b) {
    std::map<std::pair<Guid, std::uint16_t>, wire::CounterSample> out;
    for (const auto& c : b.counters) {
        out[{c.device, c.port}] = c;
    }
    return out;
}

FatTreeSpec small_with_storage() {
    FatTreeSpec s;
    s.edge_switches = 3;
    s.root_switches = 2;
    s.hosts_per_edge = 2;
    s.storage_hosts_per_edge = 1;
    return s;
}

}  // namespace

TEST(FatTreeGenerator, MinimalSpecCounts) {
    FatTreeSpec s;
    s.edge_switches = 1;
    s.root_switches = 1;
    s.hosts_per_edge = 2;
    auto t = generate_fat_tree(s);
    EXPECT_EQ(t.switches().size(), 2u);
    EXPECT_EQ(t.hosts().size(), 2u);
    EXPECT_EQ(t.links().size(), 3u);
}

TEST(FatTreeGenerator, OscScaleCounts) {
    auto s = osc_scale_spec();
    auto t = generate_fat_tree(s);
    EXPECT_EQ(t.hosts().size(), 1738u);
    EXPECT_EQ(t.switches().size(), 109u);
    EXPECT_EQ(t.links().size(), 3579u);
    EXPECT_EQ(s.host_count(), 1738u);
    EXPECT_EQ(s.link_count(), 3579u);
}

TEST(FatTreeGenerator, FronteraScaleCounts) {
    auto s = frontera_scale_spec();
    auto t = generate_fat_tree(s);
    EXPECT_EQ(t.hosts().size(), 8811u);
    EXPECT_EQ(t.switches().size(), 494u);
    EXPECT_EQ(t.links().size(), 22819u);
}

TEST(FatTreeGenerator, ReferenceShape) {
    auto t = generate_fat_tree(reference_spec());
    EXPECT_EQ(t.hosts().size(), 4u);
    EXPECT_EQ(t.switches().size(), 4u);
    EXPECT_EQ(t.links().size(), 8u);
}

TEST(FatTreeGenerator, IsDeterministicAndRoundTrips) {
    auto a = generate_fat_tree(small_with_storage());
    auto b = generate_fat_tree(small_with_storage());
    EXPECT_EQ(a, b);
    EXPECT_EQ(fabric::parse_topology(fabric::serialize_topology(a)), a);
}

TEST(FatTreeGenerator, RejectsInconsistentSpec) {
    FatTreeSpec s;
    s.edge_switches = 0;
    EXPECT_THROW(generate_fat_tree(s), std::invalid_argument);
    s = FatTreeSpec{};
    s.root_switches = 0;
    EXPECT_THROW(generate_fat_tree(s), std::invalid_argument);
}

// Every host pair on small generated fabrics: contiguous path, at most four
// hops, and hop count equal to the unrouted shortest distance.
TEST(FatTreeGenerator, ExhaustiveRoutingOnSmallFabrics) {
    for (std::uint32_t e = 1; e <= 4; ++e) {
        for (std::uint32_t r = 1; r <= 3; ++r) {
            FatTreeSpec s;
            s.edge_switches = e;
            s.root_switches = r;
            s.hosts_per_edge = 3;
            s.storage_hosts_per_edge = e % 2;
            s.links_per_edge_root_pair = 1 + (e + r) % 2;
            auto t = generate_fat_tree(s);
            ASSERT_LE(t.hosts().size(), 64u);
            auto routing = fabric::compute_routing(t);
            ASSERT_TRUE(routing.complete());
            for (std::uint32_t a = 0; a < t.hosts().size(); ++a) {
                for (std::uint32_t b = 0; b < t.hosts().size(); ++b) {
                    if (a == b) {
                        continue;
                    }
                    fabric::DeviceRef src{fabric::DeviceType::Host, a};
                    fabric::DeviceRef dst{fabric::DeviceType::Host, b};
                    auto path = fabric::route_path(t, routing, t.lid_of(src), t.lid_of(dst));
                    ASSERT_TRUE(fabric_lens::testing::path_is_contiguous(t, path, src, dst));
                    ASSERT_LE(path.size(), 4u);
                    ASSERT_EQ(path.size(), fabric_lens::testing::bfs_distance(t, src, dst));
                }
            }
        }
    }
}

TEST(Simulator, AllToAllFourHostsBooksThreeKilobytesPerHostLink) {
    auto sim = make_sim(reference_spec());
    const auto& t = sim.topology();
    auto nodes = compute_guids(t, 4);
    sim.schedule_job({7, nodes, AllToAll{1000}, 0, 10});
    auto out = sim.step();
    EXPECT_EQ(out.batch.mpi.size(), 12u);
    for (auto guid : nodes) {
        const auto& up = t.host_uplink(t.require(guid));
        const auto& d = out.truth[up.link.value].dir[index_of(up.outbound)];
        EXPECT_EQ(d.mpi, 3000u);
        EXPECT_EQ(d.per_job.at(7), 3000u);
        EXPECT_EQ(d.packets, 3u);
        const auto& back = out.truth[up.link.value].dir[index_of(reverse(up.outbound))];
        EXPECT_EQ(back.mpi, 3000u);
    }
}

TEST(Simulator, RecordsCarryMidpointTimestampsAndSenderSideBytes) {
    SimulatorOptions opts;
    opts.interval_ms = 1000;
    opts.epoch_ns = 5'000'000'000ull;
    auto sim = make_sim(reference_spec(), opts);
    auto nodes = compute_guids(sim.topology(), 2);
    sim.schedule_job({1, nodes, AllToAll{10}, 0, 5});
    sim.step();
    auto out = sim.step();
    for (const auto& r : out.batch.mpi) {
        EXPECT_EQ(r.timestamp_ns, 5'000'000'000ull + 1'500'000'000ull);
        EXPECT_EQ(r.bytes_sent, 10u);
        EXPECT_EQ(r.bytes_recv, 0u);
        EXPECT_EQ(r.interval_ms, 1000u);
    }
    for (const auto& c : out.batch.counters) {
        EXPECT_EQ(c.timestamp_ns, 6'500'000'000ull);
    }
}

TEST(Simulator, CheckpointBooksBytesOnEveryRouteLinkTowardOss) {
    auto sim = make_sim(small_with_storage());
    const auto& t = sim.topology();
    auto nodes = compute_guids(t, 2);
    const auto oss = storage_guid(t, 2);  // behind the third edge switch
    sim.schedule_job({3, nodes, Checkpoint{1 << 20, {{"scratch-OST0000", oss}}, IoDirection::Write}, 0, 4});
    auto out = sim.step();
    ASSERT_EQ(out.batch.io.size(), 2u);
    for (const auto& r : out.batch.io) {
        EXPECT_EQ(r.write.sum, 1u << 20);
        EXPECT_EQ(r.write.count, 1u);
        EXPECT_EQ(r.read.sum, 0u);
        EXPECT_EQ(r.oss_ip, t.host_at(t.require(oss)).ip);
    }
    // Oracle: sum of bytes over each node's route.
    std::map<std::pair<std::uint32_t, int>, std::uint64_t> expected;
    for (auto n : nodes) {
        for (const auto& hop : fabric::route_path(t, sim.routing(), t.lid_of(t.require(n)), t.lid_of(t.require(oss)))) {
            expected[{hop.link.value, index_of(hop.dir)}] += 1 << 20;
        }
    }
    for (std::uint32_t l = 0; l < out.truth.size(); ++l) {
        for (int d = 0; d < 2; ++d) {
            auto it = expected.find({l, d});
            EXPECT_EQ(out.truth[l].dir[d].io, it == expected.end() ? 0 : it->second) << "link " << l;
        }
    }
    const auto& oss_link = t.host_uplink(t.require(oss));
    EXPECT_EQ(out.truth[oss_link.link.value].dir[index_of(reverse(oss_link.outbound))].io, 2u << 20);
    EXPECT_EQ(out.truth[oss_link.link.value].dir[index_of(reverse(oss_link.outbound))].packets, 512u);
}

TEST(Simulator, ReadCheckpointFlowsFromOss) {
    auto sim = make_sim(small_with_storage());
    const auto& t = sim.topology();
    auto nodes = compute_guids(t, 1);
    const auto oss = storage_guid(t, 1);
    sim.schedule_job({3, nodes, Checkpoint{4096, {{"ost1", oss}}, IoDirection::Read}, 0, 4});
    auto out = sim.step();
    const auto& up = t.host_uplink(t.require(nodes[0]));
    EXPECT_EQ(out.truth[up.link.value].dir[index_of(reverse(up.outbound))].io, 4096u);
    EXPECT_EQ(out.truth[up.link.value].dir[index_of(up.outbound)].io, 0u);
    EXPECT_EQ(out.batch.io.at(0).read.sum, 4096u);
}

TEST(Simulator, CountersConserveTruthWithoutNoise) {
    auto sim = make_sim(small_with_storage());
    const auto& t = sim.topology();
    sim.schedule_job({1, compute_guids(t, 4), AllToAll{5000}, 0, 6});
    sim.schedule_job({2, compute_guids(t, 2, 4), Checkpoint{100000, {{"o", storage_guid(t)}}, IoDirection::Write}, 1, 5});
    sim.schedule_job({3, compute_guids(t, 6), Multicast{compute_guids(t, 3, 3), 8192}, 0, 6});

    std::map<std::pair<Guid, std::uint16_t>, wire::CounterSample> prev;
    for (int i = 0; i < 6; ++i) {
        auto out = sim.step();
        auto now = index_counters(out.batch);
        EXPECT_EQ(now.size(), t.links().size() * 2);
        for (const auto& link : t.links()) {
            for (auto dir : {Direction::AtoB, Direction::BtoA}) {
                const auto& tx_ref = dir == Direction::AtoB ? link.end_a : link.end_b;
                const auto& rx_ref = dir == Direction::AtoB ? link.end_b : link.end_a;
                const auto& tx = now[{tx_ref.device, tx_ref.port}];
                const auto& rx = now[{rx_ref.device, rx_ref.port}];
                auto ptx = prev[{tx_ref.device, tx_ref.port}];
                auto prx = prev[{rx_ref.device, rx_ref.port}];
                const auto& truth = out.truth[link.id.value].dir[index_of(dir)];
                EXPECT_EQ(tx.xmit_bytes - ptx.xmit_bytes, truth.total());
                EXPECT_EQ(rx.rcv_bytes - prx.rcv_bytes, truth.total());
                EXPECT_EQ(tx.unicast_xmit_bytes - ptx.unicast_xmit_bytes, truth.unicast());
                EXPECT_EQ(tx.multicast_xmit_bytes - ptx.multicast_xmit_bytes, truth.multicast);
                EXPECT_EQ(rx.multicast_rcv_bytes - prx.multicast_rcv_bytes, truth.multicast);
                EXPECT_EQ(tx.xmit_pkts - ptx.xmit_pkts, truth.packets);
                EXPECT_EQ(truth.noise, 0u);
                std::uint64_t jobs = 0;
                for (const auto& [id, b] : truth.per_job) {
                    jobs += b;
                }
                EXPECT_EQ(jobs, truth.unicast());
            }
        }
        prev = now;
    }
}

TEST(Simulator, MulticastIsNeverBookedAsUnicast) {
    auto sim = make_sim(small_with_storage());
    const auto& t = sim.topology();
    auto nodes = compute_guids(t, 6);
    std::vector<Guid> group(nodes.begin() + 1, nodes.end());
    sim.schedule_job({9, nodes, Multicast{group, 10000}, 0, 3});
    auto out = sim.step();
    EXPECT_TRUE(out.batch.mpi.empty());
    EXPECT_TRUE(out.batch.io.empty());
    std::size_t tree_links = 0;
    for (const auto& l : out.truth) {
        for (const auto& d : l.dir) {
            EXPECT_EQ(d.unicast(), 0u);
            EXPECT_TRUE(d.per_job.empty());
            if (d.multicast > 0) {
                EXPECT_EQ(d.multicast, 10000u);
                ++tree_links;
            }
        }
    }
    // Every receiver's host link carries the payload inbound exactly once.
    for (auto g : group) {
        const auto& up = t.host_uplink(t.require(g));
        EXPECT_EQ(out.truth[up.link.value].dir[index_of(reverse(up.outbound))].multicast, 10000u);
    }
    // A spanning tree over 6 hosts on 3 edges reaching through one root:
    // 6 host links + 3 edge-root links.
    EXPECT_EQ(tree_links, 9u);
}

TEST(Simulator, JobsOnlyEmitInsideTheirLifetime) {
    auto sim = make_sim(reference_spec());
    sim.schedule_job({1, compute_guids(sim.topology(), 2), AllToAll{1}, 2, 4});
    std::vector<std::size_t> sizes;
    for (auto& b : sim.advance(6)) {
        sizes.push_back(b.mpi.size());
    }
    EXPECT_EQ(sizes, (std::vector<std::size_t>{0, 0, 2, 2, 0, 0}));
}

TEST(Simulator, SameSeedSameOutput) {
    SimulatorOptions opts;
    opts.seed = 42;
    opts.noise_max_bytes = 100000;
    auto run = [&] {
        auto sim = make_sim(small_with_storage(), opts);
        sim.schedule_job({1, compute_guids(sim.topology(), 4), AllToAll{777}, 0, 10});
        return sim.advance(5);
    };
    auto a = run();
    auto b = run();
    EXPECT_EQ(a, b);
    opts.seed = 43;
    EXPECT_NE(run(), a);
}

TEST(Simulator, NoiseStaysWithinBoundAndOutOfUnicast) {
    SimulatorOptions opts;
    opts.noise_max_bytes = 5000;
    auto sim = make_sim(reference_spec(), opts);
    bool any = false;
    for (int i = 0; i < 5; ++i) {
        auto out = sim.step();
        for (const auto& l : out.truth) {
            for (const auto& d : l.dir) {
                EXPECT_LE(d.noise, 5000u);
                EXPECT_EQ(d.unicast(), 0u);
                any = any || d.noise > 0;
            }
        }
    }
    EXPECT_TRUE(any);
}

TEST(Simulator, ScheduleErrors) {
    auto sim = make_sim(small_with_storage());
    const auto& t = sim.topology();
    auto nodes = compute_guids(t, 2);
    auto code_of = [&](const JobSpec& spec) {
        try {
            sim.schedule_job(spec);
        } catch (const SimError& e) {
            return e.code();
        }
        ADD_FAILURE() << "no error";
        return SimErrc::InvalidFault;
    };
    sim.schedule_job({1, nodes, AllToAll{1}, 0, 2});
    EXPECT_EQ(code_of({1, nodes, AllToAll{1}, 0, 2}), SimErrc::OverlappingJobId);
    EXPECT_EQ(code_of({2, {Guid{0xdead}}, AllToAll{1}, 0, 2}), SimErrc::UnknownGuid);
    EXPECT_EQ(code_of({3, {}, AllToAll{1}, 0, 2}), SimErrc::InvalidJob);
    EXPECT_EQ(code_of({4, nodes, AllToAll{1}, 3, 3}), SimErrc::InvalidJob);
    EXPECT_EQ(code_of({5, {nodes[0], nodes[0]}, AllToAll{1}, 0, 2}), SimErrc::InvalidJob);
    EXPECT_EQ(code_of({6, nodes, Checkpoint{1, {{"o", nodes[1]}}, IoDirection::Write}, 0, 2}), SimErrc::InvalidJob);
    EXPECT_EQ(code_of({7, nodes, Checkpoint{1, {}, IoDirection::Write}, 0, 2}), SimErrc::InvalidJob);
    EXPECT_EQ(code_of({8, nodes, Multicast{{compute_guids(t, 1, 3)[0]}, 1}, 0, 2}), SimErrc::InvalidJob);
    EXPECT_EQ(code_of({9, {t.switches()[0].guid}, AllToAll{1}, 0, 2}), SimErrc::UnknownGuid);
    EXPECT_EQ(sim.jobs().size(), 1u);
}

TEST(Simulator, FaultsAccumulateOnTheTargetPort) {
    auto sim = make_sim(reference_spec());
    const auto host = compute_guids(sim.topology(), 1)[0];
    sim.inject_fault({host, 1, ErrorCounter::XmtDiscards, 1, 5});
    sim.inject_fault({host, 1, ErrorCounter::XmtDiscards, 3, 2});
    EXPECT_THROW(sim.inject_fault({host, 7, ErrorCounter::RcvErrors, 0, 1}), SimError);
    auto batches = sim.advance(4);
    EXPECT_TRUE(batches[0].port_errors.empty());
    ASSERT_EQ(batches[1].port_errors.size(), 1u);
    EXPECT_EQ(batches[1].port_errors[0].xmt_discards, 5u);
    EXPECT_EQ(batches[2].port_errors[0].xmt_discards, 5u);
    EXPECT_EQ(batches[3].port_errors[0].xmt_discards, 7u);
    EXPECT_EQ(batches[3].port_errors[0].device, host);
}

TEST(Scenario, ParsesJobsFaultsAndPresets) {
    const char* text = R"({
      "fabric": {"edge_switches": 3, "root_switches": 2, "hosts_per_edge": 2, "storage_hosts_per_edge": 1},
      "interval_ms": 1000, "seed": 9, "noise_max_bytes": 10,
      "jobs": [
        {"id": 1, "nodes": ["node00001", "node00002"], "pattern": "alltoall", "bytes_per_pair": 64, "end": 3},
        {"id": 2, "node_count": 2, "node_offset": 2, "pattern": "checkpoint", "bytes_per_proc": 1048576,
         "osts": [{"name": "scratch-OST0000", "oss": "oss00001"}]}
      ],
      "faults": [{"device": "node00001", "port": 1, "counter": "LinkDowned", "interval": 2}]
    })";
    auto s = parse_scenario(text);
    EXPECT_EQ(s.topology.hosts().size(), 9u);
    EXPECT_EQ(s.options.interval_ms, 1000u);
    EXPECT_EQ(s.options.seed, 9u);
    ASSERT_EQ(s.jobs.size(), 2u);
    EXPECT_EQ(s.jobs[0].end, 3);
    EXPECT_EQ(s.jobs[1].nodes.size(), 2u);
    EXPECT_TRUE(std::holds_alternative<Checkpoint>(s.jobs[1].pattern));
    ASSERT_EQ(s.faults.size(), 1u);
    EXPECT_EQ(s.faults[0].counter, ErrorCounter::LinkDowned);
    auto sim = make_simulator(s);
    EXPECT_EQ(sim.jobs().size(), 2u);

    auto preset = parse_scenario(R"({"fabric": "reference"})");
    EXPECT_EQ(preset.topology.hosts().size(), 4u);
}

TEST(Scenario, RejectsBadInput) {
    auto code_of = [](const char* text) {
        try {
            parse_scenario(text);
        } catch (const ScenarioError& e) {
            return e.code();
        }
        ADD_FAILURE() << text;
        return ScenarioErrc::Malformed;
    };
    EXPECT_EQ(code_of("{"), ScenarioErrc::Malformed);
    EXPECT_EQ(code_of("{}"), ScenarioErrc::Malformed);
    EXPECT_EQ(code_of(R"({"fabric": "nope"})"), ScenarioErrc::Malformed);
    EXPECT_EQ(code_of(R"({"fabric": "reference", "jobs": [{"id": 1, "nodes": ["ghost"], "pattern": "alltoall", "bytes_per_pair": 1}]})"),
              ScenarioErrc::UnknownHost);
    EXPECT_EQ(code_of(R"({"fabric": "reference", "jobs": [{"id": 1, "node_count": 9, "pattern": "alltoall", "bytes_per_pair": 1}]})"),
              ScenarioErrc::Malformed);
    EXPECT_EQ(code_of(R"({"fabric": "reference", "jobs": [{"id": 1, "node_count": 1, "pattern": "spin"}]})"),
              ScenarioErrc::Malformed);
}
