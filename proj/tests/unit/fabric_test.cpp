// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "fabric_lens/fabric/routing.hpp"
#include "fabric_lens/fabric/topology.hpp"
#include "fabric_lens/fabric/views.hpp"
#include "test_support.hpp"

namespace fabric_lens::fabric {
namespace {

using testing::bfs_distance;
using testing::path_is_contiguous;
using testing::reference_fabric;

constexpr const char* kMinimal = R"(
# one switch, two hosts
switch 0000000000000010 1 edge 8
host 0000000000000001 2 a 10.1.0.1 compute
host 0000000000000002 3 b 10.1.0.2 storage
link 0000000000000001:1 0000000000000010:1 100
link 0000000000000002:1 0000000000000010:2 100
)";

FabricErrc parse_error(const std::string& text) {
    try {
        parse_topology(text);
    } catch (const FabricError& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected a parse failure";
    return FabricErrc::InvalidTopology;
}

std::vector<Lid> host_lids(const FabricTopology& t) {
    std::vector<Lid> lids;
    for (const auto& h : t.hosts()) {
        lids.push_back(h.lid);
    }
    return lids;
}

// ---------------------------------------------------------------------------
// parse_topology
// ---------------------------------------------------------------------------

TEST(ParseTopology, MinimalFabricHasOneEdgeSwitch) {
    auto t = parse_topology(kMinimal);
    ASSERT_EQ(t.switches().size(), 1u);
    EXPECT_EQ(t.switches()[0].kind, SwitchKind::Edge);
    EXPECT_EQ(t.hosts().size(), 2u);
    EXPECT_EQ(t.links().size(), 2u);
    EXPECT_EQ(t.links()[0].capacity_bps, 100'000'000'000ull);
    EXPECT_EQ(t.hosts()[1].kind, HostKind::Storage);
    EXPECT_EQ(t.hosts()[0].ip.to_string(), "10.1.0.1");
}

TEST(ParseTopology, DuplicateLidIsRejected) {
    EXPECT_EQ(parse_error(R"(
switch 0000000000000010 1 edge 8
host 0000000000000001 5 a 10.1.0.1 compute
host 0000000000000002 5 b 10.1.0.2 compute
link 0000000000000001:1 0000000000000010:1 100
link 0000000000000002:1 0000000000000010:2 100
)"),
              FabricErrc::DuplicateLid);
}

TEST(ParseTopology, DuplicateGuidIsRejected) {
    EXPECT_EQ(parse_error(R"(
switch 0000000000000010 1 edge 8
host 0000000000000010 2 a 10.1.0.1 compute
)"),
              FabricErrc::DuplicateGuid);
}

TEST(ParseTopology, DanglingEndpointIsRejected) {
    EXPECT_EQ(parse_error(R"(
switch 0000000000000010 1 edge 8
host 0000000000000001 2 a 10.1.0.1 compute
link 0000000000000001:1 0000000000000099:1 100
)"),
              FabricErrc::DanglingLinkEndpoint);
}

TEST(ParseTopology, PortReuseIsRejected) {
    EXPECT_EQ(parse_error(R"(
switch 0000000000000010 1 edge 8
host 0000000000000001 2 a 10.1.0.1 compute
host 0000000000000002 3 b 10.1.0.2 compute
link 0000000000000001:1 0000000000000010:1 100
link 0000000000000002:1 0000000000000010:1 100
)"),
              FabricErrc::PortConflict);
}

TEST(ParseTopology, PortBeyondPortCountIsRejected) {
    EXPECT_EQ(parse_error(R"(
switch 0000000000000010 1 edge 1
host 0000000000000001 2 a 10.1.0.1 compute
link 0000000000000001:1 0000000000000010:2 100
)"),
              FabricErrc::PortConflict);
}

TEST(ParseTopology, MalformedLineReportsLineNumber) {
    try {
        parse_topology("switch 0000000000000010 1 edge 8\n\nswitch zz 2 edge 4\n");
        FAIL() << "expected MalformedLine";
    } catch (const FabricError& e) {
        EXPECT_EQ(e.code(), FabricErrc::MalformedLine);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    EXPECT_EQ(parse_error("bogus 1 2 3\n"), FabricErrc::MalformedLine);
    EXPECT_EQ(parse_error("host 01 2 a not-an-ip compute\n"), FabricErrc::MalformedLine);
    EXPECT_EQ(parse_error("switch 01 2 middle 4\n"), FabricErrc::MalformedLine);
}

TEST(ParseTopology, RoleInvariantsAreEnforced) {
    // Root switch with a host attached.
    EXPECT_EQ(parse_error(R"(
switch 0000000000000010 1 root 8
host 0000000000000001 2 a 10.1.0.1 compute
link 0000000000000001:1 0000000000000010:1 100
)"),
              FabricErrc::InvalidTopology);
    // Edge switch without hosts.
    EXPECT_EQ(parse_error("switch 0000000000000010 1 edge 8\n"), FabricErrc::InvalidTopology);
    // Host without a link.
    EXPECT_EQ(parse_error(R"(
switch 0000000000000010 1 edge 8
host 0000000000000001 2 a 10.1.0.1 compute
host 0000000000000002 3 b 10.1.0.2 compute
link 0000000000000001:1 0000000000000010:1 100
)"),
              FabricErrc::InvalidTopology);
}

TEST(ParseTopology, ReferenceFabricRoundTrips) {
    auto t = reference_fabric();
    auto text = serialize_topology(t);
    auto again = parse_topology(text);
    EXPECT_EQ(again, t);
    EXPECT_EQ(serialize_topology(again), text);
}

TEST(ParseTopology, FractionalCapacityRoundTrips) {
    auto t = parse_topology(R"(
switch 0000000000000010 1 edge 8
host 0000000000000001 2 a fe80::1 compute
link 0000000000000001:1 0000000000000010:1 12.5
)");
    EXPECT_EQ(t.links()[0].capacity_bps, 12'500'000'000ull);
    EXPECT_EQ(parse_topology(serialize_topology(t)), t);
    EXPECT_EQ(t.hosts()[0].ip.to_string(), "fe80::1");
}

// ---------------------------------------------------------------------------
// compute_routing
// ---------------------------------------------------------------------------

TEST(ComputeRouting, SingleEdgeRoutesDownHostLinks) {
    auto t = parse_topology(kMinimal);
    auto table = compute_routing(t);
    ASSERT_TRUE(table.complete());
    EXPECT_EQ(table.out_port(0, 0), 1);
    EXPECT_EQ(table.out_port(0, 1), 2);
}

TEST(ComputeRouting, CrossEdgePathsMatchBfsDistance) {
    auto t = reference_fabric();
    auto table = compute_routing(t);
    ASSERT_TRUE(table.complete());
    for (std::uint32_t s = 0; s < t.hosts().size(); ++s) {
        for (std::uint32_t d = 0; d < t.hosts().size(); ++d) {
            const DeviceRef src{DeviceType::Host, s};
            const DeviceRef dst{DeviceType::Host, d};
            auto path = route_path(t, table, t.lid_of(src), t.lid_of(dst));
            EXPECT_TRUE(path_is_contiguous(t, path, src, dst));
            if (s == d) {
                EXPECT_TRUE(path.empty());
                continue;
            }
            EXPECT_EQ(path.size(), bfs_distance(t, src, dst));
            if (t.edge_of(src) != t.edge_of(dst)) {
                EXPECT_EQ(path.size(), 4u);
            }
        }
    }
}

TEST(ComputeRouting, IsDeterministic) {
    auto a = reference_fabric();
    auto b = reference_fabric();
    EXPECT_EQ(serialize_routes(compute_routing(a), a), serialize_routes(compute_routing(b), b));
}

TEST(ComputeRouting, MissingRootLinkIsUnroutable) {
    auto text = read_text_file(testing::data_path("reference.topo"));
    // Drop the last link (edge 4 -> root 2).
    text = text.substr(0, text.rfind("link"));
    auto t = parse_topology(text);
    try {
        compute_routing(t);
        FAIL() << "expected UnroutableTopology";
    } catch (const FabricError& e) {
        EXPECT_EQ(e.code(), FabricErrc::UnroutableTopology);
    }
}

TEST(ComputeRouting, EdgesWithoutRootsAreUnroutable) {
    auto t = parse_topology(R"(
switch 0000000000000010 1 edge 8
switch 0000000000000011 2 edge 8
host 0000000000000001 3 a 10.1.0.1 compute
host 0000000000000002 4 b 10.1.0.2 compute
link 0000000000000001:1 0000000000000010:1 100
link 0000000000000002:1 0000000000000011:1 100
)");
    EXPECT_THROW(compute_routing(t), FabricError);
}

// ---------------------------------------------------------------------------
// route_path
// ---------------------------------------------------------------------------

TEST(RoutePath, SelfRouteIsEmpty) {
    auto t = reference_fabric();
    auto table = compute_routing(t);
    EXPECT_TRUE(route_path(t, table, Lid{5}, Lid{5}).empty());
}

TEST(RoutePath, SameEdgeSwitchTakesTwoLinks) {
    auto t = reference_fabric();
    auto table = compute_routing(t);
    auto path = route_path(t, table, Lid{5}, Lid{6});
    ASSERT_EQ(path.size(), 2u);
    EXPECT_EQ(path[0], (Hop{LinkId{0}, Direction::AtoB}));
    EXPECT_EQ(path[1], (Hop{LinkId{1}, Direction::BtoA}));
}

TEST(RoutePath, CrossEdgeMiddleHopUsesRootChosenByDestinationLid) {
    auto t = reference_fabric();
    auto table = compute_routing(t);
    // Roots ordered by LID: index 0 is LID 1, index 1 is LID 2.
    for (std::uint16_t dst : {7, 8}) {
        auto path = route_path(t, table, Lid{5}, Lid{dst});
        ASSERT_EQ(path.size(), 4u);
        auto root = t.far_end(path[1].link, path[1].dir);
        EXPECT_EQ(t.lid_of(root), Lid{static_cast<std::uint16_t>(1 + dst % 2)});
        EXPECT_EQ(t.near_end(path[2].link, path[2].dir), root);
    }
}

TEST(RoutePath, UnknownLidIsRejected) {
    auto t = reference_fabric();
    auto table = compute_routing(t);
    try {
        route_path(t, table, Lid{5}, Lid{99});
        FAIL();
    } catch (const FabricError& e) {
        EXPECT_EQ(e.code(), FabricErrc::UnknownLid);
    }
    // Switch LIDs are not route endpoints.
    EXPECT_THROW(route_path(t, table, Lid{1}, Lid{5}), FabricError);
}

TEST(RoutePath, LoopingOverridesAreDetected) {
    auto t = reference_fabric();
    auto table = compute_routing(t);
    // edge-3 sends LID 7 to root-1, root-1 sends it back to edge-3.
    apply_routes(table, t, "route 0008f10500000003 7 3\nroute 0008f10500000001 7 1\n");
    try {
        route_path(t, table, Lid{5}, Lid{7});
        FAIL();
    } catch (const FabricError& e) {
        EXPECT_EQ(e.code(), FabricErrc::RoutingLoop);
    }
}

TEST(RoutePath, OverridesChangeTheChosenRoot) {
    auto t = reference_fabric();
    auto table = compute_routing(t);
    apply_routes(table, t, "route 0008f10500000003 7 3   # via root LID 1\n");
    auto path = route_path(t, table, Lid{5}, Lid{7});
    ASSERT_EQ(path.size(), 4u);
    EXPECT_EQ(t.lid_of(t.far_end(path[1].link, path[1].dir)), Lid{1});
}

TEST(RoutePath, UnsetEntryIsAMissingRoute) {
    auto t = reference_fabric();
    auto table = RoutingTable::empty_for(t);
    EXPECT_FALSE(table.complete());
    try {
        route_path(t, table, Lid{5}, Lid{6});
        FAIL();
    } catch (const FabricError& e) {
        EXPECT_EQ(e.code(), FabricErrc::MissingRoute);
    }
}

TEST(RoutePath, RouteFileRejectsBadLines) {
    auto t = reference_fabric();
    auto table = compute_routing(t);
    EXPECT_THROW(apply_routes(table, t, "route 0002c90300000001 7 1\n"), FabricError);  // host, not switch
    EXPECT_THROW(apply_routes(table, t, "route 0008f10500000003 3 1\n"), FabricError);  // switch LID
    EXPECT_THROW(apply_routes(table, t, "route 0008f10500000003 7 9\n"), FabricError);  // unplugged port
    EXPECT_THROW(apply_routes(table, t, "route 0008f10500000003 7\n"), FabricError);
}

TEST(RoutePath, SerializedRoutesReloadIntoAnIdenticalTable) {
    auto t = reference_fabric();
    auto table = compute_routing(t);
    auto reloaded = RoutingTable::empty_for(t);
    apply_routes(reloaded, t, serialize_routes(table, t));
    EXPECT_EQ(reloaded, table);
}

TEST(RoutePath, ReversePathVisitsSameEdgeSwitches) {
    auto t = reference_fabric();
    auto table = compute_routing(t);
    auto edges_along = [&](const Path& path) {
        std::vector<DeviceRef> out;
        for (const auto& hop : path) {
            auto d = t.far_end(hop.link, hop.dir);
            if (d.type == DeviceType::Switch && t.switch_at(d).kind == SwitchKind::Edge) {
                out.push_back(d);
            }
        }
        return out;
    };
    for (auto a : host_lids(t)) {
        for (auto b : host_lids(t)) {
            auto forward = edges_along(route_path(t, table, a, b));
            auto backward = edges_along(route_path(t, table, b, a));
            std::reverse(backward.begin(), backward.end());
            EXPECT_EQ(forward, backward);
        }
    }
}

// ---------------------------------------------------------------------------
// views
// ---------------------------------------------------------------------------

TEST(JobSubgraph, SingleNodeJob) {
    auto t = reference_fabric();
    auto table = compute_routing(t);
    std::vector<Guid> nodes{t.hosts()[0].guid};
    auto view = job_subgraph(t, table, nodes);
    EXPECT_EQ(view.devices.size(), 2u);
    EXPECT_EQ(view.links, std::vector<LinkId>{LinkId{0}});
}

TEST(JobSubgraph, AllHostsCoverTheWholeFabric) {
    auto t = reference_fabric();
    auto table = compute_routing(t);
    std::vector<Guid> nodes;
    for (const auto& h : t.hosts()) {
        nodes.push_back(h.guid);
    }
    auto view = job_subgraph(t, table, nodes);

    // Oracle: union of all pairwise routed paths.
    std::set<LinkId> links;
    for (auto a : host_lids(t)) {
        for (auto b : host_lids(t)) {
            for (const auto& hop : route_path(t, table, a, b)) {
                links.insert(hop.link);
            }
        }
    }
    EXPECT_EQ(view.links, std::vector<LinkId>(links.begin(), links.end()));
    EXPECT_EQ(view, full_view(t));
}

TEST(JobSubgraph, SameEdgeJobNeverAscends) {
    auto t = reference_fabric();
    auto table = compute_routing(t);
    std::vector<Guid> nodes{t.hosts()[0].guid, t.hosts()[1].guid};
    auto view = job_subgraph(t, table, nodes);
    for (auto d : view.devices) {
        if (d.type == DeviceType::Switch) {
            EXPECT_EQ(t.switch_at(d).kind, SwitchKind::Edge);
        }
    }
    EXPECT_EQ(view.links.size(), 2u);
}

TEST(JobSubgraph, UnknownGuidIsRejected) {
    auto t = reference_fabric();
    auto table = compute_routing(t);
    std::vector<Guid> nodes{Guid{0xdead}};
    EXPECT_THROW(job_subgraph(t, table, nodes), FabricError);
    std::vector<Guid> switch_node{t.switches()[0].guid};
    EXPECT_THROW(job_subgraph(t, table, switch_node), FabricError);
}

TEST(ClusterView, NoHostsLeavesViewUnchanged) {
    auto t = parse_topology(R"(
switch 0000000000000010 1 root 4
switch 0000000000000011 2 root 4
link 0000000000000010:1 0000000000000011:1 200
)");
    EXPECT_EQ(cluster_compute_view(t), full_view(t));
}

TEST(ClusterView, ReferenceFabricHasTwoGroupsOfTwo) {
    auto t = reference_fabric();
    auto view = cluster_compute_view(t);
    ASSERT_EQ(view.groups.size(), 2u);
    for (const auto& g : view.groups) {
        EXPECT_EQ(g.members.size(), 2u);
        for (auto m : g.members) {
            EXPECT_EQ(t.edge_of(m), g.edge_switch);
        }
    }
    EXPECT_EQ(view.devices.size(), 4u);
    EXPECT_EQ(view.links.size(), t.links().size());
}

TEST(ClusterView, StorageHostsStayIndividual) {
    auto t = parse_topology(kMinimal);
    auto view = cluster_compute_view(t);
    ASSERT_EQ(view.groups.size(), 1u);
    EXPECT_EQ(view.groups[0].members.size(), 1u);
    EXPECT_EQ(view.devices.size(), 2u);  // switch + storage host
}

}  // namespace
}  // namespace fabric_lens::fabric
