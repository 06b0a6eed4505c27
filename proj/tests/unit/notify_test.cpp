// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "fabric_lens/correlate/analysis.hpp"
#include "fabric_lens/notify/rules.hpp"
#include "test_support.hpp"

using namespace fabric_lens;
using namespace fabric_lens::notify;

namespace {

struct Fixture {
    fabric::FabricTopology topology = fabric_lens::testing::reference_fabric();
    fabric::RoutingTable routing = fabric::compute_routing(topology);
    std::vector<correlate::LinkBreakdown> links;

    Fixture() {
        links.resize(topology.links().size());
        for (std::uint32_t i = 0; i < links.size(); ++i) {
            links[i].link = LinkId{i};
        }
    }

    IntervalData data(IntervalIndex interval) const {
        IntervalData d;
        d.interval = interval;
        d.timestamp_ns = static_cast<std::uint64_t>(interval) * 1'000'000'000ull;
        d.interval_seconds = 1.0;
        d.links = links;
        return d;
    }

    std::uint64_t cap_bytes(std::uint32_t link) const {
        return static_cast<std::uint64_t>(topology.link(LinkId{link}).capacity_bytes(1.0));
    }
};

Rule rule(Metric m, Comparator c, double threshold, Scope scope = {}, std::uint64_t id = 1) {
    Rule r;
    r.id = id;
    r.metric = m;
    r.comparator = c;
    r.threshold = threshold;
    r.scope = std::move(scope);
    return r;
}

}  // namespace

TEST(Comparator, TruthTable) {
    struct Case {
        Comparator c;
        double value, threshold;
        bool integral, want;
    };
    const std::vector<Case> cases = {
        {Comparator::Exceeds, 11, 10, true, true},      {Comparator::Exceeds, 10, 10, true, false},
        {Comparator::Exceeds, 9, 10, true, false},      {Comparator::DropsBelow, 9, 10, true, true},
        {Comparator::DropsBelow, 10, 10, true, false},  {Comparator::DropsBelow, 11, 10, true, false},
        {Comparator::Equals, 10, 10, true, true},       {Comparator::Equals, 11, 10, true, false},
        {Comparator::Equals, 10, 10.5, true, false},    {Comparator::Equals, 0.5 + 5e-10, 0.5, false, true},
        {Comparator::Equals, 0.5 + 2e-9, 0.5, false, false}, {Comparator::Exceeds, 0.75, 0.75, false, false},
    };
    for (const auto& k : cases) {
        EXPECT_EQ(compare(k.c, k.value, k.threshold, k.integral), k.want)
            << to_string(k.c) << " " << k.value << " " << k.threshold;
    }
}

TEST(Evaluate, XmtDiscardStreamFiresOnceAtSecondInterval) {
    Fixture f;
    const auto& host_link = f.topology.links()[0];
    std::vector<Rule> rules{rule(Metric::XmtDiscards, Comparator::Exceeds, 10)};
    RuleEngine engine(f.topology, f.routing);
    std::vector<store::Event> all;
    std::uint64_t samples[] = {5, 15};
    for (int i = 0; i < 2; ++i) {
        auto d = f.data(i);
        wire::PortErrorSample s;
        s.device = host_link.end_a.device;
        s.port = host_link.end_a.port;
        s.xmt_discards = samples[i];
        d.errors[host_link.end_a] = s;
        for (auto& e : engine.evaluate(d, rules)) {
            all.push_back(e);
        }
    }
    ASSERT_EQ(all.size(), 1u);
    EXPECT_EQ(all[0].interval, 1);
    EXPECT_EQ(all[0].subject, (store::Subject{store::SubjectKind::Link, 0}));
    EXPECT_EQ(all[0].values, std::vector<double>{15});
}

TEST(Evaluate, ComparatorsOnCounterStreams) {
    Fixture f;
    const auto& link = f.topology.links()[2];
    const std::vector<std::uint64_t> stream = {0, 3, 7, 7, 12};
    auto fire_pattern = [&](Comparator c, double threshold) {
        std::vector<IntervalIndex> hits;
        std::vector<Rule> rules{rule(Metric::RcvErrors, c, threshold, Scope{Scope::Kind::Links, {LinkId{2}}, 0})};
        for (std::size_t i = 0; i < stream.size(); ++i) {
            auto d = f.data(static_cast<IntervalIndex>(i));
            wire::PortErrorSample s;
            s.rcv_errors = stream[i];
            d.errors[link.end_b] = s;
            for (const auto& e : evaluate_interval(f.topology, f.routing, d, rules)) {
                hits.push_back(e.interval);
            }
        }
        return hits;
    };
    EXPECT_EQ(fire_pattern(Comparator::Exceeds, 7), (std::vector<IntervalIndex>{4}));
    EXPECT_EQ(fire_pattern(Comparator::DropsBelow, 7), (std::vector<IntervalIndex>{0, 1}));
    EXPECT_EQ(fire_pattern(Comparator::Equals, 7), (std::vector<IntervalIndex>{2, 3}));
    EXPECT_EQ(fire_pattern(Comparator::Equals, 7.5), (std::vector<IntervalIndex>{}));
}

TEST(Evaluate, CoexistFiresOncePerSharedLink) {
    Fixture f;
    const std::uint32_t root_link = 4;
    auto& d = f.links[root_link].dir[0];
    d.mpi = static_cast<std::uint64_t>(0.3 * f.cap_bytes(root_link));
    d.io = static_cast<std::uint64_t>(0.3 * f.cap_bytes(root_link));
    d.total = d.unicast = d.mpi + d.io;
    d.per_job[1].mpi = d.mpi;
    d.per_job[2].io = d.io;
    std::vector<Rule> rules{rule(Metric::MpiLustreCoexist, Comparator::Exceeds, 0.25)};
    auto events = evaluate_interval(f.topology, f.routing, f.data(7), rules);
    ASSERT_EQ(events.size(), 1u);
    EXPECT_EQ(events[0].subject.id, root_link);
    EXPECT_EQ(events[0].jobs, (std::vector<JobId>{1, 2}));
    EXPECT_NEAR(events[0].values[0], 0.3, 1e-9);
    EXPECT_NEAR(events[0].values[1], 0.3, 1e-9);
    EXPECT_NE(events[0].detail.find("link 4"), std::string::npos);

    // Below threshold on one class: nothing.
    d.io = static_cast<std::uint64_t>(0.2 * f.cap_bytes(root_link));
    EXPECT_TRUE(evaluate_interval(f.topology, f.routing, f.data(7), rules).empty());
}

TEST(Evaluate, NoRulesNoEvents) {
    Fixture f;
    f.links[0].dir[0].total = f.cap_bytes(0);
    EXPECT_TRUE(evaluate_interval(f.topology, f.routing, f.data(0), {}).empty());
}

TEST(Evaluate, IdempotentPerRuleSubjectInterval) {
    Fixture f;
    f.links[3].dir[1].total = f.cap_bytes(3);
    std::vector<Rule> rules{rule(Metric::LinkUtilization, Comparator::Exceeds, 0.75),
                            rule(Metric::LinkUtilization, Comparator::Exceeds, 0.5, {}, 2)};
    RuleEngine engine(f.topology, f.routing);
    auto first = engine.evaluate(f.data(3), rules);
    auto again = engine.evaluate(f.data(3), rules);
    ASSERT_EQ(first.size(), 2u);
    EXPECT_EQ(first, again);
    EXPECT_NE(first[0].id, first[1].id);
    // A duplicated rule entry does not duplicate its event.
    std::vector<Rule> twice{rules[0], rules[0]};
    EXPECT_EQ(engine.evaluate(f.data(3), twice).size(), 1u);
}

TEST(Evaluate, BytesMetricsArePerDevicePerInterval) {
    Fixture f;
    auto d = f.data(0);
    const auto node = f.topology.hosts()[0].guid;
    correlate::DeviceMetrics m;
    m.total_sent = 5000;
    m.total_recv = 100;
    d.devices[node] = m;
    std::vector<Rule> rules{rule(Metric::BytesSent, Comparator::Exceeds, 4096),
                            rule(Metric::BytesReceived, Comparator::Exceeds, 4096, {}, 2)};
    auto events = evaluate_interval(f.topology, f.routing, d, rules);
    ASSERT_EQ(events.size(), 1u);
    EXPECT_EQ(events[0].subject, (store::Subject{store::SubjectKind::Device, node.value}));
}

TEST(Evaluate, JobScopedCoexistUsesJobSubgraph) {
    Fixture f;
    auto d = f.data(0);
    const auto n1 = f.topology.hosts()[0].guid;
    const auto n2 = f.topology.hosts()[1].guid;  // same edge switch
    d.job_nodes[9] = {n1, n2};
    for (auto l : {0u, 1u, 4u}) {
        auto& dir = f.links[l].dir[0];
        dir.mpi = dir.io = f.cap_bytes(l) / 2;
        dir.total = dir.mpi + dir.io;
    }
    d.links = f.links;
    Scope scope{Scope::Kind::Job, {}, 9};
    std::vector<Rule> rules{rule(Metric::MpiLustreCoexist, Comparator::Exceeds, 0.25, scope)};
    auto events = evaluate_interval(f.topology, f.routing, d, rules);
    std::vector<std::uint64_t> subjects;
    for (const auto& e : events) {
        subjects.push_back(e.subject.id);
    }
    EXPECT_EQ(subjects, (std::vector<std::uint64_t>{0, 1}));
    d.job_nodes.clear();
    EXPECT_TRUE(evaluate_interval(f.topology, f.routing, d, rules).empty());
}

TEST(Evaluate, PeriodSkipsIntervals) {
    Fixture f;
    f.links[0].dir[0].total = f.cap_bytes(0);
    auto r = rule(Metric::LinkUtilization, Comparator::Exceeds, 0.5);
    r.period = 3;
    std::vector<Rule> rules{r};
    std::vector<IntervalIndex> hits;
    for (IntervalIndex i = 0; i < 7; ++i) {
        if (!evaluate_interval(f.topology, f.routing, f.data(i), rules).empty()) {
            hits.push_back(i);
        }
    }
    EXPECT_EQ(hits, (std::vector<IntervalIndex>{0, 3, 6}));
}

// Every shared-link report between an MPI job and an IO job implies a
// coexist event on that link at the same threshold.
TEST(Evaluate, CoexistCoversSharedLinkReports) {
    Fixture f;
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> frac(0.0, 0.6);
    for (int trial = 0; trial < 300; ++trial) {
        for (auto& b : f.links) {
            b.dir = {};
        }
        const std::uint32_t link = static_cast<std::uint32_t>(rng() % f.links.size());
        const auto cap = f.cap_bytes(link);
        for (auto& dir : f.links[link].dir) {
            dir.per_job[1].mpi = static_cast<std::uint64_t>(frac(rng) * static_cast<double>(cap));
            dir.per_job[2].io = static_cast<std::uint64_t>(frac(rng) * static_cast<double>(cap));
            dir.mpi = dir.per_job[1].mpi;
            dir.io = dir.per_job[2].io;
            dir.total = dir.mpi + dir.io;
        }
        const double threshold = 0.05 + 0.4 * (static_cast<double>(rng() % 1000) / 1000.0) + 1e-7;
        auto reports = correlate::shared_links(f.topology, f.links, threshold, 1.0);
        std::vector<Rule> rules{rule(Metric::MpiLustreCoexist, Comparator::Exceeds, threshold)};
        auto events = evaluate_interval(f.topology, f.routing, f.data(0), rules);
        for (const auto& r : reports) {
            ASSERT_EQ(r.jobs.size(), 2u);
            EXPECT_TRUE(std::any_of(events.begin(), events.end(),
                                    [&](const auto& e) { return e.subject.id == r.link.value; }))
                << "trial " << trial;
        }
    }
}

TEST(Rules, ParseFormatRoundTrip) {
    const char* lines[] = {"rule LinkUtilization exceeds 0.75 all", "rule MpiLustreCoexist exceeds 0.25 job:42",
                           "rule XmtDiscards equals 3 links:1,5,9 4", "rule BytesSent drops_below 1048576 all"};
    for (const char* line : lines) {
        auto r = parse_rule_line(line);
        EXPECT_EQ(format_rule(r), line);
        EXPECT_EQ(parse_rule_line(format_rule(r)), r);
    }
    auto r = parse_rule_line("rule XmtDiscards equals 3 links:1,5,9 4");
    EXPECT_EQ(r.scope.links, (std::set<LinkId>{LinkId{1}, LinkId{5}, LinkId{9}}));
    EXPECT_EQ(r.period, 4u);
}

TEST(Rules, Errors) {
    auto code_of = [](const char* line) {
        try {
            parse_rule_line(line);
        } catch (const NotifyError& e) {
            return e.code();
        }
        return NotifyErrc::UnknownRule;
    };
    EXPECT_EQ(code_of("rule LinkUtilization exceeds -0.1 all"), NotifyErrc::InvalidThreshold);
    EXPECT_EQ(code_of("rule LinkUtilization exceeds nan all"), NotifyErrc::InvalidThreshold);
    EXPECT_EQ(code_of("rule LinkUtilization exceeds x all"), NotifyErrc::InvalidThreshold);
    EXPECT_EQ(code_of("rule LinkUtilization exceeds 0.5 switches"), NotifyErrc::UnknownScope);
    EXPECT_EQ(code_of("rule LinkUtilization exceeds 0.5 links:"), NotifyErrc::UnknownScope);
    EXPECT_EQ(code_of("rule LinkUtilization exceeds 0.5 job:x"), NotifyErrc::UnknownScope);
    EXPECT_EQ(code_of("rule Latency exceeds 0.5 all"), NotifyErrc::InvalidRule);
    EXPECT_EQ(code_of("rule MpiLustreCoexist equals 0.5 all"), NotifyErrc::InvalidRule);
    EXPECT_EQ(code_of("rule LinkUtilization exceeds 0.5 all 0"), NotifyErrc::InvalidRule);
    EXPECT_EQ(code_of("alert LinkUtilization exceeds 0.5 all"), NotifyErrc::InvalidRule);

    Rule r = rule(Metric::LinkUtilization, Comparator::Exceeds, 0.75, Scope{Scope::Kind::Links, {LinkId{8}}, 0});
    EXPECT_THROW(validate_rule(r, 8), NotifyError);
    EXPECT_NO_THROW(validate_rule(r, 9));

    auto file = parse_rules_file("# bootstrap\nrule LinkUtilization exceeds 0.75 all\n\nrule MpiLustreCoexist exceeds 0.25 all\n");
    ASSERT_EQ(file.size(), 2u);
    EXPECT_EQ(file[1].id, 2u);
    try {
        parse_rules_file("rule LinkUtilization exceeds 0.75 all\nrule Bogus exceeds 1 all\n");
        FAIL();
    } catch (const NotifyError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(RuleBookTest, UpsertRemoveAndPersist) {
    fabric_lens::testing::TempDir dir;
    store::StoreOptions o;
    o.sync = false;
    {
        auto s = store::Store::open(dir.path(), {}, 1000, o);
        RuleBook book(8, s.get());
        auto a = book.upsert(rule(Metric::LinkUtilization, Comparator::Exceeds, 0.75, {}, 0));
        auto b = book.upsert(rule(Metric::MpiLustreCoexist, Comparator::Exceeds, 0.25, {Scope::Kind::Job, {}, 3}, 0));
        EXPECT_EQ(a, 1u);
        EXPECT_EQ(b, 2u);
        auto changed = rule(Metric::LinkUtilization, Comparator::Exceeds, 0.9, {}, a);
        book.upsert(changed);
        book.remove(b);
        EXPECT_THROW(book.remove(b), NotifyError);
        EXPECT_THROW(book.upsert(rule(Metric::LinkUtilization, Comparator::Exceeds, -1, {}, 0)), NotifyError);
        EXPECT_EQ(book.snapshot().size(), 1u);
    }
    auto s = store::Store::open(dir.path(), {}, 1000, o);
    RuleBook book(8, s.get());
    auto rules = book.snapshot();
    ASSERT_EQ(rules.size(), 1u);
    EXPECT_EQ(rules[0].id, 1u);
    EXPECT_EQ(rules[0].threshold, 0.9);
    EXPECT_EQ(book.upsert(rule(Metric::RcvErrors, Comparator::Exceeds, 1, {}, 0)), 3u);
}

TEST(RuleBookTest, DeletedRuleStopsFiring) {
    Fixture f;
    f.links[0].dir[0].total = f.cap_bytes(0);
    RuleBook book;
    auto id = book.upsert(rule(Metric::LinkUtilization, Comparator::Exceeds, 0.5, {}, 0));
    RuleEngine engine(f.topology, f.routing);
    EXPECT_EQ(engine.evaluate(f.data(0), book.snapshot()).size(), 1u);
    book.remove(id);
    for (IntervalIndex i = 1; i < 5; ++i) {
        EXPECT_TRUE(engine.evaluate(f.data(i), book.snapshot()).empty());
    }
}
