// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "fabric_lens/viz/vizmodel.hpp"

using namespace fabric_lens::viz;

TEST(ColorBandTest, BoundaryCases) {
    EXPECT_EQ(color_band(0.0).band, Band::Idle);
    EXPECT_EQ(color_band(1e-12).band, Band::Low);
    EXPECT_EQ(color_band(0.25).band, Band::Low);
    EXPECT_EQ(color_band(0.2500001).band, Band::Optimal);
    EXPECT_EQ(color_band(0.5).band, Band::Optimal);
    EXPECT_EQ(color_band(0.6).band, Band::Elevated);
    EXPECT_EQ(color_band(0.75).band, Band::Elevated);
    EXPECT_EQ(color_band(0.76).band, Band::Congested);
    EXPECT_EQ(color_band(0.8).band, Band::Congested);
    EXPECT_EQ(color_band(3.0).band, Band::Congested);
}

TEST(ColorBandTest, NamesAndColours) {
    EXPECT_EQ(color_band(0).color, "#9e9e9e");
    EXPECT_EQ(color_band(0.1).color, "#a5d6a7");
    EXPECT_EQ(color_band(0.3).color, "#2e7d32");
    EXPECT_EQ(color_band(0.6).color, "#f9a825");
    EXPECT_EQ(color_band(0.9).color, "#c62828");
    EXPECT_EQ(color_band(0.9).name, "congested");
    EXPECT_EQ(color_bands().size(), 5u);
}

TEST(ColorBandTest, TotalAndMonotone) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int i = 0; i < 10000; ++i) {
        double a = u(rng), b = u(rng);
        if (a > b) {
            std::swap(a, b);
        }
        EXPECT_LE(static_cast<int>(color_band(a).band), static_cast<int>(color_band(b).band));
    }
}

TEST(Utilization, Examples) {
    EXPECT_EQ(utilization_fraction(0, 0, 100'000'000'000ull, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(utilization_fraction(6'250'000'000ull, 0, 100'000'000'000ull, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(utilization_fraction(2'500'000'000ull, 8'750'000'000ull, 100'000'000'000ull, 1.0), 0.7);
    EXPECT_GT(utilization_fraction(20'000'000'000ull, 0, 100'000'000'000ull, 1.0), 1.0);
    EXPECT_THROW(utilization_fraction(1, 1, 0, 1.0), VizError);
}

TEST(Utilization, AggregateExamples) {
    const std::uint64_t cap = 100'000'000'000ull;
    std::vector<LinkLoad> one{{1'000'000'000ull, 3'000'000'000ull, cap}};
    EXPECT_DOUBLE_EQ(aggregate_utilization(one, 1.0), utilization_fraction(1'000'000'000ull, 3'000'000'000ull, cap, 1.0));
    std::vector<LinkLoad> pair{{2'500'000'000ull, 0, cap}, {10'000'000'000ull, 0, cap}};
    EXPECT_DOUBLE_EQ(aggregate_utilization(pair, 1.0), 0.5);
    std::vector<LinkLoad> weighted{{12'500'000'000ull, 0, cap}, {0, 0, 2 * cap}};
    EXPECT_NEAR(aggregate_utilization(weighted, 1.0), 1.0 / 3.0, 1e-15);
    EXPECT_THROW(aggregate_utilization({}, 1.0), VizError);
}

TEST(Utilization, AggregateWithinMemberRangeForEqualCapacities) {
    std::mt19937_64 rng(8);
    const std::uint64_t cap = 200'000'000'000ull;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<LinkLoad> links(1 + rng() % 6);
        double lo = 1e9, hi = -1;
        for (auto& l : links) {
            l = {rng() % 30'000'000'000ull, rng() % 30'000'000'000ull, cap};
            double f = utilization_fraction(l.bytes_a_to_b, l.bytes_b_to_a, cap, 1.0);
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
        double agg = aggregate_utilization(links, 1.0);
        EXPECT_GE(agg, lo - 1e-12);
        EXPECT_LE(agg, hi + 1e-12);
    }
}

TEST(FanCurve, Examples) {
    EXPECT_EQ(fan_control_point({0, 0}, {10, 10}, 2, 1), (Point{5, 5}));
    EXPECT_EQ(fan_control_point({0, 0}, {10, 10}, 2, 2), (Point{10, 0}));
    for (std::uint32_t k = 1; k <= 4; ++k) {
        EXPECT_EQ(fan_control_point({3, 7}, {3, 7}, 4, k), (Point{3, 7}));
    }
    try {
        fan_control_point({0, 0}, {1, 1}, 1, 1);
        FAIL();
    } catch (const VizError& e) {
        EXPECT_EQ(e.code(), VizErrc::StraightLine);
    }
    EXPECT_THROW(fan_control_point({0, 0}, {1, 1}, 3, 0), VizError);
    EXPECT_THROW(fan_control_point({0, 0}, {1, 1}, 3, 4), VizError);
}

// Independent re-evaluation: the control point is the k/n interpolation
// between (x1, y2) and (x2, y1).
TEST(FanCurve, GridAgainstInterpolation) {
    const std::vector<std::pair<Point, Point>> ends = {
        {{0, 0}, {10, 10}}, {{-4, 2}, {6, -8}}, {{100, 50}, {20, 300}}, {{1.5, 2.5}, {-3.25, 7.75}}};
    int cases = 0;
    for (const auto& [a, b] : ends) {
        for (std::uint32_t n : {2u, 3u}) {
            for (std::uint32_t k = 1; k <= n && cases < 20; ++k) {
                const double t = static_cast<double>(k) / n;
                const Point start{a.x, b.y};
                const Point end{b.x, a.y};
                const Point want{start.x + t * (end.x - start.x), start.y + t * (end.y - start.y)};
                const auto got = fan_control_point(a, b, n, k);
                EXPECT_NEAR(got.x, want.x, 1e-9);
                EXPECT_NEAR(got.y, want.y, 1e-9);
                ++cases;
            }
        }
    }
    EXPECT_EQ(cases, 20);
}

TEST(FanCurve, DistinctPointsForNonDegenerateEnds) {
    for (std::uint32_t n = 2; n <= 8; ++n) {
        std::set<std::pair<double, double>> seen;
        for (std::uint32_t k = 1; k <= n; ++k) {
            auto p = fan_control_point({0, 0}, {7, 3}, n, k);
            seen.insert({p.x, p.y});
        }
        EXPECT_EQ(seen.size(), n);
    }
}

TEST(RadarAxes, Angles) {
    auto eight = radar_axis_angles(8);
    ASSERT_EQ(eight.size(), 8u);
    EXPECT_DOUBLE_EQ(eight[0], -std::numbers::pi / 2);
    for (std::size_t i = 1; i < 8; ++i) {
        EXPECT_NEAR(eight[i] - eight[i - 1], std::numbers::pi / 4, 1e-12);
    }
    auto four = radar_axis_angles(4);
    EXPECT_NEAR(four[0], -std::numbers::pi / 2, 1e-12);
    EXPECT_NEAR(four[1], 0.0, 1e-12);
    EXPECT_NEAR(four[2], std::numbers::pi / 2, 1e-12);
    EXPECT_NEAR(four[3], std::numbers::pi, 1e-12);
    EXPECT_THROW(radar_axis_angles(2), VizError);
}
