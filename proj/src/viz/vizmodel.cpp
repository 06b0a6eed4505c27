// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/viz/vizmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace fabric_lens::viz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr std::array<ColorBand, 5> kBands = {{
    {Band::Idle, "idle", "#9e9e9e", 0.0, 0.0},
    {Band::Low, "low", "#a5d6a7", 0.0, 0.25},
    {Band::Optimal, "optimal", "#2e7d32", 0.25, 0.50},
    {Band::Elevated, "elevated", "#f9a825", 0.50, 0.75},
    {Band::Congested, "congested", "#c62828", 0.75, kInf},
}};

}  // namespace

std::span<const ColorBand> color_bands() { return kBands; }

const ColorBand& color_band(double fraction) {
    if (!(fraction > 0.0)) {
        return kBands[0];
    }
    for (std::size_t i = 1; i < kBands.size(); ++i) {
        if (fraction <= kBands[i].upper) {
            return kBands[i];
        }
    }
    return kBands.back();
}

double utilization_fraction(std::uint64_t bytes_a_to_b, std::uint64_t bytes_b_to_a, std::uint64_t capacity_bps,
                            double interval_seconds) {
    if (capacity_bps == 0 || !(interval_seconds > 0.0)) {
        throw VizError(VizErrc::InvalidArgument, "capacity and interval must be positive");
    }
    const double cap = static_cast<double>(capacity_bps) / 8.0 * interval_seconds;
    return static_cast<double>(std::max(bytes_a_to_b, bytes_b_to_a)) / cap;
}

double aggregate_utilization(std::span<const LinkLoad> links, double interval_seconds) {
    if (links.empty() || !(interval_seconds > 0.0)) {
        throw VizError(VizErrc::InvalidArgument, "aggregate needs at least one link and a positive interval");
    }
    double bytes = 0.0;
    double cap = 0.0;
    for (const auto& l : links) {
        if (l.capacity_bps == 0) {
            throw VizError(VizErrc::InvalidArgument, "link capacity must be positive");
        }
        bytes += static_cast<double>(std::max(l.bytes_a_to_b, l.bytes_b_to_a));
        cap += static_cast<double>(l.capacity_bps) / 8.0 * interval_seconds;
    }
    return bytes / cap;
}

Point fan_control_point(Point a, Point b, std::uint32_t n, std::uint32_t k) {
    if (k < 1 || k > n) {
        throw VizError(VizErrc::InvalidArgument, "link index " + std::to_string(k) + " outside 1.." + std::to_string(n));
    }
    if (n == 1) {
        throw VizError(VizErrc::StraightLine, "a single link has no control point");
    }
    const double kd = k;
    const double nd = n;
    return {a.x + kd * (b.x - a.x) / nd, b.y + kd * (a.y - b.y) / nd};
}

std::vector<double> radar_axis_angles(std::size_t count) {
    if (count < 3) {
        throw VizError(VizErrc::InvalidArgument, "radar needs at least 3 axes");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(-std::numbers::pi / 2 + 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count));
    }
    return out;
}

}  // namespace fabric_lens::viz
