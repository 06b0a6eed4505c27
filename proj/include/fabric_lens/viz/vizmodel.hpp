// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fabric_lens/common/error.hpp"

namespace fabric_lens::viz {

enum class VizErrc { StraightLine, InvalidArgument };
using VizError = CodedError<VizErrc>;

enum class Band : std::uint8_t { Idle, Low, Optimal, Elevated, Congested };

struct ColorBand {
    Band band = Band::Idle;
    std::string_view name;
    std::string_view color;  // #rrggbb
    double lower = 0.0;      // exclusive, except idle which is exactly 0
    double upper = 0.0;      // inclusive; infinity for congested
};

// idle {0}, low (0, .25], optimal (.25, .5], elevated (.5, .75], congested (.75, inf).
const ColorBand& color_band(double fraction);
std::span<const ColorBand> color_bands();

// max over the two directions of bytes / (capacity/8 * seconds). Not clamped.
double utilization_fraction(std::uint64_t bytes_a_to_b, std::uint64_t bytes_b_to_a, std::uint64_t capacity_bps,
                            double interval_seconds);

struct LinkLoad {
    std::uint64_t bytes_a_to_b = 0;
    std::uint64_t bytes_b_to_a = 0;
    std::uint64_t capacity_bps = 0;
};

// (sum of per-link direction maxima) / (sum of capacity bytes per interval).
double aggregate_utilization(std::span<const LinkLoad> links, double interval_seconds);

struct Point {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

// Middle spline point for link k of n parallel links between A and B:
// (x1 + k(x2 - x1)/n, y2 + k(y1 - y2)/n). Needs 1 <= k <= n; n = 1 throws
// StraightLine since a lone link is drawn straight.
Point fan_control_point(Point a, Point b, std::uint32_t n, std::uint32_t k);

// Axis i at -pi/2 + 2*pi*i/count: first axis at 12 o'clock, then clockwise
// in screen coordinates. Needs count >= 3.
std::vector<double> radar_axis_angles(std::size_t count);

}  // namespace fabric_lens::viz
