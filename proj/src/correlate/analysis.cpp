// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/correlate/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace fabric_lens::correlate {

DeviceMetrics& DeviceMetrics::operator+=(const DeviceMetrics& o) {
    unicast_sent += o.unicast_sent;
    unicast_recv += o.unicast_recv;
    multicast_sent += o.multicast_sent;
    multicast_recv += o.multicast_recv;
    mpi_sent += o.mpi_sent;
    mpi_recv += o.mpi_recv;
    io_sent += o.io_sent;
    io_recv += o.io_recv;
    total_sent += o.total_sent;
    total_recv += o.total_recv;
    return *this;
}

DeviceMetrics device_metrics(const fabric::FabricTopology& topology, std::span<const LinkBreakdown> links,
                             fabric::DeviceRef device) {
    DeviceMetrics m;
    for (const auto& att : topology.attachments(device)) {
        if (att.link.value >= links.size()) {
            continue;
        }
        const auto& out = links[att.link.value].dir[index_of(att.outbound)];
        const auto& in = links[att.link.value].dir[index_of(reverse(att.outbound))];
        m.unicast_sent += out.unicast;
        m.multicast_sent += out.multicast;
        m.mpi_sent += out.mpi;
        m.io_sent += out.io;
        m.total_sent += out.total;
        m.unicast_recv += in.unicast;
        m.multicast_recv += in.multicast;
        m.mpi_recv += in.mpi;
        m.io_recv += in.io;
        m.total_recv += in.total;
    }
    return m;
}

std::vector<std::uint64_t> attached_capacities(const fabric::FabricTopology& topology, fabric::DeviceRef device) {
    std::vector<std::uint64_t> out;
    for (const auto& att : topology.attachments(device)) {
        out.push_back(topology.link(att.link).capacity_bps);
    }
    return out;
}

namespace {

double ratio(std::uint64_t num, double den) { return den > 0.0 ? static_cast<double>(num) / den : 0.0; }

}  // namespace

std::array<double, kRadarAxes> radar_raw(const DeviceMetrics& m, std::span<const std::uint64_t> link_capacities_bps,
                                         double interval_seconds, RadarMode mode) {
    double sent_den = 0.0;
    double recv_den = 0.0;
    if (mode == RadarMode::Absolute) {
        double bytes_per_s = 0.0;
        for (auto c : link_capacities_bps) {
            bytes_per_s += static_cast<double>(c) / 8.0;
        }
        sent_den = recv_den = bytes_per_s * interval_seconds;
    } else {
        sent_den = static_cast<double>(m.total_sent);
        recv_den = static_cast<double>(m.total_recv);
    }
    return {ratio(m.unicast_sent, sent_den),   ratio(m.unicast_recv, recv_den), ratio(m.multicast_sent, sent_den),
            ratio(m.multicast_recv, recv_den), ratio(m.mpi_sent, sent_den),     ratio(m.mpi_recv, recv_den),
            ratio(m.io_sent, sent_den),        ratio(m.io_recv, recv_den)};
}

RadarVector radar_values(const DeviceMetrics& metrics, std::span<const std::uint64_t> link_capacities_bps,
                         double interval_seconds, RadarMode mode) {
    RadarVector v;
    v.mode = mode;
    if (!(interval_seconds > 0.0)) {
        return v;
    }
    v.values = radar_raw(metrics, link_capacities_bps, interval_seconds, mode);
    for (auto& x : v.values) {
        x = std::clamp(x, 0.0, 1.0);
    }
    return v;
}

std::vector<SharedLinkReport> shared_links(const fabric::FabricTopology& topology,
                                           std::span<const LinkBreakdown> breakdowns, double min_fraction_per_job,
                                           double interval_seconds) {
    if (!(min_fraction_per_job > 0.0 && min_fraction_per_job <= 1.0) || !(interval_seconds > 0.0)) {
        throw CorrelateError(CorrelateErrc::InvalidArgument, "min fraction must be in (0, 1], seconds > 0");
    }
    std::vector<const LinkBreakdown*> sorted;
    for (const auto& b : breakdowns) {
        sorted.push_back(&b);
    }
    std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
        return a->link != b->link ? a->link < b->link : a->interval < b->interval;
    });

    std::vector<SharedLinkReport> out;
    for (const auto* b : sorted) {
        const double cap = topology.link(b->link).capacity_bytes(interval_seconds);
        std::map<JobId, std::uint64_t> qualifying;
        double utilization = 0.0;
        for (const auto& d : b->dir) {
            utilization = std::max(utilization, static_cast<double>(d.total) / cap);
            std::vector<std::pair<JobId, std::uint64_t>> here;
            for (const auto& [job, bytes] : d.per_job) {
                if (static_cast<double>(bytes.total()) >= min_fraction_per_job * cap) {
                    here.emplace_back(job, bytes.total());
                }
            }
            if (here.size() >= 2) {
                for (const auto& [job, bytes] : here) {
                    qualifying[job] = std::max(qualifying[job], bytes);
                }
            }
        }
        if (qualifying.empty()) {
            continue;
        }
        std::vector<JobShare> jobs;
        for (const auto& [job, bytes] : qualifying) {
            jobs.push_back({job, bytes, static_cast<double>(bytes) / cap});
        }
        auto same_set = [&](const SharedLinkReport& r) {
            if (r.jobs.size() != jobs.size()) {
                return false;
            }
            for (std::size_t i = 0; i < jobs.size(); ++i) {
                if (r.jobs[i].job != jobs[i].job) {
                    return false;
                }
            }
            return true;
        };
        if (!out.empty() && out.back().link == b->link && out.back().last + 1 == b->interval && same_set(out.back())) {
            auto& r = out.back();
            r.last = b->interval;
            r.utilization = std::max(r.utilization, utilization);
            for (std::size_t i = 0; i < jobs.size(); ++i) {
                if (jobs[i].bytes > r.jobs[i].bytes) {
                    r.jobs[i] = jobs[i];
                }
            }
        } else {
            out.push_back({b->link, b->interval, b->interval, std::move(jobs), utilization});
        }
    }
    return out;
}

std::vector<Guid> outlier_nodes(const std::map<Guid, RadarVector>& vectors, double delta) {
    if (vectors.size() < 3) {
        throw CorrelateError(CorrelateErrc::TooFewNodes, "outlier detection needs at least 3 hosts");
    }
    const auto mode = vectors.begin()->second.mode;
    std::array<double, kRadarAxes> median{};
    for (std::size_t axis = 0; axis < kRadarAxes; ++axis) {
        std::vector<double> column;
        for (const auto& [guid, v] : vectors) {
            if (v.mode != mode) {
                throw CorrelateError(CorrelateErrc::InvalidArgument, "radar vectors mix modes");
            }
            column.push_back(v.values[axis]);
        }
        std::sort(column.begin(), column.end());
        const auto n = column.size();
        median[axis] = n % 2 == 1 ? column[n / 2] : (column[n / 2 - 1] + column[n / 2]) / 2.0;
    }
    std::vector<Guid> out;
    for (const auto& [guid, v] : vectors) {
        double worst = 0.0;
        for (std::size_t axis = 0; axis < kRadarAxes; ++axis) {
            worst = std::max(worst, std::fabs(v.values[axis] - median[axis]));
        }
        if (worst > delta) {
            out.push_back(guid);
        }
    }
    return out;
}

}  // namespace fabric_lens::correlate
