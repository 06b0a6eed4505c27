// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "fabric_lens/wire/records.hpp"

namespace fabric_lens::wire {

// All telemetry belonging to one interval.
struct TelemetryBatch {
    IntervalIndex interval = 0;
    std::vector<MpiRecord> mpi;
    std::vector<IoRecord> io;
    std::vector<CounterSample> counters;
    std::vector<PortErrorSample> port_errors;

    std::size_t record_count() const { return mpi.size() + io.size() + counters.size() + port_errors.size(); }
    bool operator==(const TelemetryBatch&) const = default;
};

}  // namespace fabric_lens::wire
