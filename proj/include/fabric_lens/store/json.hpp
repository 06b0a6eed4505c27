// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

#include "fabric_lens/store/types.hpp"

namespace fabric_lens::store {

// JSON shapes shared by the dump command and the HTTP API. GUIDs are
// 16-digit lowercase hex strings.
nlohmann::json to_json(const correlate::DirectionBreakdown& d);
nlohmann::json to_json(const correlate::LinkBreakdown& b);
nlohmann::json to_json(const correlate::DeviceMetrics& m);
nlohmann::json to_json(const correlate::QuarantineEntry& q);
nlohmann::json to_json(const Event& e);
nlohmann::json to_json(const JobRecord& j);
nlohmann::json to_json(const IntervalCommit& c);

}  // namespace fabric_lens::store
