// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <thread>

#include "fabric_lens/server/config.hpp"
#include "fabric_lens/server/live.hpp"
#include "fabric_lens/server/service.hpp"

namespace fabric_lens::server {

// JSON over HTTP/1.1:
//   GET    /api/topology?job=&clustered=
//   GET    /api/links/utilization?metric=&from=&to=
//   GET    /api/links/shared?min_fraction=&from=&to=
//   GET    /api/links/{id}/breakdown?by=job&from=&to=
//   GET    /api/devices/{guid}/radarpie?mode=&from=&to=
//   GET    /api/radarpie?mode=&type=&from=&to=
//   GET    /api/jobs, /api/jobs/{id}, /api/jobs/{id}/outliers?delta=&mode=
//   GET    /api/rules; POST /api/rules; DELETE /api/rules/{id}
//   GET    /api/events?from=&to=&rule=&job=&subject=
//   GET    /api/replay?from=&to=&step=&metric=
//   GET    /api/quarantine, /api/stats, /api/fan?ax=&ay=&bx=&by=&n=
//   GET    /api/live  (server-sent events, one JSON update per commit)
// Lists take limit/offset. Errors come back as {"error": "..."}.
class HttpApi {
public:
    HttpApi(Service& service, LiveHub& hub);
    ~HttpApi();

    HttpApi(const HttpApi&) = delete;
    HttpApi& operator=(const HttpApi&) = delete;

    // Throws ServerError(BindFailure). Returns the bound port.
    std::uint16_t bind(const Endpoint& endpoint);
    void start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
};

}  // namespace fabric_lens::server
