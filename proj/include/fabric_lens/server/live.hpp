// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <json.hpp>

#include "fabric_lens/server/pipeline.hpp"

namespace fabric_lens::server {

// Fan-out of per-interval updates to streaming clients. A client that falls
// more than kMaxBacklog messages behind loses the oldest ones.
class LiveHub {
public:
    static constexpr std::size_t kMaxBacklog = 256;

    struct Subscriber {
        std::deque<std::string> queue;
        std::uint64_t dropped = 0;
    };
    using Subscription = std::shared_ptr<Subscriber>;

    Subscription subscribe();
    void unsubscribe(const Subscription& sub);
    void publish(const std::string& message);

    // Next message; an empty string after `timeout` with nothing to send, and
    // nullopt once the hub is closed.
    std::optional<std::string> next(const Subscription& sub, std::chrono::milliseconds timeout);

    // Wakes every waiting client for good.
    void close();
    std::size_t subscribers() const;

private:
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::set<Subscription> subs_;
    bool closed_ = false;
};

// {"interval", "recommit", "changed_links": [{"id", "fraction", "band", "color"}],
//  "changed_devices": [guid...], "events": [...]}
nlohmann::json to_json(const LiveUpdate& update);

}  // namespace fabric_lens::server
