// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <string>
#include <thread>

namespace fabric_lens::server {

// Posts event notifications as JSON to one http:// URL from a background
// thread. Delivery is best effort: failures are counted, not retried.
class Webhook {
public:
    static constexpr std::size_t kMaxQueue = 1024;

    // Throws ServerError(InvalidConfig) for anything but http://host[:port][/path].
    explicit Webhook(const std::string& url);
    ~Webhook();

    Webhook(const Webhook&) = delete;
    Webhook& operator=(const Webhook&) = delete;

    void post(std::string body);
    void stop();

    std::uint64_t sent() const { return sent_.load(); }
    std::uint64_t failed() const { return failed_.load(); }

private:
    void run();

    std::string host_;
    int port_ = 80;
    std::string path_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<std::string> queue_;
    bool stopping_ = false;
    std::atomic<std::uint64_t> sent_{0};
    std::atomic<std::uint64_t> failed_{0};
    std::thread thread_;
};

}  // namespace fabric_lens::server
