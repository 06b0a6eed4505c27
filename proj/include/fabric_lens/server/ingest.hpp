// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <span>
#include <thread>

#include "fabric_lens/server/config.hpp"

namespace fabric_lens::server {

// UDP datagram receiver. One thread drains the socket in batches and hands
// every datagram to the sink as is.
class UdpIngest {
public:
    using Sink = std::function<void(std::span<const std::uint8_t>)>;

    // Binds immediately; throws ServerError(BindFailure).
    UdpIngest(const Endpoint& endpoint, std::size_t receive_buffer_bytes, Sink sink);
    ~UdpIngest();

    UdpIngest(const UdpIngest&) = delete;
    UdpIngest& operator=(const UdpIngest&) = delete;

    void start();
    void stop();

    std::uint16_t port() const { return port_; }
    // What the kernel granted, which may be less than asked for.
    std::size_t receive_buffer_bytes() const { return rcvbuf_; }
    std::uint64_t datagrams() const { return datagrams_.load(); }

private:
    void run();

    int fd_ = -1;
    std::uint16_t port_ = 0;
    std::size_t rcvbuf_ = 0;
    Sink sink_;
    std::atomic<bool> stop_{false};
    std::atomic<std::uint64_t> datagrams_{0};
    std::thread thread_;
};

// Sends encoded records to a collector; used by the simulate command and
// tests. Throws ServerError(BindFailure) when the address does not resolve.
class UdpSender {
public:
    UdpSender(const std::string& address, std::uint16_t port);
    ~UdpSender();

    UdpSender(const UdpSender&) = delete;
    UdpSender& operator=(const UdpSender&) = delete;

    bool send(std::span<const std::uint8_t> datagram);

private:
    int fd_ = -1;
};

}  // namespace fabric_lens::server
