// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/server/ingest.hpp"

#include <algorithm>
#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>
#include <vector>

namespace fabric_lens::server {

namespace {

constexpr std::size_t kBatch = 64;
constexpr std::size_t kDatagramBuffer = 2048;

sockaddr_in address_of(const std::string& address, std::uint16_t port) {
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(port);
    const auto host = address.empty() || address == "*" ? std::string("0.0.0.0") : address;
    if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1) {
        throw ServerError(ServerErrc::BindFailure, "not an IPv4 address: " + address);
    }
    return sa;
}

[[noreturn]] void bind_failure(const std::string& what) {
    throw ServerError(ServerErrc::BindFailure, what + ": " + std::strerror(errno));
}

}  // namespace

UdpIngest::UdpIngest(const Endpoint& endpoint, std::size_t receive_buffer_bytes, Sink sink) : sink_(std::move(sink)) {
    const auto sa = address_of(endpoint.address, endpoint.port);
    fd_ = ::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0);
    if (fd_ < 0) {
        bind_failure("socket");
    }
    // Bursts of a whole interval arrive at once; a large buffer absorbs them.
    // SO_RCVBUFFORCE passes the system cap when privileged.
    int want = static_cast<int>(std::min<std::size_t>(receive_buffer_bytes, 1u << 30));
    if (::setsockopt(fd_, SOL_SOCKET, SO_RCVBUFFORCE, &want, sizeof want) != 0) {
        ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &want, sizeof want);
    }
    int got = 0;
    socklen_t len = sizeof got;
    ::getsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &got, &len);
    rcvbuf_ = static_cast<std::size_t>(got);

    timeval tv{0, 100'000};
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    if (::bind(fd_, reinterpret_cast<const sockaddr*>(&sa), sizeof sa) != 0) {
        const auto saved = errno;
        ::close(fd_);
        fd_ = -1;
        errno = saved;
        bind_failure("bind udp " + endpoint.address + ":" + std::to_string(endpoint.port));
    }
    sockaddr_in bound{};
    socklen_t blen = sizeof bound;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &blen);
    port_ = ntohs(bound.sin_port);
}

UdpIngest::~UdpIngest() {
    stop();
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

void UdpIngest::start() {
    if (!thread_.joinable()) {
        stop_ = false;
        thread_ = std::thread([this] { run(); });
    }
}

void UdpIngest::stop() {
    stop_ = true;
    if (thread_.joinable()) {
        thread_.join();
    }
}

void UdpIngest::run() {
    std::vector<std::uint8_t> buffers(kBatch * kDatagramBuffer);
    std::vector<iovec> iov(kBatch);
    std::vector<mmsghdr> msgs(kBatch);
    while (!stop_) {
        for (std::size_t i = 0; i < kBatch; ++i) {
            iov[i] = iovec{buffers.data() + i * kDatagramBuffer, kDatagramBuffer};
            msgs[i] = mmsghdr{};
            msgs[i].msg_hdr.msg_iov = &iov[i];
            msgs[i].msg_hdr.msg_iovlen = 1;
        }
        const int n = ::recvmmsg(fd_, msgs.data(), kBatch, MSG_WAITFORONE, nullptr);
        if (n <= 0) {
            continue;  // timeout or EINTR; check the stop flag
        }
        for (int i = 0; i < n; ++i) {
            const auto size = std::min<std::size_t>(msgs[i].msg_len, kDatagramBuffer);
            sink_(std::span<const std::uint8_t>(buffers.data() + i * kDatagramBuffer, size));
        }
        datagrams_ += static_cast<std::uint64_t>(n);
    }
}

UdpSender::UdpSender(const std::string& address, std::uint16_t port) {
    const auto sa = address_of(address, port);
    fd_ = ::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0);
    if (fd_ < 0) {
        bind_failure("socket");
    }
    if (::connect(fd_, reinterpret_cast<const sockaddr*>(&sa), sizeof sa) != 0) {
        const auto saved = errno;
        ::close(fd_);
        errno = saved;
        bind_failure("connect udp " + address + ":" + std::to_string(port));
    }
}

UdpSender::~UdpSender() {
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

bool UdpSender::send(std::span<const std::uint8_t> datagram) {
    while (true) {
        auto n = ::send(fd_, datagram.data(), datagram.size(), 0);
        if (n >= 0) {
            return static_cast<std::size_t>(n) == datagram.size();
        }
        if (errno != EINTR) {
            return false;
        }
    }
}

}  // namespace fabric_lens::server
