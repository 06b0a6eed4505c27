// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/server/webhook.hpp"

#include <httplib.h>

#include "fabric_lens/server/config.hpp"

namespace fabric_lens::server {

Webhook::Webhook(const std::string& url) {
    const std::string scheme = "http://";
    if (url.rfind(scheme, 0) != 0) {
        throw ServerError(ServerErrc::InvalidConfig, "webhook must be an http:// URL");
    }
    auto rest = url.substr(scheme.size());
    const auto slash = rest.find('/');
    path_ = slash == std::string::npos ? "/" : rest.substr(slash);
    auto authority = rest.substr(0, slash);
    const auto colon = authority.rfind(':');
    if (colon != std::string::npos) {
        try {
            port_ = std::stoi(authority.substr(colon + 1));
        } catch (const std::exception&) {
            throw ServerError(ServerErrc::InvalidConfig, "bad webhook port in " + url);
        }
        authority.resize(colon);
    }
    if (authority.empty() || port_ <= 0 || port_ > 65535) {
        throw ServerError(ServerErrc::InvalidConfig, "bad webhook URL " + url);
    }
    host_ = authority;
    thread_ = std::thread([this] { run(); });
}

Webhook::~Webhook() { stop(); }

void Webhook::post(std::string body) {
    {
        std::lock_guard lock(mutex_);
        if (queue_.size() >= kMaxQueue) {
            queue_.pop_front();
            ++failed_;
        }
        queue_.push_back(std::move(body));
    }
    cv_.notify_one();
}

void Webhook::stop() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    cv_.notify_one();
    if (thread_.joinable()) {
        thread_.join();
    }
}

void Webhook::run() {
    httplib::Client client(host_, port_);
    client.set_connection_timeout(2);
    client.set_read_timeout(2);
    client.set_write_timeout(2);
    while (true) {
        std::string body;
        {
            std::unique_lock lock(mutex_);
            cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
            if (queue_.empty()) {
                return;
            }
            body = std::move(queue_.front());
            queue_.pop_front();
        }
        auto res = client.Post(path_, body, "application/json");
        if (res && res->status >= 200 && res->status < 300) {
            ++sent_;
        } else {
            ++failed_;
        }
    }
}

}  // namespace fabric_lens::server
