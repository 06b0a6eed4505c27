// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/server/live.hpp"

#include "fabric_lens/store/json.hpp"
#include "fabric_lens/viz/vizmodel.hpp"

namespace fabric_lens::server {

LiveHub::Subscription LiveHub::subscribe() {
    auto sub = std::make_shared<Subscriber>();
    std::lock_guard lock(mutex_);
    subs_.insert(sub);
    return sub;
}

void LiveHub::unsubscribe(const Subscription& sub) {
    std::lock_guard lock(mutex_);
    subs_.erase(sub);
}

void LiveHub::publish(const std::string& message) {
    {
        std::lock_guard lock(mutex_);
        for (const auto& sub : subs_) {
            if (sub->queue.size() >= kMaxBacklog) {
                sub->queue.pop_front();
                ++sub->dropped;
            }
            sub->queue.push_back(message);
        }
    }
    cv_.notify_all();
}

std::optional<std::string> LiveHub::next(const Subscription& sub, std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, timeout, [&] { return closed_ || !sub->queue.empty(); });
    if (closed_) {
        return std::nullopt;
    }
    if (sub->queue.empty()) {
        return std::string();
    }
    auto msg = std::move(sub->queue.front());
    sub->queue.pop_front();
    return msg;
}

void LiveHub::close() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    cv_.notify_all();
}

std::size_t LiveHub::subscribers() const {
    std::lock_guard lock(mutex_);
    return subs_.size();
}

nlohmann::json to_json(const LiveUpdate& update) {
    nlohmann::json links = nlohmann::json::array();
    for (const auto& [id, fraction] : update.changed_links) {
        const auto& band = viz::color_band(fraction);
        links.push_back({{"id", id.value}, {"fraction", fraction}, {"band", band.name}, {"color", band.color}});
    }
    nlohmann::json devices = nlohmann::json::array();
    for (auto g : update.changed_devices) {
        devices.push_back(g.to_hex());
    }
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : update.events) {
        events.push_back(store::to_json(e));
    }
    return {{"interval", update.interval},
            {"recommit", update.recommit},
            {"changed_links", std::move(links)},
            {"changed_devices", std::move(devices)},
            {"events", std::move(events)}};
}

}  // namespace fabric_lens::server
