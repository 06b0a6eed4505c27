// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/server/http.hpp"

#include <charconv>
#include <httplib.h>

namespace fabric_lens::server {

using nlohmann::json;

namespace {

constexpr std::size_t kWorkerThreads = 16;

void reply_error(httplib::Response& res, int status, const std::string& message) {
    res.status = status;
    res.set_content(json{{"error", message}}.dump(), "application/json");
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const ApiError& e) {
        reply_error(res, e.status(), e.what());
    } catch (const std::exception& e) {
        reply_error(res, 500, e.what());
    }
}

template <typename Fn>
httplib::Server::Handler json_handler(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { res.set_content(fn(req).dump(), "application/json"); });
    };
}

// Path ids: anything that is not a number in range names nothing.
std::uint64_t path_id(const httplib::Request& req, std::size_t group = 1) {
    const auto text = req.matches[static_cast<int>(group)].str();
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size()) {
        throw ApiError(404, "unknown id '" + text + "'");
    }
    return v;
}

}  // namespace

struct HttpApi::Impl {
    Service& service;
    LiveHub& hub;
    httplib::Server server;

    Impl(Service& s, LiveHub& h) : service(s), hub(h) {}
};

HttpApi::HttpApi(Service& service, LiveHub& hub) : impl_(std::make_unique<Impl>(service, hub)) {
    auto& svr = impl_->server;
    auto& svc = impl_->service;
    auto& live = impl_->hub;
    svr.new_task_queue = [] { return new httplib::ThreadPool(kWorkerThreads); };
    svr.set_default_headers({{"Access-Control-Allow-Origin", "*"}});

    svr.Get("/api/topology", json_handler([&svc](const auto& req) { return svc.topology(req.params); }));
    svr.Get("/api/links/utilization", json_handler([&svc](const auto& req) { return svc.utilization(req.params); }));
    svr.Get("/api/links/shared", json_handler([&svc](const auto& req) { return svc.shared_links(req.params); }));
    svr.Get(R"(/api/links/([^/]+)/breakdown)", json_handler([&svc](const auto& req) {
                const auto id = path_id(req);
                if (id > UINT32_MAX) {
                    throw ApiError(404, "unknown link");
                }
                return svc.link_breakdown(static_cast<std::uint32_t>(id), req.params);
            }));
    svr.Get(R"(/api/devices/([^/]+)/radarpie)", json_handler([&svc](const auto& req) {
                return svc.radarpie(req.matches[1].str(), req.params);
            }));
    svr.Get("/api/radarpie", json_handler([&svc](const auto& req) { return svc.radarpie_all(req.params); }));
    svr.Get("/api/jobs", json_handler([&svc](const auto& req) { return svc.jobs(req.params); }));
    svr.Get(R"(/api/jobs/([^/]+))", json_handler([&svc](const auto& req) { return svc.job(path_id(req)); }));
    svr.Get(R"(/api/jobs/([^/]+)/outliers)",
            json_handler([&svc](const auto& req) { return svc.job_outliers(path_id(req), req.params); }));
    svr.Get("/api/rules", json_handler([&svc](const auto& req) { return svc.rules(req.params); }));
    svr.Post("/api/rules", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto rule = svc.put_rule(req.body);
            res.status = 201;
            res.set_content(rule.dump(), "application/json");
        });
    });
    svr.Delete(R"(/api/rules/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            svc.delete_rule(path_id(req));
            res.status = 204;
        });
    });
    svr.Get("/api/events", json_handler([&svc](const auto& req) { return svc.events(req.params); }));
    svr.Get("/api/replay", json_handler([&svc](const auto& req) { return svc.replay(req.params); }));
    svr.Get("/api/quarantine", json_handler([&svc](const auto& req) { return svc.quarantine(req.params); }));
    svr.Get("/api/fan", json_handler([&svc](const auto& req) { return svc.fan(req.params); }));
    svr.Get("/api/stats", json_handler([&svc](const auto&) { return svc.stats(); }));

    svr.Get("/api/live", [&live](const httplib::Request&, httplib::Response& res) {
        auto sub = live.subscribe();
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "text/event-stream",
            [&live, sub](std::size_t, httplib::DataSink& sink) {
                auto msg = live.next(sub, std::chrono::seconds(1));
                if (!msg) {
                    sink.done();
                    return true;
                }
                const auto chunk = msg->empty() ? std::string(": keepalive\n\n") : "data: " + *msg + "\n\n";
                return sink.write(chunk.data(), chunk.size());
            },
            [&live, sub](bool) { live.unsubscribe(sub); });
    });

    svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) {
            reply_error(res, res.status, res.status == 404 ? "no such endpoint" : "request failed");
        }
    });
}

HttpApi::~HttpApi() { stop(); }

std::uint16_t HttpApi::bind(const Endpoint& endpoint) {
    auto& svr = impl_->server;
    int port = endpoint.port;
    if (port == 0) {
        port = svr.bind_to_any_port(endpoint.address);
    } else if (!svr.bind_to_port(endpoint.address, port)) {
        port = -1;
    }
    if (port <= 0) {
        throw ServerError(ServerErrc::BindFailure,
                          "cannot bind http " + endpoint.address + ":" + std::to_string(endpoint.port));
    }
    return static_cast<std::uint16_t>(port);
}

void HttpApi::start() {
    if (!thread_.joinable()) {
        thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
        impl_->server.wait_until_ready();
    }
}

void HttpApi::stop() {
    if (thread_.joinable()) {
        impl_->hub.close();
        impl_->server.stop();
        thread_.join();
    }
}

}  // namespace fabric_lens::server
