// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/server/config.hpp"

#include <cstdlib>
#include <fstream>
#include <json.hpp>

#include "fabric_lens/common/text.hpp"

namespace fabric_lens::server {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw ServerError(ServerErrc::InvalidConfig, what); }

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        invalid(std::string("field '") + key + "': " + e.what());
    }
}

fs::path path_field(const json& j, const char* key, const fs::path& base) {
    auto text = get_or<std::string>(j, key, "");
    if (text.empty()) {
        return {};
    }
    fs::path p(text);
    return p.is_relative() && !base.empty() ? base / p : p;
}

Endpoint endpoint_field(const json& j, const char* key, Endpoint fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    const auto& e = j.at(key);
    if (!e.is_object()) {
        invalid(std::string("field '") + key + "' must be an object");
    }
    Endpoint out = fallback;
    out.address = get_or<std::string>(e, "address", fallback.address);
    const auto port = get_or<std::int64_t>(e, "port", fallback.port);
    if (port < 0 || port > 65535) {
        invalid(std::string(key) + " port out of range");
    }
    out.port = static_cast<std::uint16_t>(port);
    return out;
}

void require_readable(const fs::path& p, const char* what) {
    if (p.empty()) {
        return;
    }
    std::ifstream in(p);
    if (!in || fs::is_directory(p)) {
        throw ServerError(ServerErrc::UnreadablePath, std::string(what) + " not readable: " + p.string());
    }
}

}  // namespace

ServerConfig parse_config(const std::string& json_text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        invalid(std::string("not JSON: ") + e.what());
    }
    if (!j.is_object()) {
        invalid("config must be a JSON object");
    }
    ServerConfig c;
    c.ingest = endpoint_field(j, "ingest", c.ingest);
    c.http = endpoint_field(j, "http", c.http);
    c.interval_ms = get_or<std::uint32_t>(j, "interval_ms", c.interval_ms);
    c.epoch_ns = get_or<std::uint64_t>(j, "epoch_ns", c.epoch_ns);
    if (auto dir = path_field(j, "data_dir", base_dir); !dir.empty()) {
        c.data_dir = dir;
    }
    c.topology_file = path_field(j, "topology_file", base_dir);
    c.routes_file = path_field(j, "routes_file", base_dir);
    c.hosts_file = path_field(j, "hosts_file", base_dir);
    c.arp_file = path_field(j, "arp_file", base_dir);
    c.rules_file = path_field(j, "rules_file", base_dir);
    c.scenario_file = path_field(j, "scenario_file", base_dir);

    const auto mode = get_or<std::string>(j, "mode", "live");
    if (mode == "live") {
        c.mode = Mode::Live;
    } else if (mode == "simulate") {
        c.mode = Mode::Simulate;
    } else {
        invalid("unknown mode '" + mode + "'");
    }
    if (j.contains("simulate")) {
        const auto& s = j.at("simulate");
        c.simulate_intervals = get_or<std::uint64_t>(s, "intervals", 0);
        if (s.contains("pace_ms")) {
            c.simulate_pace_ms = get_or<std::uint32_t>(s, "pace_ms", 0);
        }
    }
    c.webhook_url = get_or<std::string>(j, "webhook_url", "");
    if (j.contains("store")) {
        const auto& s = j.at("store");
        c.store.max_segments = get_or<std::size_t>(s, "max_segments", 0);
        c.store.max_total_bytes = get_or<std::uint64_t>(s, "max_total_bytes", 0);
        c.store.sync = get_or<bool>(s, "sync", true);
    }
    c.ingest_buffer_bytes = get_or<std::size_t>(j, "ingest_buffer_bytes", c.ingest_buffer_bytes);
    return c;
}

ServerConfig load_config(const fs::path& path) {
    std::string text;
    try {
        text = read_text_file(path.string());
    } catch (const std::runtime_error&) {
        throw ServerError(ServerErrc::UnreadablePath, "config not readable: " + path.string());
    }
    auto config = parse_config(text, path.parent_path());
    apply_environment(config);
    validate(config);
    return config;
}

void apply_environment(ServerConfig& config) {
    if (const char* dir = std::getenv(kDataDirEnv); dir != nullptr && *dir != '\0') {
        config.data_dir = dir;
    }
}

void validate(const ServerConfig& config) {
    if (config.interval_ms < 100) {
        invalid("interval_ms must be at least 100");
    }
    if (config.data_dir.empty()) {
        invalid("data_dir is empty");
    }
    if (config.mode == Mode::Simulate) {
        if (config.scenario_file.empty()) {
            invalid("simulate mode needs scenario_file");
        }
        require_readable(config.scenario_file, "scenario_file");
    } else if (config.topology_file.empty()) {
        invalid("live mode needs topology_file");
    }
    require_readable(config.topology_file, "topology_file");
    require_readable(config.routes_file, "routes_file");
    require_readable(config.hosts_file, "hosts_file");
    require_readable(config.arp_file, "arp_file");
    require_readable(config.rules_file, "rules_file");
    if (!config.webhook_url.empty() && config.webhook_url.rfind("http://", 0) != 0) {
        invalid("webhook_url must be an http:// URL");
    }
}

std::string_view to_string(Mode mode) { return mode == Mode::Live ? "live" : "simulate"; }

}  // namespace fabric_lens::server
