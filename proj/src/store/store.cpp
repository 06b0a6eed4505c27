// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/store/store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "fabric_lens/store/codec.hpp"
#include "fabric_lens/store/json.hpp"

namespace fabric_lens::store {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMetaFile = "store.meta";
constexpr const char* kRulesFile = "rules.log";
constexpr IntervalIndex kMaxQuerySpan = 1'000'000;

[[noreturn]] void io_error(const std::string& what) {
    throw StoreError(StoreErrc::Io, what + ": " + std::strerror(errno));
}

std::string segment_name(std::int64_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "seg-%012lld.log", static_cast<long long>(n));
    return buf;
}

std::optional<std::int64_t> segment_number(const fs::path& p) {
    const auto name = p.filename().string();
    if (name.size() != 20 || name.rfind("seg-", 0) != 0 || name.substr(16) != ".log") {
        return std::nullopt;
    }
    try {
        return std::stoll(name.substr(4, 12));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

int open_log(const fs::path& p, bool read_only = false) {
    int fd = read_only ? ::open(p.c_str(), O_RDONLY | O_CLOEXEC)
                       : ::open(p.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) {
        io_error("open " + p.string());
    }
    return fd;
}

void write_all(int fd, const std::string& bytes) {
    std::size_t done = 0;
    while (done < bytes.size()) {
        auto n = ::write(fd, bytes.data() + done, bytes.size() - done);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            io_error("write");
        }
        done += static_cast<std::size_t>(n);
    }
}

bool read_exact(int fd, std::uint64_t offset, char* buf, std::size_t len) {
    std::size_t done = 0;
    while (done < len) {
        auto n = ::pread(fd, buf + done, len - done, static_cast<off_t>(offset + done));
        if (n < 0 && errno == EINTR) {
            continue;
        }
        if (n <= 0) {
            return false;
        }
        done += static_cast<std::size_t>(n);
    }
    return true;
}

std::uint32_t le32(const char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= std::uint32_t{static_cast<unsigned char>(p[i])} << (8 * i);
    }
    return v;
}

std::string frame_of(const std::string& payload, std::uint32_t crc) {
    std::string out(kFrameHeaderSize, '\0');
    const auto len = static_cast<std::uint32_t>(payload.size());
    for (int i = 0; i < 4; ++i) {
        out[i] = static_cast<char>(len >> (8 * i));
        out[4 + i] = static_cast<char>(crc >> (8 * i));
    }
    out += payload;
    return out;
}

// Walks the frames of one log file; cuts the file at the first torn or
// corrupt frame (or only stops there when read-only). Returns true when
// something was cut.
template <typename Fn>
bool scan_log(int fd, const fs::path& path, std::uint64_t& size, bool read_only, Fn&& on_frame) {
    struct stat st {};
    if (::fstat(fd, &st) != 0) {
        io_error("stat " + path.string());
    }
    const auto file_size = static_cast<std::uint64_t>(st.st_size);
    std::uint64_t offset = 0;
    std::string payload;
    while (offset < file_size) {
        char header[kFrameHeaderSize];
        bool ok = offset + kFrameHeaderSize <= file_size && read_exact(fd, offset, header, kFrameHeaderSize);
        std::uint32_t len = 0, crc = 0;
        if (ok) {
            len = le32(header);
            crc = le32(header + 4);
            ok = offset + kFrameHeaderSize + len <= file_size;
        }
        if (ok) {
            payload.resize(len);
            ok = read_exact(fd, offset + kFrameHeaderSize, payload.data(), len) && crc32_of(payload) == crc;
        }
        if (ok) {
            try {
                on_frame(offset, len, crc, payload);
            } catch (const std::runtime_error&) {
                ok = false;
            }
        }
        if (!ok) {
            if (read_only) {
                size = offset;
                return false;
            }
            if (::ftruncate(fd, static_cast<off_t>(offset)) != 0) {
                io_error("truncate " + path.string());
            }
            size = offset;
            return true;
        }
        offset += kFrameHeaderSize + len;
    }
    size = offset;
    return false;
}

}  // namespace

struct Store::Segment {
    std::int64_t number = 0;
    fs::path path;
    int fd = -1;
    std::uint64_t size = 0;

    ~Segment() {
        if (fd >= 0) {
            ::close(fd);
        }
    }
};

Store::Store(fs::path dir, StoreCatalog catalog, std::uint32_t interval_ms, StoreOptions options)
    : dir_(std::move(dir)), catalog_(std::move(catalog)), interval_ms_(interval_ms), options_(options) {}

Store::~Store() {
    if (rules_fd_ >= 0) {
        ::close(rules_fd_);
    }
}

std::unique_ptr<Store> Store::open(const fs::path& dir, StoreCatalog catalog, std::uint32_t interval_ms,
                                   StoreOptions options) {
    if (interval_ms == 0) {
        throw StoreError(StoreErrc::IntervalMismatch, "interval length must be positive");
    }
    std::error_code ec;
    if (options.read_only) {
        auto stored = stored_interval_ms(dir);
        if (!stored) {
            throw StoreError(StoreErrc::Io, "no store in " + dir.string());
        }
        if (*stored != interval_ms) {
            throw StoreError(StoreErrc::IntervalMismatch, "store holds " + std::to_string(*stored) +
                                                               " ms intervals, asked for " +
                                                               std::to_string(interval_ms));
        }
        std::unique_ptr<Store> store(new Store(dir, std::move(catalog), interval_ms, options));
        store->recover();
        return store;
    }
    fs::create_directories(dir, ec);
    if (ec) {
        throw StoreError(StoreErrc::Io, "cannot create " + dir.string() + ": " + ec.message());
    }
    const auto meta = dir / kMetaFile;
    if (fs::exists(meta)) {
        std::ifstream in(meta);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception&) {
            throw StoreError(StoreErrc::Io, "unreadable " + meta.string());
        }
        const auto stored = j.value("interval_ms", 0u);
        if (stored != interval_ms) {
            throw StoreError(StoreErrc::IntervalMismatch, "store holds " + std::to_string(stored) +
                                                               " ms intervals, asked for " +
                                                               std::to_string(interval_ms));
        }
    } else {
        std::ofstream out(meta);
        out << nlohmann::json{{"format", kFormatVersion}, {"interval_ms", interval_ms}}.dump() << "\n";
        if (!out) {
            throw StoreError(StoreErrc::Io, "cannot write " + meta.string());
        }
    }
    std::unique_ptr<Store> store(new Store(dir, std::move(catalog), interval_ms, options));
    store->recover();
    return store;
}

std::optional<std::uint32_t> Store::stored_interval_ms(const fs::path& dir) {
    std::ifstream in(dir / kMetaFile);
    if (!in) {
        return std::nullopt;
    }
    try {
        nlohmann::json j;
        in >> j;
        auto ms = j.value("interval_ms", 0u);
        return ms == 0 ? std::nullopt : std::optional<std::uint32_t>(ms);
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

void Store::recover() {
    std::vector<std::pair<std::int64_t, fs::path>> files;
    for (const auto& entry : fs::directory_iterator(dir_)) {
        if (auto n = segment_number(entry.path())) {
            files.emplace_back(*n, entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& [n, path] : files) {
        auto seg = std::make_shared<Segment>();
        seg->number = n;
        seg->path = path;
        seg->fd = open_log(path, options_.read_only);
        const bool cut = scan_log(seg->fd, path, seg->size, options_.read_only,
                                  [&](std::uint64_t offset, std::uint32_t len, std::uint32_t crc, const std::string& p) {
                                      auto commit = decode_commit(p);
                                      apply(commit, FrameRef{n, offset, len, crc});
                                  });
        counters_.recovered_truncations += cut ? 1 : 0;
        counters_.bytes += seg->size;
        segments_[n] = std::move(seg);
    }

    const auto rules_path = dir_ / kRulesFile;
    if (options_.read_only && !fs::exists(rules_path)) {
        return;
    }
    rules_fd_ = open_log(rules_path, options_.read_only);
    std::uint64_t rules_size = 0;
    const bool cut = scan_log(rules_fd_, rules_path, rules_size, options_.read_only,
                              [&](std::uint64_t, std::uint32_t, std::uint32_t, const std::string& p) {
                                  apply_rule_frame(p);
                              });
    counters_.recovered_truncations += cut ? 1 : 0;
}

void Store::apply_rule_frame(const std::string& payload) {
    auto frame = decode_rule_frame(payload);
    max_rule_id_ = std::max(max_rule_id_, frame.id);
    if (frame.kind == FrameKind::RulePut) {
        rules_[frame.id] = std::move(frame.text);
    } else {
        rules_.erase(frame.id);
    }
}

void Store::apply(const IntervalCommit& commit, const FrameRef& ref) {
    index_[commit.interval] = ref;
    for (const auto& e : commit.events) {
        events_[EventKey{e.interval, e.rule_id, e.subject}] = e;
    }
    for (const auto& j : commit.jobs) {
        auto [it, fresh] = jobs_.try_emplace(j.id, j);
        if (!fresh) {
            auto& cur = it->second;
            cur.first = std::min(cur.first, j.first);
            cur.last = std::max(cur.last, j.last);
            cur.nodes = j.nodes;
            cur.source = j.source;
        }
    }
    if (!last_ || commit.interval > *last_) {
        last_ = commit.interval;
    }
    ++counters_.frames;
}

Store::Segment& Store::segment_for_write(std::int64_t n) {
    if (auto it = segments_.find(n); it != segments_.end()) {
        return *it->second;
    }
    auto seg = std::make_shared<Segment>();
    seg->number = n;
    seg->path = dir_ / segment_name(n);
    seg->fd = open_log(seg->path);
    auto& ref = *seg;
    std::unique_lock lock(mutex_);
    segments_[n] = std::move(seg);
    return ref;
}

void Store::write_frame(std::int64_t segment, const std::string& payload, FrameRef& ref) {
    auto& seg = segment_for_write(segment);
    const auto crc = crc32_of(payload);
    write_all(seg.fd, frame_of(payload, crc));
    if (options_.sync && ::fdatasync(seg.fd) != 0) {
        io_error("sync " + seg.path.string());
    }
    ref = FrameRef{segment, seg.size, static_cast<std::uint32_t>(payload.size()), crc};
    seg.size += kFrameHeaderSize + payload.size();
}

void Store::append(const IntervalCommit& input) {
    std::lock_guard writer(write_mutex_);
    if (options_.read_only) {
        throw StoreError(StoreErrc::Io, "store opened read-only");
    }
    if (input.interval < 0) {
        throw StoreError(StoreErrc::InvalidRange, "negative interval");
    }
    if (last_ && input.interval < *last_ - kGraceIntervals) {
        throw StoreError(StoreErrc::TooLate, "interval " + std::to_string(input.interval) + " is older than " +
                                                 std::to_string(*last_) + " minus the grace window");
    }

    IntervalCommit commit;
    commit.interval = input.interval;
    commit.interval_ms = interval_ms_;
    for (const auto& l : input.links) {
        if (catalog_.link_count != 0 && l.link.value >= catalog_.link_count) {
            throw StoreError(StoreErrc::UnknownLink, "link " + std::to_string(l.link.value));
        }
        if (!l.is_zero()) {
            commit.links.push_back(l);
            commit.links.back().interval = input.interval;
        }
    }
    std::sort(commit.links.begin(), commit.links.end(), [](const auto& a, const auto& b) { return a.link < b.link; });
    for (const auto& d : input.devices) {
        if (!catalog_.devices.empty() && catalog_.devices.count(d.device) == 0) {
            throw StoreError(StoreErrc::UnknownGuid, "device " + d.device.to_hex());
        }
        if (!d.metrics.is_zero()) {
            commit.devices.push_back(d);
        }
    }
    std::sort(commit.devices.begin(), commit.devices.end(),
              [](const auto& a, const auto& b) { return a.device < b.device; });
    commit.events = input.events;
    for (auto& e : commit.events) {
        e.interval = input.interval;
    }
    std::sort(commit.events.begin(), commit.events.end(), [](const auto& a, const auto& b) {
        return std::tie(a.rule_id, a.subject) < std::tie(b.rule_id, b.subject);
    });
    commit.jobs = input.jobs;
    std::sort(commit.jobs.begin(), commit.jobs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    commit.quarantine = input.quarantine;

    const auto payload = encode_commit(commit);
    if (auto it = index_.find(commit.interval); it != index_.end() && it->second.length == payload.size() &&
                                                it->second.crc == crc32_of(payload)) {
        std::shared_ptr<Segment> seg;
        {
            std::shared_lock lock(mutex_);
            seg = segments_.at(it->second.segment);
        }
        std::string existing(it->second.length, '\0');
        if (read_exact(seg->fd, it->second.offset + kFrameHeaderSize, existing.data(), existing.size()) &&
            existing == payload) {
            std::unique_lock lock(mutex_);
            ++counters_.skipped_identical;
            return;
        }
    }
    if (options_.max_total_bytes != 0 && counters_.bytes + kFrameHeaderSize + payload.size() > options_.max_total_bytes) {
        throw StoreError(StoreErrc::StorageFull, "store would exceed " + std::to_string(options_.max_total_bytes) +
                                                     " bytes");
    }

    FrameRef ref;
    write_frame(commit.interval / kIntervalsPerSegment, payload, ref);
    {
        std::unique_lock lock(mutex_);
        counters_.bytes += kFrameHeaderSize + payload.size();
        apply(commit, ref);
    }
    enforce_retention();
}

void Store::enforce_retention() {
    if (options_.max_segments == 0) {
        return;
    }
    std::unique_lock lock(mutex_);
    while (segments_.size() > options_.max_segments) {
        auto oldest = segments_.begin();
        const auto lo = oldest->first * kIntervalsPerSegment;
        const auto hi = lo + kIntervalsPerSegment;
        index_.erase(index_.lower_bound(lo), index_.lower_bound(hi));
        for (auto it = events_.begin(); it != events_.end();) {
            const auto interval = std::get<0>(it->first);
            it = interval >= lo && interval < hi ? events_.erase(it) : std::next(it);
        }
        counters_.bytes -= oldest->second->size;
        std::error_code ec;
        fs::remove(oldest->second->path, ec);
        segments_.erase(oldest);
    }
}

void Store::put_rule(std::uint64_t id, const std::string& text) {
    std::lock_guard writer(write_mutex_);
    if (options_.read_only) {
        throw StoreError(StoreErrc::Io, "store opened read-only");
    }
    const auto payload = encode_rule_put(id, text);
    write_all(rules_fd_, frame_of(payload, crc32_of(payload)));
    if (options_.sync) {
        ::fdatasync(rules_fd_);
    }
    std::unique_lock lock(mutex_);
    rules_[id] = text;
    max_rule_id_ = std::max(max_rule_id_, id);
}

void Store::delete_rule(std::uint64_t id) {
    std::lock_guard writer(write_mutex_);
    if (options_.read_only) {
        throw StoreError(StoreErrc::Io, "store opened read-only");
    }
    const auto payload = encode_rule_delete(id);
    write_all(rules_fd_, frame_of(payload, crc32_of(payload)));
    if (options_.sync) {
        ::fdatasync(rules_fd_);
    }
    std::unique_lock lock(mutex_);
    rules_.erase(id);
}

std::uint64_t Store::max_rule_id() const {
    std::shared_lock lock(mutex_);
    return max_rule_id_;
}

std::map<std::uint64_t, std::string> Store::rules() const {
    std::shared_lock lock(mutex_);
    return rules_;
}

IntervalCommit Store::load(const std::shared_ptr<Segment>& seg, const FrameRef& ref) const {
    std::string payload(ref.length, '\0');
    if (!read_exact(seg->fd, ref.offset + kFrameHeaderSize, payload.data(), payload.size()) ||
        crc32_of(payload) != ref.crc) {
        throw StoreError(StoreErrc::Io, "frame at " + seg->path.string() + ":" + std::to_string(ref.offset) +
                                            " failed verification");
    }
    try {
        return decode_commit(payload);
    } catch (const std::runtime_error& e) {
        throw StoreError(StoreErrc::Io, std::string("undecodable frame: ") + e.what());
    }
}

std::vector<std::pair<std::shared_ptr<Store::Segment>, Store::FrameRef>> Store::frames_in(IntervalIndex from,
                                                                                          IntervalIndex to) const {
    std::vector<std::pair<std::shared_ptr<Segment>, FrameRef>> out;
    std::shared_lock lock(mutex_);
    for (auto it = index_.lower_bound(from); it != index_.end() && it->first <= to; ++it) {
        out.emplace_back(segments_.at(it->second.segment), it->second);
    }
    return out;
}

void Store::validate_range(IntervalIndex from, IntervalIndex to) const {
    if (from > to) {
        throw StoreError(StoreErrc::InvalidRange, "empty range");
    }
    if (to - from >= kMaxQuerySpan) {
        throw StoreError(StoreErrc::InvalidRange, "range spans more than " + std::to_string(kMaxQuerySpan) +
                                                      " intervals");
    }
}

LinkSeries Store::query_links(IntervalIndex from, IntervalIndex to, const LinkFilter& filter) const {
    validate_range(from, to);
    for (auto link : filter.links) {
        if (catalog_.link_count != 0 && link.value >= catalog_.link_count) {
            throw StoreError(StoreErrc::UnknownLink, "link " + std::to_string(link.value));
        }
    }
    if (filter.job) {
        std::shared_lock lock(mutex_);
        if (jobs_.count(*filter.job) == 0) {
            throw StoreError(StoreErrc::UnknownJob, "job " + std::to_string(*filter.job));
        }
    }

    LinkSeries out;
    IntervalIndex expect = from;
    for (const auto& [seg, ref] : frames_in(from, to)) {
        auto commit = load(seg, ref);
        for (; expect < commit.interval; ++expect) {
            out.gaps.push_back(expect);
        }
        expect = commit.interval + 1;
        for (auto& row : commit.links) {
            if (!filter.links.empty() && filter.links.count(row.link) == 0) {
                continue;
            }
            if (filter.job) {
                bool present = false;
                for (auto& d : row.dir) {
                    auto keep = d.per_job.find(*filter.job);
                    std::map<JobId, correlate::JobBytes> only;
                    if (keep != d.per_job.end()) {
                        only.insert(*keep);
                        present = true;
                    }
                    d.per_job = std::move(only);
                }
                if (!present) {
                    continue;
                }
            }
            out.rows.push_back(std::move(row));
        }
    }
    for (; expect <= to; ++expect) {
        out.gaps.push_back(expect);
    }
    return out;
}

std::vector<DeviceSample> Store::query_device(IntervalIndex from, IntervalIndex to, Guid device) const {
    validate_range(from, to);
    if (!catalog_.devices.empty() && catalog_.devices.count(device) == 0) {
        throw StoreError(StoreErrc::UnknownGuid, "device " + device.to_hex());
    }
    std::vector<DeviceSample> out;
    for (const auto& [seg, ref] : frames_in(from, to)) {
        auto commit = load(seg, ref);
        auto it = std::lower_bound(commit.devices.begin(), commit.devices.end(), device,
                                   [](const DeviceRow& row, Guid g) { return row.device < g; });
        if (it != commit.devices.end() && it->device == device) {
            out.push_back({commit.interval, it->metrics});
        }
    }
    return out;
}

std::vector<Event> Store::list_events(IntervalIndex from, IntervalIndex to, const EventFilter& filter) const {
    std::vector<Event> out;
    if (from > to) {
        return out;
    }
    std::shared_lock lock(mutex_);
    for (auto it = events_.lower_bound(EventKey{from, 0, Subject{}}); it != events_.end(); ++it) {
        const auto& e = it->second;
        if (e.interval > to) {
            break;
        }
        if (filter.rule_id && e.rule_id != *filter.rule_id) {
            continue;
        }
        if (filter.subject && e.subject != *filter.subject) {
            continue;
        }
        if (filter.job && std::find(e.jobs.begin(), e.jobs.end(), *filter.job) == e.jobs.end() &&
            !(e.subject.kind == SubjectKind::Job && e.subject.id == *filter.job)) {
            continue;
        }
        out.push_back(e);
    }
    return out;
}

std::vector<JobRecord> Store::jobs() const {
    std::shared_lock lock(mutex_);
    std::vector<JobRecord> out;
    for (const auto& [id, j] : jobs_) {
        out.push_back(j);
    }
    return out;
}

std::optional<JobRecord> Store::job(JobId id) const {
    std::shared_lock lock(mutex_);
    if (auto it = jobs_.find(id); it != jobs_.end()) {
        return it->second;
    }
    return std::nullopt;
}

std::optional<IntervalCommit> Store::read_interval(IntervalIndex interval) const {
    auto frames = frames_in(interval, interval);
    if (frames.empty()) {
        return std::nullopt;
    }
    return load(frames[0].first, frames[0].second);
}

std::vector<IntervalIndex> Store::committed_intervals(IntervalIndex from, IntervalIndex to) const {
    std::vector<IntervalIndex> out;
    std::shared_lock lock(mutex_);
    for (auto it = index_.lower_bound(from); it != index_.end() && it->first <= to; ++it) {
        out.push_back(it->first);
    }
    return out;
}

std::optional<IntervalIndex> Store::last_interval() const {
    std::shared_lock lock(mutex_);
    return last_;
}

StoreStats Store::stats() const {
    std::shared_lock lock(mutex_);
    StoreStats s = counters_;
    s.segments = segments_.size();
    s.intervals = index_.size();
    if (!index_.empty()) {
        s.first_interval = index_.begin()->first;
        s.last_interval = index_.rbegin()->first;
    }
    return s;
}

void Store::dump(IntervalIndex from, IntervalIndex to, std::ostream& out) const {
    for (const auto& [seg, ref] : frames_in(from, to)) {
        out << to_json(load(seg, ref)).dump() << "\n";
    }
}

}  // namespace fabric_lens::store
