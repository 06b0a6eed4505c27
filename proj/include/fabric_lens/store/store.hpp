// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "fabric_lens/common/error.hpp"
#include "fabric_lens/store/types.hpp"

namespace fabric_lens::store {

enum class StoreErrc { TooLate, StorageFull, UnknownLink, UnknownJob, UnknownGuid, InvalidRange, IntervalMismatch, Io };
using StoreError = CodedError<StoreErrc>;

inline constexpr IntervalIndex kGraceIntervals = 2;
inline constexpr IntervalIndex kIntervalsPerSegment = 1000;

struct StoreOptions {
    std::size_t max_segments = 0;        // 0: unlimited; oldest segments go first
    std::uint64_t max_total_bytes = 0;   // 0: unlimited; otherwise StorageFull
    bool sync = true;                    // fdatasync after every commit
    // Open for queries only: nothing is created, cut or written, so a
    // running writer is left alone. Writes throw Io.
    bool read_only = false;
};

// What queries validate against.
struct StoreCatalog {
    std::size_t link_count = 0;
    std::set<Guid> devices;
};

struct LinkFilter {
    std::set<LinkId> links;     // empty: all links
    std::optional<JobId> job;   // keep only rows and slices of this job
};

struct LinkSeries {
    std::vector<correlate::LinkBreakdown> rows;  // by (interval, link)
    std::vector<IntervalIndex> gaps;             // intervals in range with no commit
};

struct DeviceSample {
    IntervalIndex interval = 0;
    correlate::DeviceMetrics metrics;

    bool operator==(const DeviceSample&) const = default;
};

struct EventFilter {
    std::optional<std::uint64_t> rule_id;
    std::optional<Subject> subject;
    std::optional<JobId> job;
};

struct StoreStats {
    std::size_t segments = 0;
    std::uint64_t bytes = 0;
    std::size_t intervals = 0;
    std::uint64_t frames = 0;
    std::uint64_t skipped_identical = 0;
    std::uint64_t recovered_truncations = 0;
    std::optional<IntervalIndex> first_interval;
    std::optional<IntervalIndex> last_interval;
};

// Append-only, segmented interval log with an in-memory index rebuilt on
// open. One writer, any number of readers; readers see whole commits only.
class Store {
public:
    // Creates the directory when missing. A torn frame at the end of a
    // segment (crash mid-write) is cut off.
    static std::unique_ptr<Store> open(const std::filesystem::path& dir, StoreCatalog catalog,
                                       std::uint32_t interval_ms, StoreOptions options = {});
    ~Store();

    // Interval length recorded in `dir`, if a store lives there.
    static std::optional<std::uint32_t> stored_interval_ms(const std::filesystem::path& dir);

    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    // Replaces the link and device rows of `commit.interval`; events upsert
    // by (rule, subject, interval) and jobs by id. Re-appending identical
    // data writes nothing. Throws TooLate, StorageFull.
    void append(const IntervalCommit& commit);

    // Rules are kept as opaque text keyed by id.
    void put_rule(std::uint64_t id, const std::string& text);
    void delete_rule(std::uint64_t id);
    std::map<std::uint64_t, std::string> rules() const;
    // Largest rule id ever written, deleted ones included; 0 when none.
    std::uint64_t max_rule_id() const;

    LinkSeries query_links(IntervalIndex from, IntervalIndex to, const LinkFilter& filter = {}) const;
    std::vector<DeviceSample> query_device(IntervalIndex from, IntervalIndex to, Guid device) const;
    std::vector<Event> list_events(IntervalIndex from, IntervalIndex to, const EventFilter& filter = {}) const;
    std::vector<JobRecord> jobs() const;
    std::optional<JobRecord> job(JobId id) const;
    std::optional<IntervalCommit> read_interval(IntervalIndex interval) const;
    std::vector<IntervalIndex> committed_intervals(IntervalIndex from, IntervalIndex to) const;

    std::optional<IntervalIndex> last_interval() const;
    StoreStats stats() const;
    std::uint32_t interval_ms() const { return interval_ms_; }
    const StoreCatalog& catalog() const { return catalog_; }

    // Line-delimited JSON of every commit in [from, to].
    void dump(IntervalIndex from, IntervalIndex to, std::ostream& out) const;

private:
    struct Segment;
    struct FrameRef {
        std::int64_t segment = 0;
        std::uint64_t offset = 0;
        std::uint32_t length = 0;
        std::uint32_t crc = 0;
    };
    using EventKey = std::tuple<IntervalIndex, std::uint64_t, Subject>;

    Store(std::filesystem::path dir, StoreCatalog catalog, std::uint32_t interval_ms, StoreOptions options);

    void recover();
    void apply(const IntervalCommit& commit, const FrameRef& ref);
    void apply_rule_frame(const std::string& payload);
    void write_frame(std::int64_t segment, const std::string& payload, FrameRef& ref);
    Segment& segment_for_write(std::int64_t segment);
    void enforce_retention();
    IntervalCommit load(const std::shared_ptr<Segment>& segment, const FrameRef& ref) const;
    std::vector<std::pair<std::shared_ptr<Segment>, FrameRef>> frames_in(IntervalIndex from, IntervalIndex to) const;
    void validate_range(IntervalIndex from, IntervalIndex to) const;

    std::filesystem::path dir_;
    StoreCatalog catalog_;
    std::uint32_t interval_ms_ = 0;
    StoreOptions options_;

    std::mutex write_mutex_;
    mutable std::shared_mutex mutex_;
    std::map<std::int64_t, std::shared_ptr<Segment>> segments_;
    int rules_fd_ = -1;
    std::map<IntervalIndex, FrameRef> index_;
    std::map<EventKey, Event> events_;
    std::map<JobId, JobRecord> jobs_;
    std::map<std::uint64_t, std::string> rules_;
    std::uint64_t max_rule_id_ = 0;
    std::optional<IntervalIndex> last_;
    StoreStats counters_;
};

}  // namespace fabric_lens::store
