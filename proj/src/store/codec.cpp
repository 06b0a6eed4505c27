// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/store/codec.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>

namespace fabric_lens::store {

namespace {

class Writer {
public:
    void byte(std::uint8_t b) { out_.push_back(static_cast<char>(b)); }
    void varint(std::uint64_t v) {
        while (v >= 0x80) {
            byte(static_cast<std::uint8_t>(v | 0x80));
            v >>= 7;
        }
        byte(static_cast<std::uint8_t>(v));
    }
    void svarint(std::int64_t v) { varint((static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63)); }
    void fixed64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            byte(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }
    void real(double d) { fixed64(std::bit_cast<std::uint64_t>(d)); }
    void str(std::string_view s) {
        varint(s.size());
        out_.append(s);
    }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(std::string_view in) : in_(in) {}

    std::uint8_t byte() {
        need(1);
        return static_cast<std::uint8_t>(in_[pos_++]);
    }
    std::uint64_t varint() {
        std::uint64_t v = 0;
        for (int shift = 0; shift < 64; shift += 7) {
            auto b = byte();
            v |= std::uint64_t{b & 0x7fu} << shift;
            if ((b & 0x80) == 0) {
                return v;
            }
        }
        throw std::runtime_error("varint too long");
    }
    std::int64_t svarint() {
        auto v = varint();
        return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1);
    }
    std::uint64_t fixed64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= std::uint64_t{byte()} << (8 * i);
        }
        return v;
    }
    double real() { return std::bit_cast<double>(fixed64()); }
    std::string str() {
        auto n = count();
        need(n);
        std::string s(in_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    // Element counts can never exceed the bytes left.
    std::size_t count() {
        auto n = varint();
        if (n > in_.size() - pos_) {
            throw std::runtime_error("count exceeds payload");
        }
        return static_cast<std::size_t>(n);
    }
    bool done() const { return pos_ == in_.size(); }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) {
            throw std::runtime_error("payload truncated");
        }
    }
    std::string_view in_;
    std::size_t pos_ = 0;
};

void put_metrics(Writer& w, const correlate::DeviceMetrics& m) {
    for (auto v : {m.unicast_sent, m.unicast_recv, m.multicast_sent, m.multicast_recv, m.mpi_sent, m.mpi_recv,
                   m.io_sent, m.io_recv, m.total_sent, m.total_recv}) {
        w.varint(v);
    }
}

correlate::DeviceMetrics get_metrics(Reader& r) {
    correlate::DeviceMetrics m;
    for (auto* v : {&m.unicast_sent, &m.unicast_recv, &m.multicast_sent, &m.multicast_recv, &m.mpi_sent, &m.mpi_recv,
                    &m.io_sent, &m.io_recv, &m.total_sent, &m.total_recv}) {
        *v = r.varint();
    }
    return m;
}

}  // namespace

std::uint32_t crc32_of(std::string_view bytes) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

std::string encode_commit(const IntervalCommit& c) {
    Writer w;
    w.byte(static_cast<std::uint8_t>(FrameKind::Commit));
    w.byte(kFormatVersion);
    w.svarint(c.interval);
    w.varint(c.interval_ms);

    w.varint(c.links.size());
    for (const auto& l : c.links) {
        w.varint(l.link.value);
        for (const auto& d : l.dir) {
            w.varint(d.total);
            w.varint(d.mpi);
            w.varint(d.io);
            w.varint(d.unicast);
            w.varint(d.multicast);
            w.varint(d.per_job.size());
            for (const auto& [job, bytes] : d.per_job) {
                w.varint(job);
                w.varint(bytes.mpi);
                w.varint(bytes.io);
            }
        }
    }

    w.varint(c.devices.size());
    for (const auto& d : c.devices) {
        w.fixed64(d.device.value);
        put_metrics(w, d.metrics);
    }

    w.varint(c.events.size());
    for (const auto& e : c.events) {
        w.fixed64(e.id);
        w.svarint(e.interval);
        w.varint(e.timestamp_ns);
        w.varint(e.rule_id);
        w.byte(static_cast<std::uint8_t>(e.subject.kind));
        w.varint(e.subject.id);
        w.varint(e.values.size());
        for (double v : e.values) {
            w.real(v);
        }
        w.varint(e.jobs.size());
        for (auto j : e.jobs) {
            w.varint(j);
        }
        w.str(e.detail);
    }

    w.varint(c.jobs.size());
    for (const auto& j : c.jobs) {
        w.varint(j.id);
        w.svarint(j.first);
        w.svarint(j.last);
        w.byte(static_cast<std::uint8_t>(j.source));
        w.varint(j.nodes.size());
        for (auto g : j.nodes) {
            w.fixed64(g.value);
        }
    }

    w.varint(c.quarantine.size());
    for (const auto& q : c.quarantine) {
        w.byte(static_cast<std::uint8_t>(q.reason));
        w.varint(q.job);
        w.varint(q.bytes);
        w.str(q.detail);
    }
    return w.take();
}

IntervalCommit decode_commit(std::string_view payload) {
    Reader r(payload);
    if (r.byte() != static_cast<std::uint8_t>(FrameKind::Commit)) {
        throw std::runtime_error("not a commit frame");
    }
    if (r.byte() != kFormatVersion) {
        throw std::runtime_error("unsupported store format version");
    }
    IntervalCommit c;
    c.interval = r.svarint();
    c.interval_ms = static_cast<std::uint32_t>(r.varint());

    c.links.resize(r.count());
    for (auto& l : c.links) {
        l.link = LinkId{static_cast<std::uint32_t>(r.varint())};
        l.interval = c.interval;
        for (auto& d : l.dir) {
            d.total = r.varint();
            d.mpi = r.varint();
            d.io = r.varint();
            d.unicast = r.varint();
            d.multicast = r.varint();
            const auto jobs = r.count();
            for (std::size_t i = 0; i < jobs; ++i) {
                auto job = r.varint();
                auto& b = d.per_job[job];
                b.mpi = r.varint();
                b.io = r.varint();
            }
        }
    }

    c.devices.resize(r.count());
    for (auto& d : c.devices) {
        d.device = Guid{r.fixed64()};
        d.metrics = get_metrics(r);
    }

    c.events.resize(r.count());
    for (auto& e : c.events) {
        e.id = r.fixed64();
        e.interval = r.svarint();
        e.timestamp_ns = r.varint();
        e.rule_id = r.varint();
        auto kind = r.byte();
        if (kind > static_cast<std::uint8_t>(SubjectKind::Job)) {
            throw std::runtime_error("bad subject kind");
        }
        e.subject.kind = static_cast<SubjectKind>(kind);
        e.subject.id = r.varint();
        e.values.resize(r.count());
        for (auto& v : e.values) {
            v = r.real();
        }
        e.jobs.resize(r.count());
        for (auto& j : e.jobs) {
            j = r.varint();
        }
        e.detail = r.str();
    }

    c.jobs.resize(r.count());
    for (auto& j : c.jobs) {
        j.id = r.varint();
        j.first = r.svarint();
        j.last = r.svarint();
        auto source = r.byte();
        if (source > static_cast<std::uint8_t>(JobSource::External)) {
            throw std::runtime_error("bad job source");
        }
        j.source = static_cast<JobSource>(source);
        j.nodes.resize(r.count());
        for (auto& g : j.nodes) {
            g = Guid{r.fixed64()};
        }
    }

    c.quarantine.resize(r.count());
    for (auto& q : c.quarantine) {
        auto reason = r.byte();
        if (reason > static_cast<std::uint8_t>(correlate::QuarantineReason::UnknownPort)) {
            throw std::runtime_error("bad quarantine reason");
        }
        q.reason = static_cast<correlate::QuarantineReason>(reason);
        q.job = r.varint();
        q.bytes = r.varint();
        q.detail = r.str();
    }
    if (!r.done()) {
        throw std::runtime_error("trailing bytes in commit frame");
    }
    return c;
}

std::string encode_rule_put(std::uint64_t id, const std::string& text) {
    Writer w;
    w.byte(static_cast<std::uint8_t>(FrameKind::RulePut));
    w.varint(id);
    w.str(text);
    return w.take();
}

std::string encode_rule_delete(std::uint64_t id) {
    Writer w;
    w.byte(static_cast<std::uint8_t>(FrameKind::RuleDelete));
    w.varint(id);
    return w.take();
}

RuleFrame decode_rule_frame(std::string_view payload) {
    Reader r(payload);
    RuleFrame f;
    const auto kind = r.byte();
    if (kind == static_cast<std::uint8_t>(FrameKind::RulePut)) {
        f.kind = FrameKind::RulePut;
        f.id = r.varint();
        f.text = r.str();
    } else if (kind == static_cast<std::uint8_t>(FrameKind::RuleDelete)) {
        f.kind = FrameKind::RuleDelete;
        f.id = r.varint();
    } else {
        throw std::runtime_error("not a rule frame");
    }
    if (!r.done()) {
        throw std::runtime_error("trailing bytes in rule frame");
    }
    return f;
}

}  // namespace fabric_lens::store
