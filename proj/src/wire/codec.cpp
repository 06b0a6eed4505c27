// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fabric_lens/wire/codec.hpp"

#include <algorithm>
#include <cstring>

namespace fabric_lens::wire {

namespace {

class Writer {
public:
    explicit Writer(std::span<std::uint8_t> out) : out_(out) {}

    void u8(std::uint8_t v) { out_[pos_++] = v; }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void bytes(const std::uint8_t* p, std::size_t n) {
        std::memcpy(out_.data() + pos_, p, n);
        pos_ += n;
    }
    void zeros(std::size_t n) {
        std::memset(out_.data() + pos_, 0, n);
        pos_ += n;
    }
    std::size_t size() const { return pos_; }

private:
    void put(std::uint64_t v, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            out_[pos_++] = static_cast<std::uint8_t>(v >> (8 * i));
        }
    }

    std::span<std::uint8_t> out_;
    std::size_t pos_ = 0;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint8_t u8() { return in_[pos_++]; }
    std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    std::span<const std::uint8_t> bytes(std::size_t n) {
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    void skip(std::size_t n) { pos_ += n; }

private:
    std::uint64_t get(std::size_t n) {
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < n; ++i) {
            v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
        }
        return v;
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

using u128 = unsigned __int128;

std::optional<std::string> check_stats(const IoStats& s, const char* what) {
    if (s.count == 0) {
        if (s.min != 0 || s.max != 0 || s.sum != 0) {
            return std::string(what) + ": zero count with nonzero bytes";
        }
        return std::nullopt;
    }
    if (s.min > s.max) {
        return std::string(what) + "_min > " + what + "_max";
    }
    if (u128(s.count) * s.min > s.sum || u128(s.count) * s.max < s.sum) {
        return std::string(what) + "_sum outside [count*min, count*max]";
    }
    return std::nullopt;
}

std::optional<std::string> check(const MpiRecord& r) {
    if (r.src_guid == r.dst_guid && r.rank != r.peer_rank) {
        return "src_guid equals dst_guid for distinct ranks";
    }
    return std::nullopt;
}

std::optional<std::string> check(const IoRecord& r) {
    if (r.ost_name.size() >= kOstNameField) {
        return "ost_name longer than 127 bytes";
    }
    if (r.ost_name.find('\0') != std::string::npos) {
        return "ost_name contains NUL";
    }
    if (auto v = check_stats(r.read, "read")) {
        return v;
    }
    return check_stats(r.write, "write");
}

std::optional<std::string> check(const CounterSample& r) {
    if (u128(r.unicast_xmit_bytes) + r.multicast_xmit_bytes > r.xmit_bytes) {
        return "unicast+multicast xmit bytes exceed xmit_bytes";
    }
    if (u128(r.unicast_rcv_bytes) + r.multicast_rcv_bytes > r.rcv_bytes) {
        return "unicast+multicast rcv bytes exceed rcv_bytes";
    }
    return std::nullopt;
}

std::optional<std::string> check(const PortErrorSample&) { return std::nullopt; }

void header(Writer& w, RecordType type, std::uint64_t timestamp) {
    w.u8(kMagic0);
    w.u8(kMagic1);
    w.u8(kVersion);
    w.u8(static_cast<std::uint8_t>(type));
    w.u64(timestamp);
}

template <typename Record>
void require_valid(const Record& r) {
    if (auto v = check(r)) {
        throw WireError(WireErrc::InvariantViolation, *v);
    }
}

void require_room(std::span<std::uint8_t> out, RecordType type) {
    if (out.size() < encoded_size(type)) {
        throw WireError(WireErrc::LengthMismatch, "output buffer too small");
    }
}

DecodeError invariant_error(std::string detail) {
    return DecodeError{WireErrc::InvariantViolation, 0, 0, std::move(detail)};
}

template <typename Record>
DecodeResult validated(Record r) {
    if (auto v = check(r)) {
        return invariant_error(*v);
    }
    return TelemetryRecord(std::move(r));
}

}  // namespace

std::uint64_t timestamp_of(const TelemetryRecord& record) {
    return std::visit([](const auto& r) { return r.timestamp_ns; }, record);
}

std::size_t encoded_size(RecordType type) {
    switch (type) {
        case RecordType::Mpi:
            return kMpiRecordSize;
        case RecordType::Io:
            return kIoRecordSize;
        case RecordType::Counter:
            return kCounterSampleSize;
        case RecordType::PortError:
            return kPortErrorSampleSize;
    }
    return 0;
}

std::size_t encode_into(const MpiRecord& r, std::span<std::uint8_t> out) {
    require_valid(r);
    require_room(out, RecordType::Mpi);
    Writer w(out);
    header(w, RecordType::Mpi, r.timestamp_ns);
    w.u64(r.job_id);
    w.u32(r.rank);
    w.u32(r.peer_rank);
    w.u64(r.src_guid.value);
    w.u64(r.dst_guid.value);
    w.u64(r.bytes_sent);
    w.u64(r.bytes_recv);
    w.u32(r.interval_ms);
    return w.size();
}

std::size_t encode_into(const IoRecord& r, std::span<std::uint8_t> out) {
    if (r.ost_name.size() >= kOstNameField) {
        throw WireError(WireErrc::OstNameTooLong,
                        "ost_name is " + std::to_string(r.ost_name.size()) + " bytes, limit is 127");
    }
    require_valid(r);
    require_room(out, RecordType::Io);
    Writer w(out);
    header(w, RecordType::Io, r.timestamp_ns);
    w.u64(r.job_id);
    w.u32(r.rank);
    w.u32(r.pid);
    w.u64(r.node_guid.value);
    w.bytes(reinterpret_cast<const std::uint8_t*>(r.ost_name.data()), r.ost_name.size());
    w.zeros(kOstNameField - r.ost_name.size());
    w.bytes(r.oss_ip.bytes().data(), 16);
    for (const auto* s : {&r.read, &r.write}) {
        w.u64(s->count);
        w.u64(s->min);
        w.u64(s->max);
        w.u64(s->sum);
    }
    w.u32(r.interval_ms);
    w.zeros(kIoRecordSize - w.size());
    return w.size();
}

std::size_t encode_into(const CounterSample& r, std::span<std::uint8_t> out) {
    require_valid(r);
    require_room(out, RecordType::Counter);
    Writer w(out);
    header(w, RecordType::Counter, r.timestamp_ns);
    w.u64(r.device.value);
    w.u16(r.port);
    w.u16(0);
    for (auto v : {r.xmit_bytes, r.rcv_bytes, r.xmit_pkts, r.rcv_pkts, r.unicast_xmit_bytes, r.unicast_rcv_bytes,
                   r.multicast_xmit_bytes, r.multicast_rcv_bytes}) {
        w.u64(v);
    }
    return w.size();
}

std::size_t encode_into(const PortErrorSample& r, std::span<std::uint8_t> out) {
    require_room(out, RecordType::PortError);
    Writer w(out);
    header(w, RecordType::PortError, r.timestamp_ns);
    w.u64(r.device.value);
    w.u16(r.port);
    w.u16(0);
    for (auto v : {r.link_downed, r.xmt_discards, r.rcv_errors, r.vl15_dropped}) {
        w.u64(v);
    }
    return w.size();
}

std::vector<std::uint8_t> encode_record(const TelemetryRecord& record) {
    std::vector<std::uint8_t> out(kMaxRecordSize);
    auto n = std::visit([&](const auto& r) { return encode_into(r, out); }, record);
    out.resize(n);
    return out;
}

std::optional<std::string> check_invariants(const TelemetryRecord& record) {
    return std::visit([](const auto& r) { return check(r); }, record);
}

DecodeResult decode_record(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) {
        return DecodeError{WireErrc::LengthMismatch, 4, bytes.size(), "frame shorter than its header"};
    }
    if (bytes[0] != kMagic0 || bytes[1] != kMagic1) {
        return DecodeError{WireErrc::BadMagic, 0, 0, "bad magic"};
    }
    if (bytes[2] != kVersion) {
        return DecodeError{WireErrc::UnknownVersion, 0, 0, "version " + std::to_string(bytes[2])};
    }
    const auto type = static_cast<RecordType>(bytes[3]);
    if (bytes[3] < 0x01 || bytes[3] > 0x04) {
        return DecodeError{WireErrc::UnknownType, 0, 0, "type " + std::to_string(bytes[3])};
    }
    const auto expected = encoded_size(type);
    if (bytes.size() != expected) {
        return DecodeError{WireErrc::LengthMismatch, expected, bytes.size(),
                           "expected " + std::to_string(expected) + " bytes, got " + std::to_string(bytes.size())};
    }

    Reader r(bytes);
    r.skip(4);
    switch (type) {
        case RecordType::Mpi: {
            MpiRecord m;
            m.timestamp_ns = r.u64();
            m.job_id = r.u64();
            m.rank = r.u32();
            m.peer_rank = r.u32();
            m.src_guid = Guid{r.u64()};
            m.dst_guid = Guid{r.u64()};
            m.bytes_sent = r.u64();
            m.bytes_recv = r.u64();
            m.interval_ms = r.u32();
            return validated(std::move(m));
        }
        case RecordType::Io: {
            IoRecord io;
            io.timestamp_ns = r.u64();
            io.job_id = r.u64();
            io.rank = r.u32();
            io.pid = r.u32();
            io.node_guid = Guid{r.u64()};
            auto name = r.bytes(kOstNameField);
            if (name.back() != 0) {
                return invariant_error("ost_name is not NUL terminated");
            }
            auto nul = std::find(name.begin(), name.end(), std::uint8_t{0});
            io.ost_name.assign(name.begin(), nul);
            std::array<std::uint8_t, 16> ip{};
            auto ip_bytes = r.bytes(16);
            std::copy(ip_bytes.begin(), ip_bytes.end(), ip.begin());
            io.oss_ip = IpAddress(ip);
            for (auto* s : {&io.read, &io.write}) {
                s->count = r.u64();
                s->min = r.u64();
                s->max = r.u64();
                s->sum = r.u64();
            }
            io.interval_ms = r.u32();
            return validated(std::move(io));
        }
        case RecordType::Counter: {
            CounterSample c;
            c.timestamp_ns = r.u64();
            c.device = Guid{r.u64()};
            c.port = r.u16();
            r.skip(2);
            c.xmit_bytes = r.u64();
            c.rcv_bytes = r.u64();
            c.xmit_pkts = r.u64();
            c.rcv_pkts = r.u64();
            c.unicast_xmit_bytes = r.u64();
            c.unicast_rcv_bytes = r.u64();
            c.multicast_xmit_bytes = r.u64();
            c.multicast_rcv_bytes = r.u64();
            return validated(std::move(c));
        }
        case RecordType::PortError: {
            PortErrorSample e;
            e.timestamp_ns = r.u64();
            e.device = Guid{r.u64()};
            e.port = r.u16();
            r.skip(2);
            e.link_downed = r.u64();
            e.xmt_discards = r.u64();
            e.rcv_errors = r.u64();
            e.vl15_dropped = r.u64();
            return validated(std::move(e));
        }
    }
    return DecodeError{WireErrc::UnknownType, 0, 0, "unreachable"};
}

double expected_io_rate(std::uint64_t num_procs, std::uint64_t num_osts, double frequency_hz) {
    return static_cast<double>(num_procs) * static_cast<double>(kIoRecordSize) * static_cast<double>(num_osts) *
           frequency_hz;
}

}  // namespace fabric_lens::wire
