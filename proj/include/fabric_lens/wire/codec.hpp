// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fabric_lens/common/error.hpp"
#include "fabric_lens/wire/records.hpp"

namespace fabric_lens::wire {

// Frame layout: 'I' 'N' | version | type | fixed little-endian body.
inline constexpr std::uint8_t kMagic0 = 0x49;
inline constexpr std::uint8_t kMagic1 = 0x4E;
inline constexpr std::uint8_t kVersion = 1;

enum class RecordType : std::uint8_t { Mpi = 0x01, Io = 0x02, Counter = 0x03, PortError = 0x04 };

inline constexpr std::size_t kMpiRecordSize = 64;
inline constexpr std::size_t kIoRecordSize = 311;
inline constexpr std::size_t kCounterSampleSize = 88;
inline constexpr std::size_t kPortErrorSampleSize = 56;
inline constexpr std::size_t kMaxRecordSize = kIoRecordSize;
inline constexpr std::size_t kOstNameField = 128;

enum class WireErrc {
    BadMagic,
    UnknownVersion,
    UnknownType,
    LengthMismatch,
    InvariantViolation,
    OstNameTooLong,
};

using WireError = CodedError<WireErrc>;

struct DecodeError {
    WireErrc code = WireErrc::BadMagic;
    std::size_t expected = 0;  // LengthMismatch only
    std::size_t got = 0;       // LengthMismatch only
    std::string detail;
};

// Outcome of decoding one datagram. Never throws.
class DecodeResult {
public:
    DecodeResult(TelemetryRecord record) : value_(std::move(record)) {}
    DecodeResult(DecodeError error) : value_(std::move(error)) {}

    bool ok() const { return value_.index() == 0; }
    explicit operator bool() const { return ok(); }

    const TelemetryRecord& record() const { return std::get<TelemetryRecord>(value_); }
    TelemetryRecord& record() { return std::get<TelemetryRecord>(value_); }
    const DecodeError& error() const { return std::get<DecodeError>(value_); }

private:
    std::variant<TelemetryRecord, DecodeError> value_;
};

std::size_t encoded_size(RecordType type);

// Writes one frame into `out` (which must hold encoded_size bytes) and returns
// the number of bytes written. Throws WireError (OstNameTooLong or
// InvariantViolation) for records that break their invariants.
std::size_t encode_into(const MpiRecord& record, std::span<std::uint8_t> out);
std::size_t encode_into(const IoRecord& record, std::span<std::uint8_t> out);
std::size_t encode_into(const CounterSample& record, std::span<std::uint8_t> out);
std::size_t encode_into(const PortErrorSample& record, std::span<std::uint8_t> out);

std::vector<std::uint8_t> encode_record(const TelemetryRecord& record);

DecodeResult decode_record(std::span<const std::uint8_t> bytes);

// Invariant check shared by encoder and decoder; returns the violation, if any.
std::optional<std::string> check_invariants(const TelemetryRecord& record);

// Expected Lustre telemetry volume in bytes per second:
// procs x 311-byte record x OSTs x sampling frequency.
double expected_io_rate(std::uint64_t num_procs, std::uint64_t num_osts, double frequency_hz);

}  // namespace fabric_lens::wire
