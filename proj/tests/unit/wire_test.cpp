// SPDX-FileCopyrightText: © 2026 The fabric-lens Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "fabric_lens/wire/codec.hpp"
#include "record_generators.hpp"

namespace fabric_lens::wire {
namespace {

IoRecord sample_io() {
    IoRecord r;
    r.timestamp_ns = 1'700'000'000'000'000'000ull;
    r.job_id = 727431;
    r.rank = 3;
    r.pid = 4242;
    r.node_guid = Guid{0x0002c90300000001};
    r.ost_name = "scratch-OST0007";
    r.oss_ip = *IpAddress::parse("10.0.9.1");
    r.read = {2, 100, 300, 400};
    r.write = {1, 1 << 20, 1 << 20, 1 << 20};
    r.interval_ms = 5000;
    return r;
}

TEST(Encode, IoRecordIsExactly311Bytes) {
    auto bytes = encode_record(sample_io());
    EXPECT_EQ(bytes.size(), 311u);
    EXPECT_EQ(bytes[3], 0x02);
    // ost_name starts at offset 36, oss_ip at 164, interval at 244.
    EXPECT_EQ(std::string(bytes.begin() + 36, bytes.begin() + 36 + 15), "scratch-OST0007");
    EXPECT_EQ(bytes[164 + 10], 0xff);
    EXPECT_EQ(bytes[164 + 12], 10);
    EXPECT_EQ(bytes[244] | (bytes[245] << 8), 5000);
    for (std::size_t i = 248; i < 311; ++i) {
        EXPECT_EQ(bytes[i], 0) << i;
    }
}

TEST(Encode, ZeroMpiRecordCarriesMagicHeader) {
    auto bytes = encode_record(MpiRecord{});
    ASSERT_EQ(bytes.size(), 64u);
    EXPECT_EQ(bytes[0], 0x49);
    EXPECT_EQ(bytes[1], 0x4E);
    EXPECT_EQ(bytes[2], 1);
    EXPECT_EQ(bytes[3], 0x01);
}

TEST(Encode, FrameSizesAreFrozen) {
    EXPECT_EQ(encode_record(CounterSample{}).size(), 88u);
    EXPECT_EQ(encode_record(PortErrorSample{}).size(), 56u);
    EXPECT_EQ(encode_record(IoRecord{}).size(), 311u);
}

TEST(Encode, CounterSampleLayout) {
    CounterSample c;
    c.device = Guid{0x1122334455667788};
    c.port = 0x0102;
    c.xmit_bytes = 9;
    c.unicast_xmit_bytes = 7;
    c.multicast_rcv_bytes = 0;
    auto bytes = encode_record(c);
    EXPECT_EQ(bytes[12], 0x88);
    EXPECT_EQ(bytes[19], 0x11);
    EXPECT_EQ(bytes[20], 0x02);
    EXPECT_EQ(bytes[21], 0x01);
    EXPECT_EQ(bytes[24], 9);       // xmit_bytes
    EXPECT_EQ(bytes[24 + 32], 7);  // unicast_xmit_bytes
}

TEST(Encode, OverlongOstNameIsRejected) {
    auto r = sample_io();
    r.ost_name.assign(128, 'x');
    try {
        encode_record(r);
        FAIL();
    } catch (const WireError& e) {
        EXPECT_EQ(e.code(), WireErrc::OstNameTooLong);
    }
    r.ost_name.assign(127, 'x');
    EXPECT_EQ(encode_record(r).size(), 311u);
}

TEST(Encode, InvalidRecordIsRejected) {
    auto r = sample_io();
    r.read = {1, 9, 3, 5};
    EXPECT_THROW(encode_record(r), WireError);
}

TEST(Decode, RoundTripsRandomRecords) {
    testing::RecordGenerator gen(0x5eed);
    for (int i = 0; i < 10'000; ++i) {
        auto record = gen.any();
        auto bytes = encode_record(record);
        auto decoded = decode_record(bytes);
        ASSERT_TRUE(decoded.ok()) << decoded.error().detail;
        ASSERT_EQ(decoded.record(), record) << "case " << i;
    }
}

TEST(Decode, IoFrameDecodesToIoRecord) {
    auto bytes = encode_record(sample_io());
    auto decoded = decode_record(bytes);
    ASSERT_TRUE(decoded.ok());
    ASSERT_TRUE(std::holds_alternative<IoRecord>(decoded.record()));
    EXPECT_EQ(std::get<IoRecord>(decoded.record()), sample_io());
}

TEST(Decode, ShortIoFrameIsLengthMismatch) {
    auto bytes = encode_record(sample_io());
    bytes.pop_back();
    auto decoded = decode_record(bytes);
    ASSERT_FALSE(decoded.ok());
    EXPECT_EQ(decoded.error().code, WireErrc::LengthMismatch);
    EXPECT_EQ(decoded.error().expected, 311u);
    EXPECT_EQ(decoded.error().got, 310u);
}

TEST(Decode, InconsistentReadStatsAreInvariantViolations) {
    auto bytes = encode_record(sample_io());
    // read_min at offset 188, read_max at 196.
    bytes[188] = 9;
    std::fill(bytes.begin() + 189, bytes.begin() + 196, 0);
    bytes[196] = 3;
    std::fill(bytes.begin() + 197, bytes.begin() + 204, 0);
    auto decoded = decode_record(bytes);
    ASSERT_FALSE(decoded.ok());
    EXPECT_EQ(decoded.error().code, WireErrc::InvariantViolation);
}

TEST(Decode, HeaderErrors) {
    auto bytes = encode_record(MpiRecord{});
    auto bad = bytes;
    bad[0] = 0;
    EXPECT_EQ(decode_record(bad).error().code, WireErrc::BadMagic);
    bad = bytes;
    bad[2] = 2;
    EXPECT_EQ(decode_record(bad).error().code, WireErrc::UnknownVersion);
    bad = bytes;
    bad[3] = 0x09;
    EXPECT_EQ(decode_record(bad).error().code, WireErrc::UnknownType);
    EXPECT_EQ(decode_record(std::span<const std::uint8_t>{}).error().code, WireErrc::LengthMismatch);
}

TEST(Decode, MpiSelfGuidWithDistinctRanksIsRejected) {
    MpiRecord m;
    m.rank = 1;
    m.peer_rank = 2;
    auto bytes = encode_record(MpiRecord{});
    bytes[20] = 1;
    bytes[24] = 2;
    EXPECT_EQ(decode_record(bytes).error().code, WireErrc::InvariantViolation);
    EXPECT_THROW(encode_record(m), WireError);
}

TEST(Decode, CounterClassesAboveTotalAreRejected) {
    CounterSample c;
    c.xmit_bytes = 10;
    c.unicast_xmit_bytes = 10;
    auto bytes = encode_record(c);
    bytes[24 + 48] = 1;  // multicast_xmit_bytes = 1
    EXPECT_EQ(decode_record(bytes).error().code, WireErrc::InvariantViolation);
}

TEST(Decode, ArbitraryBytesNeverThrow) {
    std::mt19937_64 rng(99);
    testing::RecordGenerator gen(7);
    for (int i = 0; i < 20'000; ++i) {
        std::vector<std::uint8_t> bytes;
        if (i % 2 == 0) {
            bytes.resize(rng() % 400);
            for (auto& b : bytes) {
                b = static_cast<std::uint8_t>(rng());
            }
        } else {
            // Mutate a valid frame: flip one byte, possibly truncate.
            bytes = encode_record(gen.any());
            bytes[rng() % bytes.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
            if (rng() % 4 == 0) {
                bytes.resize(rng() % bytes.size());
            }
        }
        auto decoded = decode_record(bytes);
        if (decoded.ok()) {
            EXPECT_FALSE(check_invariants(decoded.record()).has_value());
            EXPECT_EQ(encode_record(decoded.record()).size(), bytes.size());
        }
    }
}

TEST(ExpectedIoRate, UnitCase) { EXPECT_DOUBLE_EQ(expected_io_rate(1, 1, 1.0), 311.0); }

TEST(ExpectedIoRate, ProductionScale) { EXPECT_DOUBLE_EQ(expected_io_rate(4096, 8, 0.2), 2'038'169.6); }

TEST(ExpectedIoRate, ZeroProcs) { EXPECT_EQ(expected_io_rate(0, 8, 1.0), 0.0); }

}  // namespace
}  // namespace fabric_lens::wire
