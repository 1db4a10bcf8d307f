#include <doctest.h>

#include <fstream>
#include <random>

#include "oracles.hpp"
#include "qrs/wire.hpp"

using namespace qrs;
using namespace qrs::wire;

namespace {

std::vector<std::uint8_t> read_fixture(const std::string& name) {
    std::ifstream in(std::string(QRS_FIXTURE_DIR) + "/" + name, std::ios::binary);
    REQUIRE(in.good());
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
}

DetectorAlarm sample_alarm() {
    DetectorAlarm m;
    m.connector_id = 1;
    m.failed_station = 7;
    m.failed_qos = {1'000'000, 1000, 5000, Priority::streaming};
    return m;
}

}  // namespace

TEST_CASE("detector alarm encodes to the frozen layout") {
    auto bytes = encode(sample_alarm());
    auto golden = read_fixture("detector_alarm.bin");
    CHECK(bytes == golden);
    // 6-byte header, then a self-covering u16 length: total = 6 + body_len.
    REQUIRE(bytes.size() == 33);
    CHECK(bytes[0] == 0x51);
    CHECK(bytes[1] == 0x4D);
    CHECK(bytes[2] == 0x52);
    CHECK(bytes[3] == 0x53);
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 8);
    std::uint16_t body_len = static_cast<std::uint16_t>(bytes[6] << 8 | bytes[7]);
    CHECK(bytes.size() == 6u + body_len);
}

TEST_CASE("golden frames decode to their messages") {
    CHECK(decode(read_fixture("detector_alarm.bin")) == Message{sample_alarm()});

    RouteReply empty;
    empty.connector_id = 2;
    CHECK(decode(read_fixture("route_reply_empty.bin")) == Message{empty});

    SenderUpdate update;
    update.connector_id = 3;
    update.stream_id = 9;
    update.new_path = Path{{0, 1, 2}};
    update.flowspec = {2'000'000, 1500, 250, Priority::interactive};
    CHECK(decode(read_fixture("sender_update.bin")) == Message{update});

    CumulativeAlarm cum;
    cum.connector_id = 4;
    cum.entries = {{11, {500'000, 1000, 3000, Priority::streaming}},
                   {12, {500'000, 1000, 3000, Priority::streaming}}};
    CHECK(decode(read_fixture("cumulative_alarm.bin")) == Message{cum});
}

TEST_CASE("round trip over generated messages") {
    std::mt19937_64 rng(0x51525354);
    for (int i = 0; i < 2000; ++i) {
        Message m = oracle::random_message(rng);
        auto bytes = encode(m);
        CHECK(decode(bytes) == m);
    }
}

TEST_CASE("equal messages produce identical bytes") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        Message m = oracle::random_message(rng);
        CHECK(encode(m) == encode(m));
    }
}

TEST_CASE("decode errors name kind and offset") {
    auto bytes = encode(sample_alarm());

    SUBCASE("corrupted magic") {
        bytes[0] ^= 0xFF;
        CHECK_THROWS_AS(decode(bytes), DecodeError);
        try {
            decode(bytes);
        } catch (const DecodeError& e) {
            CHECK(e.code() == DecodeErrc::bad_magic);
            CHECK(e.offset() == 0);
        }
    }
    SUBCASE("bad version") {
        bytes[4] = 9;
        try {
            decode(bytes);
            FAIL("expected DecodeError");
        } catch (const DecodeError& e) {
            CHECK(e.code() == DecodeErrc::bad_version);
            CHECK(e.offset() == 4);
        }
    }
    SUBCASE("unknown type") {
        bytes[5] = 0xEE;
        try {
            decode(bytes);
            FAIL("expected DecodeError");
        } catch (const DecodeError& e) {
            CHECK(e.code() == DecodeErrc::unknown_type);
            CHECK(e.offset() == 5);
        }
    }
    SUBCASE("body truncated by one byte") {
        bytes.pop_back();
        try {
            decode(bytes);
            FAIL("expected DecodeError");
        } catch (const DecodeError& e) {
            CHECK(e.code() == DecodeErrc::truncated_body);
            CHECK(e.offset() == bytes.size());
        }
    }
    SUBCASE("trailing byte") {
        bytes.push_back(0);
        try {
            decode(bytes);
            FAIL("expected DecodeError");
        } catch (const DecodeError& e) {
            CHECK(e.code() == DecodeErrc::trailing_bytes);
            CHECK(e.offset() == bytes.size() - 1);
        }
    }
}

TEST_CASE("decode never succeeds silently on corrupted frames") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 500; ++i) {
        Message m = oracle::random_message(rng);
        auto bytes = encode(m);
        std::size_t pos = rng() % bytes.size();
        std::uint8_t flip = static_cast<std::uint8_t>(1 + rng() % 255);
        bytes[pos] ^= flip;
        // Either decodes to some message or throws a named error; any other
        // escape is a bug.
        try {
            (void)decode(bytes);
        } catch (const DecodeError&) {
        }
    }
}

TEST_CASE("oversize body is rejected at encode time") {
    RouteReply huge;
    huge.connector_id = 1;
    Path long_path;
    for (StationId i = 0; i < 4000; ++i) long_path.stations.push_back(i);
    for (int i = 0; i < 5; ++i) huge.alternatives.push_back(long_path);
    CHECK_THROWS_AS(encode(Message{huge}), OversizeBody);
}

TEST_CASE("batch_alarms keeps order and connector id") {
    std::vector<DetectorAlarm> alarms;
    for (StationId s : {5u, 3u, 9u, 3u, 7u}) {
        DetectorAlarm a = sample_alarm();
        a.failed_station = s;
        alarms.push_back(a);
    }
    CumulativeAlarm batch = batch_alarms(alarms);
    CHECK(batch.connector_id == 1);
    REQUIRE(batch.entries.size() == 5);
    for (std::size_t i = 0; i < alarms.size(); ++i) {
        CHECK(batch.entries[i].first == alarms[i].failed_station);
        CHECK(batch.entries[i].second == alarms[i].failed_qos);
    }
}

TEST_CASE("batch of one unprefixed returns the same alarm") {
    std::vector<DetectorAlarm> one{sample_alarm()};
    CumulativeAlarm batch = batch_alarms(one);
    REQUIRE(batch.entries.size() == 1);
    CHECK(batch.entries[0].first == one[0].failed_station);
    CHECK(batch.entries[0].second == one[0].failed_qos);
}

TEST_CASE("batch_alarms rejects mixed connectors and empty input") {
    std::vector<DetectorAlarm> mixed{sample_alarm(), sample_alarm()};
    mixed[1].connector_id = 2;
    CHECK_THROWS_AS(batch_alarms(mixed), MixedConnector);
    CHECK_THROWS_AS(batch_alarms({}), EmptyBatch);
}
