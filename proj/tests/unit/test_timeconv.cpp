#include "emotrack/ingest.hpp"
#include "emotrack/timeconv.hpp"
#include "testutil.hpp"

#include <doctest.h>

#include <random>

using namespace emotrack;

TEST_CASE("Europe/London conversion examples") {
    CHECK(ingest::convert_time("2024-01-15T12:00:00Z") == "2024-01-15 12:00:00");
    CHECK(ingest::convert_time("2024-04-22T19:30:00Z") == "2024-04-22 20:30:00");
    CHECK(ingest::convert_time("2024-03-31T00:59:59Z") == "2024-03-31 00:59:59");
    CHECK(ingest::convert_time("2024-03-31T01:00:00Z") == "2024-03-31 02:00:00");
    CHECK(ingest::convert_time("2024-10-27T00:59:59Z") == "2024-10-27 01:59:59");
    CHECK(ingest::convert_time("2024-10-27T01:00:00Z") == "2024-10-27 01:00:00");
}

TEST_CASE("offsets and fractional seconds") {
    CHECK(ingest::convert_time("2024-04-22T21:30:00+02:00") == "2024-04-22 20:30:00");
    CHECK(ingest::convert_time("2024-04-22T19:30:00.999Z") == "2024-04-22 20:30:00");
    CHECK(ingest::convert_time("2024-04-22T19:30:00Z", "UTC") == "2024-04-22 19:30:00");
    CHECK(ingest::convert_time("2024-04-22T19:30:00Z", "America/New_York") == "2024-04-22 15:30:00");
}

TEST_CASE("invalid instants and zones are rejected") {
    for (const char* bad : {"", "yesterday", "2024-13-01T00:00:00Z", "2024-01-15 12:00:00", "2024-01-15T12:00:00"})
        CHECK_THROWS_AS(ingest::convert_time(bad), InvalidTimestamp);
    CHECK_THROWS_AS(ingest::convert_time("2024-01-15T12:00:00Z", "Mars/Olympus"), UnknownZone);
    CHECK_THROWS_AS(Zone::load(""), UnknownZone);
}

TEST_CASE("conversion agrees with the EU rule over 2023-2025") {
    const Zone zone = testutil::london();
    std::mt19937_64 rng(3);
    const std::int64_t lo = oracle::unix_of(2023, 1, 1, 0, 0, 0);
    const std::int64_t hi = oracle::unix_of(2026, 1, 1, 0, 0, 0);
    std::uniform_int_distribution<std::int64_t> pick(lo, hi);
    for (int i = 0; i < 5000; ++i) {
        const std::int64_t t = pick(rng);
        CHECK(format_local(absl::FromUnixSeconds(t), zone) == oracle::london_wall_clock(t));
    }
    // every second around both 2024 transitions
    for (std::int64_t base : {oracle::unix_of(2024, 3, 31, 1, 0, 0), oracle::unix_of(2024, 10, 27, 1, 0, 0)})
        for (std::int64_t t = base - 5; t <= base + 5; ++t)
            CHECK(format_local(absl::FromUnixSeconds(t), zone) == oracle::london_wall_clock(t));
}

TEST_CASE("dates parse strictly") {
    CHECK(parse_date("2024-04-22") == Date(2024, 4, 22));
    CHECK_FALSE(parse_date("2024-02-30"));
    CHECK_FALSE(parse_date("2024-4-22"));
    CHECK_FALSE(parse_date("2024-04-22x"));
    CHECK(format_date(Date(2024, 1, 5)) == "2024-01-05");
    CHECK(date_of_local_stamp("2024-04-22 23:59:59") == Date(2024, 4, 22));
    CHECK_THROWS_AS(date_of_local_stamp("garbage"), InvalidTimestamp);
    CHECK(parse_local_stamp("2024-04-22 20:30:00") == absl::CivilSecond(2024, 4, 22, 20, 30, 0));
    CHECK_FALSE(parse_local_stamp("2024-04-22T20:30:00"));
}

TEST_CASE("UTC formatting") {
    CHECK(format_utc(parse_instant("2024-04-22T21:30:00.5+02:00")) == "2024-04-22T19:30:00Z");
}
