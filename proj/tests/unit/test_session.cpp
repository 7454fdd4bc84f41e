#include "emotrack/layout.hpp"
#include "emotrack/session.hpp"
#include "testutil.hpp"

#include <doctest.h>

using namespace emotrack;
using namespace emotrack::session;

namespace {

absl::Time at(const char* iso) { return parse_instant(iso); }

SessionErrorKind conflict(const std::function<void()>& fn, std::string* message = nullptr) {
    try {
        fn();
    } catch (const SessionError& e) {
        if (message) *message = e.what();
        return e.kind();
    }
    FAIL("expected SessionError");
    return SessionErrorKind::ClockSkew;
}

}  // namespace

TEST_CASE("mood ordering and change status") {
    CHECK(change_status(Mood::NotGood, Mood::Good) == ChangeStatus::Better);
    CHECK(change_status(Mood::Okay, Mood::Okay) == ChangeStatus::Same);
    CHECK(change_status(Mood::Good, Mood::Okay) == ChangeStatus::Worse);
    int better = 0, same = 0, worse = 0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const auto s = change_status(static_cast<Mood>(a), static_cast<Mood>(b));
            CHECK((s == ChangeStatus::Better) == (b > a));
            CHECK((s == ChangeStatus::Worse) == (b < a));
            better += s == ChangeStatus::Better;
            same += s == ChangeStatus::Same;
            worse += s == ChangeStatus::Worse;
        }
    CHECK(better == 3);
    CHECK(same == 3);
    CHECK(worse == 3);
}

TEST_CASE("mood words and wire names") {
    CHECK(to_wire(Mood::NotGood) == "Not good");
    CHECK(mood_from_wire("Not good") == Mood::NotGood);
    CHECK_FALSE(mood_from_wire("good"));
    CHECK(mood_from_word("notgood") == Mood::NotGood);
    CHECK_FALSE(mood_from_word("Good"));
    for (auto m : {Mood::NotGood, Mood::Okay, Mood::Good}) CHECK(mood_from_wire(to_wire(m)) == m);
}

TEST_CASE("start then stop records a completed session") {
    testutil::TempDir dir;
    store::DocumentStore db(dir.path());
    SessionRecorder rec(db, testutil::london());

    const auto open = rec.start("u1", Mood::Okay, at("2024-04-22T19:00:00Z"));
    CHECK(open.id == "2024-04-22 20:00:00");
    CHECK_FALSE(open.complete());
    CHECK(layout::user_exists(db, "u1"));
    CHECK(rec.open_session("u1", at("2024-04-22T19:10:00Z")).has_value());

    const auto done = rec.stop("u1", Mood::Good, at("2024-04-22T19:45:00Z"));
    CHECK(done.complete());
    CHECK(done.status == ChangeStatus::Better);
    CHECK(done.stop_local == "2024-04-22 20:45:00");
    CHECK_FALSE(rec.open_session("u1", at("2024-04-22T19:50:00Z")));

    const auto doc = db.get_document(layout::mood_records("u1").child("2024-04-22 20:00:00"));
    CHECK(doc == store::Document{{kBeforeMood, std::string("Okay")},
                                 {kStartTime, std::string("2024-04-22 20:00:00")},
                                 {kAfterMood, std::string("Good")},
                                 {kStopTime, std::string("2024-04-22 20:45:00")},
                                 {kChangeStatus, std::string("Better")}});
    CHECK(to_json(done).dump() ==
          R"({"id":"2024-04-22 20:00:00","Before Watch Mood":"Okay","Start Watch Time":"2024-04-22 20:00:00",)"
          R"("After Watch Mood":"Good","Stop Watch Time":"2024-04-22 20:45:00","Mood Change Status":"Better"})");
}

TEST_CASE("conflicts carry the alert texts") {
    testutil::TempDir dir;
    store::DocumentStore db(dir.path());
    SessionRecorder rec(db, testutil::london());
    std::string msg;
    CHECK(conflict([&] { rec.stop("u", Mood::Good, at("2024-01-15T10:00:00Z")); }, &msg) ==
          SessionErrorKind::NotWatching);
    CHECK(msg == "You are not watching anything");
    rec.start("u", Mood::Good, at("2024-01-15T10:00:00Z"));
    CHECK(conflict([&] { rec.start("u", Mood::Good, at("2024-01-15T10:05:00Z")); }, &msg) ==
          SessionErrorKind::AlreadyWatching);
    CHECK(msg == "You are already watching");
    CHECK(rec.sessions("u").size() == 1);
}

TEST_CASE("a second start in the same second as a finished session conflicts") {
    testutil::TempDir dir;
    store::DocumentStore db(dir.path());
    SessionRecorder rec(db, testutil::london());
    rec.start("u", Mood::Good, at("2024-01-15T10:00:00Z"));
    rec.stop("u", Mood::Good, at("2024-01-15T10:00:00Z"));
    CHECK(conflict([&] { rec.start("u", Mood::Okay, at("2024-01-15T10:00:00.5Z")); }) ==
          SessionErrorKind::AlreadyWatching);
}

TEST_CASE("stop before start in wall-clock terms is clock skew") {
    testutil::TempDir dir;
    store::DocumentStore db(dir.path());
    SessionRecorder rec(db, testutil::london());
    rec.start("u", Mood::Good, at("2024-01-15T10:00:00Z"));
    CHECK(conflict([&] { rec.stop("u", Mood::Good, at("2024-01-15T09:59:59Z")); }) == SessionErrorKind::ClockSkew);
    CHECK(rec.open_session("u", at("2024-01-15T10:00:00Z")).has_value());
}

TEST_CASE("open sessions older than a day are abandoned") {
    testutil::TempDir dir;
    store::DocumentStore db(dir.path());
    SessionRecorder rec(db, testutil::london());
    rec.start("u", Mood::Okay, at("2024-01-15T10:00:00Z"));
    CHECK(rec.open_session("u", at("2024-01-16T10:00:00Z")).has_value());
    CHECK_FALSE(rec.open_session("u", at("2024-01-16T10:00:01Z")).has_value());

    CHECK(conflict([&] { rec.stop("u", Mood::Good, at("2024-01-17T10:00:00Z")); }) == SessionErrorKind::NotWatching);
    auto all = rec.sessions("u");
    REQUIRE(all.size() == 1);
    CHECK(all[0].abandoned);
    CHECK_FALSE(all[0].complete());

    rec.start("u", Mood::Good, at("2024-01-17T10:00:00Z"));
    rec.stop("u", Mood::Good, at("2024-01-17T11:00:00Z"));
    CHECK(rec.sessions("u").size() == 2);
}

TEST_CASE("users are independent") {
    testutil::TempDir dir;
    store::DocumentStore db(dir.path());
    SessionRecorder rec(db, testutil::london());
    rec.start("a", Mood::Okay, at("2024-01-15T10:00:00Z"));
    rec.start("b", Mood::Okay, at("2024-01-15T10:00:00Z"));
    CHECK(conflict([&] { rec.stop("c", Mood::Good, at("2024-01-15T11:00:00Z")); }) == SessionErrorKind::NotWatching);
    rec.stop("a", Mood::Good, at("2024-01-15T11:00:00Z"));
    CHECK(rec.open_session("b", at("2024-01-15T11:00:00Z")).has_value());
}

TEST_CASE("records round-trip and partial records are rejected") {
    MoodSession s;
    s.id = s.start_local = "2024-01-15 10:00:00";
    s.before = Mood::NotGood;
    CHECK(from_document(s.id, to_document(s)) == s);
    s.after = Mood::Okay;
    s.stop_local = "2024-01-15 11:00:00";
    s.status = ChangeStatus::Better;
    CHECK(from_document(s.id, to_document(s)) == s);

    auto doc = to_document(s);
    doc.erase(kStopTime);
    CHECK_THROWS_AS(from_document(s.id, doc), std::invalid_argument);
    doc = to_document(s);
    doc[kChangeStatus] = std::string("Worse");  // stale stored status is recomputed
    CHECK(from_document(s.id, doc).status == ChangeStatus::Better);
    doc[kBeforeMood] = std::string("Great");
    CHECK_THROWS_AS(from_document(s.id, doc), std::invalid_argument);
}

TEST_CASE("every start/stop sequence up to length six") {
    for (int len = 1; len <= 6; ++len) {
        for (int mask = 0; mask < (1 << len); ++mask) {
            testutil::TempDir dir;
            store::DocumentStore db(dir.path());
            SessionRecorder rec(db, testutil::london());
            bool open = false;
            int completed = 0;
            absl::Time now = at("2024-03-31T00:30:00Z");  // crosses the spring transition
            for (int i = 0; i < len; ++i) {
                now += absl::Minutes(17);
                const bool start = (mask >> i) & 1;
                const Mood mood = static_cast<Mood>(i % 3);
                try {
                    if (start) rec.start("u", mood, now);
                    else rec.stop("u", mood, now);
                    CHECK(start != open);
                    if (!start) ++completed;
                    open = start;
                } catch (const SessionError& e) {
                    CHECK(start == open);
                    CHECK(std::string(e.what()) ==
                          (start ? kAlreadyWatchingMessage : kNotWatchingMessage));
                }
                int open_count = 0, done_count = 0;
                for (const auto& s : rec.sessions("u")) (s.complete() ? done_count : open_count)++;
                CHECK(open_count == (open ? 1 : 0));
                CHECK(done_count == completed);
            }
        }
    }
}
