#include "emotrack/session.hpp"

#include "emotrack/layout.hpp"

#include <stdexcept>

namespace emotrack::session {

std::string_view to_wire(Mood mood) {
    switch (mood) {
        case Mood::Good: return "Good";
        case Mood::Okay: return "Okay";
        case Mood::NotGood: return "Not good";
    }
    return "Okay";
}

std::optional<Mood> mood_from_wire(std::string_view text) {
    if (text == "Good") return Mood::Good;
    if (text == "Okay") return Mood::Okay;
    if (text == "Not good") return Mood::NotGood;
    return std::nullopt;
}

std::optional<Mood> mood_from_word(std::string_view word) {
    if (word == "good") return Mood::Good;
    if (word == "okay") return Mood::Okay;
    if (word == "notgood") return Mood::NotGood;
    return std::nullopt;
}

std::string_view to_wire(ChangeStatus status) {
    switch (status) {
        case ChangeStatus::Better: return "Better";
        case ChangeStatus::Same: return "Same";
        case ChangeStatus::Worse: return "Worse";
    }
    return "Same";
}

std::optional<ChangeStatus> status_from_wire(std::string_view text) {
    if (text == "Better") return ChangeStatus::Better;
    if (text == "Same") return ChangeStatus::Same;
    if (text == "Worse") return ChangeStatus::Worse;
    return std::nullopt;
}

ChangeStatus change_status(Mood before, Mood after) {
    const int delta = static_cast<int>(after) - static_cast<int>(before);
    if (delta > 0) return ChangeStatus::Better;
    if (delta < 0) return ChangeStatus::Worse;
    return ChangeStatus::Same;
}

store::Document to_document(const MoodSession& s) {
    store::Document doc{
        {kBeforeMood, std::string(to_wire(s.before))},
        {kStartTime, s.start_local},
    };
    if (s.complete()) {
        doc[kAfterMood] = std::string(to_wire(*s.after));
        doc[kStopTime] = *s.stop_local;
        doc[kChangeStatus] = std::string(to_wire(*s.status));
    }
    if (s.abandoned) doc[kAbandoned] = true;
    return doc;
}

namespace {

std::optional<std::string> text_field(const store::Document& doc, const char* name) {
    auto it = doc.find(name);
    if (it == doc.end()) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
    throw std::invalid_argument(std::string("field '") + name + "' is not text");
}

}  // namespace

MoodSession from_document(const std::string& id, const store::Document& doc) {
    MoodSession s;
    s.id = id;
    auto before = text_field(doc, kBeforeMood);
    auto start = text_field(doc, kStartTime);
    if (!before || !start) throw std::invalid_argument("mood record " + id + " lacks start fields");
    auto mood = mood_from_wire(*before);
    if (!mood) throw std::invalid_argument("mood record " + id + " has unknown mood '" + *before + "'");
    s.before = *mood;
    s.start_local = *start;

    auto after = text_field(doc, kAfterMood);
    auto stop = text_field(doc, kStopTime);
    auto status = text_field(doc, kChangeStatus);
    if (after || stop || status) {
        if (!(after && stop)) throw std::invalid_argument("mood record " + id + " is partially stopped");
        auto after_mood = mood_from_wire(*after);
        if (!after_mood) throw std::invalid_argument("mood record " + id + " has unknown mood '" + *after + "'");
        s.after = after_mood;
        s.stop_local = *stop;
        // status is derived; recompute rather than trust a stale value
        s.status = change_status(s.before, *s.after);
    }
    if (auto it = doc.find(kAbandoned); it != doc.end()) {
        if (const auto* b = std::get_if<bool>(&it->second)) s.abandoned = *b;
    }
    return s;
}

nlohmann::ordered_json to_json(const MoodSession& s) {
    nlohmann::ordered_json j;
    j["id"] = s.id;
    j[kBeforeMood] = to_wire(s.before);
    j[kStartTime] = s.start_local;
    if (s.complete()) {
        j[kAfterMood] = to_wire(*s.after);
        j[kStopTime] = *s.stop_local;
        j[kChangeStatus] = to_wire(*s.status);
    }
    return j;
}

SessionRecorder::SessionRecorder(store::DocumentStore& db, Zone zone) : db_(db), zone_(std::move(zone)) {}

std::mutex& SessionRecorder::user_mutex(const std::string& uid) {
    std::lock_guard guard(users_mutex_);
    auto& slot = user_mutexes_[uid];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

bool SessionRecorder::is_stale(const MoodSession& s, absl::Time now) const {
    auto cs = parse_local_stamp(s.start_local);
    if (!cs) return true;
    const absl::Time started = zone_.tz().At(*cs).pre;
    return now - started > kAbandonAfter;
}

std::vector<MoodSession> SessionRecorder::sessions(const std::string& uid) const {
    std::vector<MoodSession> out;
    for (const auto& [name, doc] : db_.list_collection(layout::mood_records(uid)))
        out.push_back(from_document(name, doc));
    return out;
}

std::optional<MoodSession> SessionRecorder::open_session(const std::string& uid, absl::Time now) const {
    std::optional<MoodSession> live;
    for (auto& s : sessions(uid)) {
        if (s.complete() || s.abandoned || is_stale(s, now)) continue;
        live = std::move(s);
    }
    return live;
}

std::optional<MoodSession> SessionRecorder::settle_open(const std::string& uid, absl::Time now) {
    std::optional<MoodSession> live;
    for (auto& s : sessions(uid)) {
        if (s.complete() || s.abandoned) continue;
        if (is_stale(s, now)) {
            db_.update_fields(layout::mood_records(uid).child(s.id), {{kAbandoned, true}});
            continue;
        }
        live = std::move(s);
    }
    return live;
}

MoodSession SessionRecorder::start(const std::string& uid, Mood mood, absl::Time now) {
    std::lock_guard guard(user_mutex(uid));
    if (settle_open(uid, now)) throw SessionError(SessionErrorKind::AlreadyWatching, kAlreadyWatchingMessage);

    const std::string key = format_local(now, zone_);
    const auto path = layout::mood_records(uid).child(key);
    if (db_.exists(path)) throw SessionError(SessionErrorKind::AlreadyWatching, kAlreadyWatchingMessage);

    MoodSession s;
    s.id = key;
    s.start_local = key;
    s.before = mood;
    layout::ensure_user(db_, uid);
    db_.put_document(path, to_document(s));
    return s;
}

MoodSession SessionRecorder::stop(const std::string& uid, Mood mood, absl::Time now) {
    std::lock_guard guard(user_mutex(uid));
    auto open = settle_open(uid, now);
    if (!open) throw SessionError(SessionErrorKind::NotWatching, kNotWatchingMessage);

    const std::string stop_key = format_local(now, zone_);
    if (stop_key < open->start_local)
        throw SessionError(SessionErrorKind::ClockSkew,
                           "stop time " + stop_key + " precedes session start " + open->start_local);

    MoodSession s = *open;
    s.after = mood;
    s.stop_local = stop_key;
    s.status = change_status(s.before, mood);
    db_.update_fields(layout::mood_records(uid).child(s.id),
                      {{kAfterMood, std::string(to_wire(mood))},
                       {kStopTime, stop_key},
                       {kChangeStatus, std::string(to_wire(*s.status))}});
    return s;
}

}  // namespace emotrack::session
