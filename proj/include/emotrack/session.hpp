#pragma once

#include "emotrack/store.hpp"
#include "emotrack/timeconv.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace emotrack::session {

/// Ordinal rank: NotGood < Okay < Good.
enum class Mood { NotGood = 0, Okay = 1, Good = 2 };

enum class ChangeStatus { Better, Same, Worse };

/// Wire names: "Good", "Okay", "Not good".
std::string_view to_wire(Mood mood);
std::optional<Mood> mood_from_wire(std::string_view text);
/// CLI aliases: "good", "okay", "notgood".
std::optional<Mood> mood_from_word(std::string_view word);

std::string_view to_wire(ChangeStatus status);
std::optional<ChangeStatus> status_from_wire(std::string_view text);

ChangeStatus change_status(Mood before, Mood after);

// Document field names.
inline constexpr const char* kBeforeMood = "Before Watch Mood";
inline constexpr const char* kStartTime = "Start Watch Time";
inline constexpr const char* kAfterMood = "After Watch Mood";
inline constexpr const char* kStopTime = "Stop Watch Time";
inline constexpr const char* kChangeStatus = "Mood Change Status";
inline constexpr const char* kAbandoned = "Abandoned";

inline constexpr const char* kAlreadyWatchingMessage = "You are already watching";
inline constexpr const char* kNotWatchingMessage = "You are not watching anything";

struct MoodSession {
    std::string id;  // equals start_local
    std::string start_local;
    Mood before = Mood::Okay;
    std::optional<std::string> stop_local;
    std::optional<Mood> after;
    std::optional<ChangeStatus> status;
    bool abandoned = false;

    bool complete() const noexcept { return stop_local && after && status; }
    friend bool operator==(const MoodSession&, const MoodSession&) = default;
};

store::Document to_document(const MoodSession& s);
/// Throws std::invalid_argument on a record that violates the all-or-nothing stop fields.
MoodSession from_document(const std::string& id, const store::Document& doc);

/// `id` plus the record's wire fields.
nlohmann::ordered_json to_json(const MoodSession& s);

enum class SessionErrorKind { AlreadyWatching, NotWatching, ClockSkew };

class SessionError : public std::runtime_error {
public:
    SessionError(SessionErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    SessionErrorKind kind() const noexcept { return kind_; }

private:
    SessionErrorKind kind_;
};

/// Open sessions older than this are treated as abandoned.
inline constexpr absl::Duration kAbandonAfter = absl::Hours(24);

/// Start/stop state machine over `Users/{uid}/Mood Records`.
///
/// State lives in the store, so separate processes (CLI invocations, the
/// server) observe the same machine. Transitions for one user are serialized.
class SessionRecorder {
public:
    SessionRecorder(store::DocumentStore& db, Zone zone);

    MoodSession start(const std::string& uid, Mood mood, absl::Time now);
    MoodSession stop(const std::string& uid, Mood mood, absl::Time now);

    /// The user's live open session, if any. Stale open sessions are not reported.
    std::optional<MoodSession> open_session(const std::string& uid, absl::Time now) const;

    /// All sessions in id (chronological) order.
    std::vector<MoodSession> sessions(const std::string& uid) const;

    const Zone& zone() const noexcept { return zone_; }

private:
    std::mutex& user_mutex(const std::string& uid);
    bool is_stale(const MoodSession& s, absl::Time now) const;
    /// Marks stale open sessions abandoned and returns the live one.
    std::optional<MoodSession> settle_open(const std::string& uid, absl::Time now);

    store::DocumentStore& db_;
    Zone zone_;
    std::mutex users_mutex_;
    std::map<std::string, std::unique_ptr<std::mutex>> user_mutexes_;
};

}  // namespace emotrack::session
