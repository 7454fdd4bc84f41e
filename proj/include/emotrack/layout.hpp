#pragma once

#include "emotrack/store.hpp"

#include <string>

// Collection names mirror the original database layout, spaces included.
namespace emotrack::layout {

inline constexpr const char* kUsers = "Users";
inline constexpr const char* kMoodRecords = "Mood Records";
inline constexpr const char* kWatchHistory = "YouTube Watch History";
inline constexpr const char* kAnalysisReport = "Analysis Report";
inline constexpr const char* kDetails = "Details";
inline constexpr const char* kSummary = "Summary";

inline store::DocumentPath user(const std::string& uid) { return {kUsers, uid}; }
inline store::DocumentPath mood_records(const std::string& uid) { return user(uid).child(kMoodRecords); }
inline store::DocumentPath watch_history(const std::string& uid) { return user(uid).child(kWatchHistory); }
inline store::DocumentPath analysis_report(const std::string& uid) { return user(uid).child(kAnalysisReport); }
inline store::DocumentPath report_date(const std::string& uid, const std::string& date) {
    return analysis_report(uid).child(date);
}
inline store::DocumentPath details(const std::string& uid, const std::string& date) {
    return report_date(uid, date).child(kDetails);
}
inline store::DocumentPath summary(const std::string& uid, const std::string& date) {
    return report_date(uid, date).child(kSummary);
}

/// Creates `Users/{uid}` if missing.
inline void ensure_user(store::DocumentStore& db, const std::string& uid) {
    const auto path = user(uid);
    if (!db.exists(path)) db.put_document(path, {{"UID", uid}});
}

inline bool user_exists(const store::DocumentStore& db, const std::string& uid) {
    return db.exists(user(uid));
}

}  // namespace emotrack::layout
