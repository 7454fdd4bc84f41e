#pragma once

#include "emotrack/categorize.hpp"
#include "emotrack/ingest.hpp"
#include "emotrack/metadata.hpp"
#include "emotrack/reportgen.hpp"
#include "emotrack/session.hpp"
#include "emotrack/store.hpp"
#include "emotrack/timeconv.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

// Operations shared by the CLI and the HTTP service, so both paths leave
// identical store contents.
namespace emotrack::pipeline {

struct IngestCounts {
    std::int64_t ingested = 0;
    std::int64_t skipped = 0;
    friend bool operator==(const IngestCounts&, const IngestCounts&) = default;
};

/// History document name: the watch instant in UTC, e.g. `2024-01-15T12:00:00Z`.
std::string event_document_name(const ingest::WatchEvent& ev);
/// History document body: `url` and local `time`.
store::Document event_document(const ingest::WatchEvent& ev);

/// Parses an export and writes one history document per event.
/// Throws ingest::MalformedDocument / ingest::MissingField.
IngestCounts ingest_history(store::DocumentStore& db, const std::string& uid, std::string_view content,
                            const Zone& zone);

std::vector<ingest::WatchEvent> load_events(const store::DocumentStore& db, const std::string& uid,
                                            const Zone& zone);
std::vector<session::MoodSession> load_sessions(const store::DocumentStore& db, const std::string& uid);

enum class CategorizerMode { Keyword, Llm };
enum class MetadataMode { Fixture, Remote };

struct BackendConfig {
    CategorizerMode categorizer = CategorizerMode::Keyword;
    MetadataMode metadata = MetadataMode::Fixture;
    std::filesystem::path metadata_fixture;  // empty: no records, every video Unavailable
    std::filesystem::path keyword_table;     // empty: shipped table
    metadata::RemoteConfig remote;
    categorize::ChatConfig chat;
    int retries = 3;
};

/// Long-lived providers built from configuration.
class Backends {
public:
    explicit Backends(const BackendConfig& config);

    metadata::MetadataProvider& provider() { return *provider_; }
    categorize::Categorizer& categorizer() { return *categorizer_; }
    int retries() const noexcept { return retries_; }

private:
    std::unique_ptr<metadata::MetadataProvider> provider_;
    std::unique_ptr<categorize::Categorizer> keyword_;
    std::unique_ptr<categorize::Categorizer> llm_;
    std::unique_ptr<categorize::Categorizer> categorizer_;
    int retries_;
};

/// Per-run classifier: metadata cache plus a label memo keyed by video id.
/// Retryable provider errors are retried; exhaustion rethrows.
class RunClassifier {
public:
    RunClassifier(metadata::MetadataProvider& provider, categorize::Categorizer& categorizer, int retries = 3);

    categorize::CategoryLabel operator()(const ingest::WatchEvent& ev);
    std::optional<metadata::VideoMetadata> metadata_for(const std::string& video_id);

private:
    metadata::CachingProvider cache_;
    categorize::Categorizer& categorizer_;
    int retries_;
    std::mutex labels_mutex_;
    std::map<std::string, categorize::CategoryLabel> labels_;
};

/// Loads the user's events and sessions, builds the report for `range` and
/// stores it under Analysis Report.
report::Report generate_report(store::DocumentStore& db, const std::string& uid, const report::TimeRange& range,
                               const Zone& zone, RunClassifier& classify);

}  // namespace emotrack::pipeline
