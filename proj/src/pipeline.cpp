#include "emotrack/pipeline.hpp"

#include "emotrack/layout.hpp"
#include "emotrack/youtube_url.hpp"

namespace emotrack::pipeline {

namespace {

constexpr const char* kUrlField = "url";
constexpr const char* kTimeField = "time";

template <typename Fn>
auto with_retries(int attempts, Fn&& fn) {
    for (int attempt = 1;; ++attempt) {
        try {
            return fn();
        } catch (const metadata::ProviderError& e) {
            if (!e.retryable() || attempt >= attempts) throw;
        }
    }
}

}  // namespace

std::string event_document_name(const ingest::WatchEvent& ev) {
    return absl::FormatTime("%Y-%m-%dT%H:%M:%E*SZ", ev.watched_at_utc, absl::UTCTimeZone());
}

store::Document event_document(const ingest::WatchEvent& ev) {
    return {{kUrlField, ev.url}, {kTimeField, ev.watched_at_local}};
}

IngestCounts ingest_history(store::DocumentStore& db, const std::string& uid, std::string_view content,
                            const Zone& zone) {
    auto result = ingest::ingest_takeout(content, zone);
    layout::ensure_user(db, uid);
    const auto history = layout::watch_history(uid);
    for (const auto& ev : result.events) db.put_document(history.child(event_document_name(ev)), event_document(ev));
    return {static_cast<std::int64_t>(result.events.size()), static_cast<std::int64_t>(result.skipped.size())};
}

std::vector<ingest::WatchEvent> load_events(const store::DocumentStore& db, const std::string& uid,
                                            const Zone& zone) {
    std::vector<ingest::WatchEvent> events;
    std::size_t index = 0;
    for (const auto& [name, doc] : db.list_collection(layout::watch_history(uid))) {
        auto url_it = doc.find(kUrlField);
        if (url_it == doc.end() || !std::holds_alternative<std::string>(url_it->second)) continue;
        const auto& url = std::get<std::string>(url_it->second);
        auto ref = parse_youtube_url(url);
        if (!ref) continue;

        ingest::WatchEvent ev;
        try {
            ev.watched_at_utc = parse_instant(name);
        } catch (const InvalidTimestamp&) {
            continue;
        }
        ev.video_id = std::move(ref->video_id);
        ev.is_short = ref->is_short;
        ev.url = url;
        auto time_it = doc.find(kTimeField);
        if (time_it != doc.end() && std::holds_alternative<std::string>(time_it->second))
            ev.watched_at_local = std::get<std::string>(time_it->second);
        else
            ev.watched_at_local = format_local(ev.watched_at_utc, zone);
        ev.source_index = index++;
        events.push_back(std::move(ev));
    }
    return events;
}

std::vector<session::MoodSession> load_sessions(const store::DocumentStore& db, const std::string& uid) {
    std::vector<session::MoodSession> out;
    for (const auto& [name, doc] : db.list_collection(layout::mood_records(uid))) {
        try {
            out.push_back(session::from_document(name, doc));
        } catch (const std::invalid_argument&) {
            // malformed records never reach reports
        }
    }
    return out;
}

Backends::Backends(const BackendConfig& config) : retries_(config.retries < 1 ? 1 : config.retries) {
    if (config.metadata == MetadataMode::Remote) {
        provider_ = std::make_unique<metadata::YouTubeDataApiProvider>(config.remote);
    } else if (!config.metadata_fixture.empty()) {
        provider_ = std::make_unique<metadata::FixtureProvider>(metadata::FixtureProvider::from_file(config.metadata_fixture));
    } else {
        provider_ = std::make_unique<metadata::FixtureProvider>();
    }

    keyword_ = config.keyword_table.empty()
                   ? std::make_unique<categorize::KeywordCategorizer>()
                   : std::make_unique<categorize::KeywordCategorizer>(categorize::KeywordTable::from_file(config.keyword_table));
    if (config.categorizer == CategorizerMode::Llm) {
        llm_ = std::make_unique<categorize::ChatCompletionCategorizer>(config.chat);
        categorizer_ = std::make_unique<categorize::RetryingCategorizer>(*llm_, retries_);
    } else {
        categorizer_ = std::make_unique<categorize::RetryingCategorizer>(*keyword_, 1);
    }
}

RunClassifier::RunClassifier(metadata::MetadataProvider& provider, categorize::Categorizer& categorizer, int retries)
    : cache_(provider), categorizer_(categorizer), retries_(retries) {}

std::optional<metadata::VideoMetadata> RunClassifier::metadata_for(const std::string& video_id) {
    return with_retries(retries_, [&] { return metadata::fetch_metadata(cache_, video_id); });
}

categorize::CategoryLabel RunClassifier::operator()(const ingest::WatchEvent& ev) {
    {
        std::lock_guard guard(labels_mutex_);
        if (auto it = labels_.find(ev.video_id); it != labels_.end()) return it->second;
    }
    auto label = categorize::categorize(metadata_for(ev.video_id), categorizer_);
    std::lock_guard guard(labels_mutex_);
    return labels_.emplace(ev.video_id, std::move(label)).first->second;
}

report::Report generate_report(store::DocumentStore& db, const std::string& uid, const report::TimeRange& range,
                               const Zone& zone, RunClassifier& classify) {
    const auto events = load_events(db, uid, zone);
    const auto sessions = load_sessions(db, uid);
    auto result = report::build_report(range, events, sessions,
                                       [&classify](const ingest::WatchEvent& ev) { return classify(ev); });
    report::write_report(db, uid, result);
    return result;
}

}  // namespace emotrack::pipeline
