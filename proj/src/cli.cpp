#include "emotrack/cli.hpp"

#include "emotrack/analytics.hpp"
#include "emotrack/layout.hpp"
#include "emotrack/pipeline.hpp"
#include "emotrack/reportgen.hpp"
#include "emotrack/service.hpp"
#include "emotrack/session.hpp"
#include "emotrack/timeconv.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace emotrack::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

/// Input error reported as exit 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string data_dir;
    std::string zone = std::string(kDefaultZone);
};

struct BackendFlags {
    std::string categorizer = "keyword";
    std::string metadata = "fixture";
    std::string metadata_fixture;
    std::string keyword_table;
    std::string youtube_key;
    std::string youtube_base = metadata::RemoteConfig{}.base_url;
    bool fetch_duration = false;
    std::string chat_key;
    std::string chat_base = categorize::ChatConfig{}.base_url;
    std::string model = categorize::ChatConfig{}.model;
    int retries = 3;

    void attach(CLI::App& cmd) {
        cmd.add_option("--categorizer", categorizer, "keyword or llm")
            ->check(CLI::IsMember({"keyword", "llm"}))
            ->capture_default_str();
        cmd.add_option("--metadata", metadata, "fixture or remote")
            ->check(CLI::IsMember({"fixture", "remote"}))
            ->capture_default_str();
        cmd.add_option("--metadata-fixture", metadata_fixture, "TSV of video records for fixture mode");
        cmd.add_option("--keyword-table", keyword_table, "keyword table for the keyword categorizer");
        cmd.add_option("--youtube-api-key", youtube_key)->envname("YOUTUBE_API_KEY");
        cmd.add_option("--youtube-base-url", youtube_base)->capture_default_str();
        cmd.add_flag("--fetch-duration", fetch_duration, "request video durations for the shorts rule");
        cmd.add_option("--openai-api-key", chat_key)->envname("OPENAI_API_KEY");
        cmd.add_option("--chat-base-url", chat_base)->capture_default_str();
        cmd.add_option("--model", model)->capture_default_str();
        cmd.add_option("--retries", retries, "attempts per upstream call")->check(CLI::Range(1, 10))->capture_default_str();
    }

    pipeline::BackendConfig config() const {
        pipeline::BackendConfig c;
        c.categorizer = categorizer == "llm" ? pipeline::CategorizerMode::Llm : pipeline::CategorizerMode::Keyword;
        c.metadata = metadata == "remote" ? pipeline::MetadataMode::Remote : pipeline::MetadataMode::Fixture;
        c.metadata_fixture = metadata_fixture;
        c.keyword_table = keyword_table;
        c.remote.api_key = youtube_key;
        c.remote.base_url = youtube_base;
        c.remote.fetch_duration = fetch_duration;
        c.chat.api_key = chat_key;
        c.chat.base_url = chat_base;
        c.chat.model = model;
        c.retries = retries;
        return c;
    }
};

fs::path data_dir(const Globals& g) {
    if (!g.data_dir.empty()) return g.data_dir;
    if (const char* env = std::getenv("EMOTRACK_DATA_DIR"); env && *env) return env;
    return "emotrack-data";
}

Zone load_zone(const Globals& g) {
    try {
        return Zone::load(g.zone);
    } catch (const UnknownZone& e) {
        throw UsageError(e.what());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Date required_date(const std::string& text, const char* flag) {
    auto d = parse_date(text);
    if (!d) throw UsageError(std::string(flag) + " must be a YYYY-MM-DD date, got '" + text + "'");
    return *d;
}

absl::Time now_or(const std::string& iso) {
    if (iso.empty()) return absl::Now();
    try {
        return parse_instant(iso);
    } catch (const InvalidTimestamp& e) {
        throw UsageError(e.what());
    }
}

Date today_or(const std::string& text, const Zone& zone) {
    if (!text.empty()) return required_date(text, "--today");
    return absl::ToCivilDay(absl::Now(), zone.tz());
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Mood and watch-history tracker", "emotrack"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--data-dir", g.data_dir, "store root (default $EMOTRACK_DATA_DIR)");
    app.add_option("--zone", g.zone, "IANA time zone for local times")->capture_default_str();

    std::string user;
    std::string format = "json";
    auto add_user = [&user](CLI::App* cmd) { cmd->add_option("--user", user, "user id")->required(); };
    auto add_format = [&format](CLI::App* cmd) {
        cmd->add_option("--format", format)->check(CLI::IsMember({"json", "table"}))->capture_default_str();
    };

    auto* ingest_cmd = app.add_subcommand("ingest", "load a watch-history export");
    std::string ingest_file;
    ingest_cmd->add_option("file", ingest_file)->required();
    add_user(ingest_cmd);

    auto* session_cmd = app.add_subcommand("session", "record a watching session");
    std::string action;
    std::string mood_word;
    std::string now_text;
    session_cmd->add_option("action", action)->required()->check(CLI::IsMember({"start", "stop"}));
    add_user(session_cmd);
    session_cmd->add_option("--mood", mood_word, "good, okay or notgood")->required();
    session_cmd->add_option("--now", now_text, "RFC 3339 instant used instead of the clock");

    auto* report_cmd = app.add_subcommand("report", "generate the mood report");
    std::string preset_word, from_text, to_text, today_text;
    add_user(report_cmd);
    auto* preset_opt = report_cmd->add_option("--preset", preset_word, "lastweek, lastmonth, last3months or halfyear");
    auto* from_opt = report_cmd->add_option("--from", from_text);
    auto* to_opt = report_cmd->add_option("--to", to_text);
    from_opt->needs(to_opt);
    to_opt->needs(from_opt);
    preset_opt->excludes(from_opt)->excludes(to_opt);
    report_cmd->add_option("--today", today_text, "date that presets end on");
    add_format(report_cmd);
    BackendFlags report_backends;
    report_backends.attach(*report_cmd);

    auto* stats_cmd = app.add_subcommand("stats", "usage statistics");
    add_user(stats_cmd);
    stats_cmd->add_option("--from", from_text)->required();
    stats_cmd->add_option("--to", to_text)->required();
    add_format(stats_cmd);

    auto* sus_cmd = app.add_subcommand("sus", "score usability questionnaire responses");
    std::string sus_file;
    sus_cmd->add_option("csv", sus_file)->required();
    add_format(sus_cmd);

    auto* serve_cmd = app.add_subcommand("serve", "run the HTTP service");
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string allow_origin;
    std::string token;
    std::size_t max_upload = service::ServiceConfig{}.max_upload_bytes;
    int timeout_seconds = 120;
    serve_cmd->add_option("--host", host)->capture_default_str();
    serve_cmd->add_option("--port", port)->check(CLI::Range(0, 65535))->capture_default_str();
    serve_cmd->add_option("--allow-origin", allow_origin, "origin allowed for cross-origin requests");
    serve_cmd->add_option("--token", token, "shared bearer token for /api routes")->envname("EMOTRACK_TOKEN");
    serve_cmd->add_option("--max-upload-bytes", max_upload)->capture_default_str();
    serve_cmd->add_option("--timeout", timeout_seconds, "report request timeout in seconds")->capture_default_str();
    BackendFlags serve_backends;
    serve_backends.attach(*serve_cmd);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*ingest_cmd) {
            const Zone zone = load_zone(g);
            const std::string content = read_file(ingest_file);
            store::DocumentStore db(data_dir(g));
            pipeline::IngestCounts counts;
            try {
                counts = pipeline::ingest_history(db, user, content, zone);
            } catch (const ingest::MalformedDocument& e) {
                throw UsageError(e.what());
            } catch (const ingest::MissingField& e) {
                throw UsageError(e.what());
            }
            out << ordered_json{{"ingested", counts.ingested}, {"skipped", counts.skipped}}.dump() << '\n';
            return kExitOk;
        }

        if (*session_cmd) {
            auto mood = session::mood_from_word(mood_word);
            if (!mood) throw UsageError("--mood must be good, okay or notgood");
            const absl::Time now = now_or(now_text);
            store::DocumentStore db(data_dir(g));
            session::SessionRecorder recorder(db, load_zone(g));
            try {
                const auto s = action == "start" ? recorder.start(user, *mood, now) : recorder.stop(user, *mood, now);
                out << session::to_json(s).dump() << '\n';
            } catch (const session::SessionError& e) {
                err << e.what() << '\n';
                return kExitConflict;
            }
            return kExitOk;
        }

        if (*report_cmd) {
            const Zone zone = load_zone(g);
            report::TimeRange range;
            if (!preset_word.empty()) {
                auto preset = report::preset_from_word(preset_word);
                if (!preset) throw UsageError("unknown preset '" + preset_word + "'");
                range = report::resolve_range(*preset, today_or(today_text, zone));
            } else if (!from_text.empty()) {
                range = report::resolve_range(required_date(from_text, "--from"), required_date(to_text, "--to"));
            } else {
                throw UsageError("report needs --preset or --from/--to");
            }
            store::DocumentStore db(data_dir(g));
            report::Report result;
            if (layout::user_exists(db, user)) {
                pipeline::Backends backends(report_backends.config());
                pipeline::RunClassifier classify(backends.provider(), backends.categorizer(), backends.retries());
                result = pipeline::generate_report(db, user, range, zone, classify);
            }
            if (format == "table")
                out << report::to_table(result);
            else
                out << report::to_json(result).dump(2) << '\n';
            if (result.empty() && format == "json") err << "no data for the selected range\n";
            return kExitOk;
        }

        if (*stats_cmd) {
            const Zone zone = load_zone(g);
            const auto range = report::resolve_range(required_date(from_text, "--from"), required_date(to_text, "--to"));
            store::DocumentStore db(data_dir(g));
            const auto events = pipeline::load_events(db, user, zone);
            const auto sessions = pipeline::load_sessions(db, user);
            const auto stats = analytics::compute_usage(range, events, sessions);
            if (format == "table")
                out << analytics::to_table(stats);
            else
                out << analytics::to_json(stats).dump(2) << '\n';
            return kExitOk;
        }

        if (*sus_cmd) {
            const auto responses = analytics::parse_sus_csv(read_file(sus_file));
            const auto result = analytics::sus_score(responses);
            if (format == "table") {
                for (std::size_t i = 0; i < result.per_respondent.size(); ++i)
                    out << fmt::format("respondent {:>3}  {:6.1f}\n", i + 1, result.per_respondent[i]);
                out << fmt::format("mean            {:6.1f}\n", result.mean);
            } else {
                out << ordered_json{{"scores", result.per_respondent}, {"mean", result.mean}}.dump() << '\n';
            }
            return kExitOk;
        }

        if (*serve_cmd) {
            service::ServiceConfig config;
            config.data_dir = data_dir(g);
            config.zone = load_zone(g).name();
            config.allow_origin = allow_origin;
            config.backends = serve_backends.config();
            config.max_upload_bytes = max_upload;
            config.request_timeout = std::chrono::seconds(timeout_seconds);
            if (!token.empty()) config.shared_token = token;
            service::Service svc(std::move(config));
            return service::serve_forever(svc, host, port, err);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const report::InvalidRange& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const analytics::InvalidResponse& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const store::StoreError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const metadata::ProviderError& e) {
        err << "error: metadata provider failed: " << e.what() << '\n';
        return kExitUsage;
    } catch (const categorize::CategorizerError& e) {
        err << "error: categorizer failed: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace emotrack::cli
