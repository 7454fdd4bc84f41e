#include "emotrack/metadata.hpp"

#include "emotrack/youtube_url.hpp"

#include <fstream>
#include <vector>

namespace emotrack::metadata {

namespace {

std::string unescape(std::string_view field) {
    std::string out;
    out.reserve(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (field[i] == '\\' && i + 1 < field.size()) {
            const char next = field[i + 1];
            if (next == 't') { out += '\t'; ++i; continue; }
            if (next == 'n') { out += '\n'; ++i; continue; }
            if (next == '\\') { out += '\\'; ++i; continue; }
        }
        out += field[i];
    }
    return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> cols;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        cols.push_back(line.substr(start, tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    return cols;
}

}  // namespace

std::optional<std::string> extract_video_id(std::string_view url) {
    auto ref = parse_youtube_url(url);
    if (!ref) return std::nullopt;
    return std::move(ref->video_id);
}

std::optional<VideoMetadata> fetch_metadata(MetadataProvider& provider, const std::string& video_id) {
    if (video_id.empty()) throw std::invalid_argument("fetch_metadata: empty video id");
    auto meta = provider.fetch(video_id);
    if (!meta || !meta->title) return std::nullopt;
    meta->video_id = video_id;
    return meta;
}

FixtureProvider FixtureProvider::from_stream(std::istream& in) {
    FixtureProvider provider;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto cols = split_tabs(line);
        VideoMetadata meta;
        meta.video_id = std::string(cols[0]);
        if (!is_valid_video_id(meta.video_id))
            throw std::invalid_argument("metadata fixture line " + std::to_string(line_no) + ": bad video id");
        if (cols.size() > 1 && !cols[1].empty()) {
            meta.title = unescape(cols[1]);
            meta.description = cols.size() > 2 ? unescape(cols[2]) : std::string();
            if (cols.size() > 3 && !cols[3].empty()) meta.native_category = unescape(cols[3]);
        }
        if (cols.size() > 4 && !cols[4].empty()) {
            try {
                std::size_t used = 0;
                const long long secs = std::stoll(std::string(cols[4]), &used);
                if (used != cols[4].size() || secs < 0) throw std::invalid_argument("range");
                meta.duration_seconds = secs;
            } catch (const std::exception&) {
                throw std::invalid_argument("metadata fixture line " + std::to_string(line_no) +
                                            ": bad durationSeconds");
            }
        }
        provider.add(std::move(meta));
    }
    return provider;
}

FixtureProvider FixtureProvider::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open metadata fixture " + path.string());
    return from_stream(in);
}

void FixtureProvider::add(VideoMetadata meta) {
    auto id = meta.video_id;
    records_[std::move(id)] = std::move(meta);
}

std::optional<VideoMetadata> FixtureProvider::fetch(const std::string& video_id) {
    auto it = records_.find(video_id);
    if (it == records_.end() || !it->second.title) return std::nullopt;
    return it->second;
}

std::optional<VideoMetadata> CachingProvider::fetch(const std::string& video_id) {
    std::shared_ptr<Slot> slot;
    {
        std::lock_guard guard(slots_mutex_);
        auto& s = slots_[video_id];
        if (!s) s = std::make_shared<Slot>();
        slot = s;
    }
    std::lock_guard guard(slot->m);
    if (!slot->done) {
        slot->value = upstream_.fetch(video_id);
        slot->done = true;
    }
    return slot->value;
}

std::optional<std::int64_t> parse_iso_duration(std::string_view text) {
    if (text.empty() || text.front() != 'P') return std::nullopt;
    std::int64_t total = 0;
    std::int64_t number = 0;
    bool have_digits = false;
    bool in_time = false;
    bool any = false;
    for (std::size_t i = 1; i < text.size(); ++i) {
        const char c = text[i];
        if (c >= '0' && c <= '9') {
            number = number * 10 + (c - '0');
            have_digits = true;
            continue;
        }
        if (c == 'T') {
            if (have_digits || in_time) return std::nullopt;
            in_time = true;
            continue;
        }
        if (!have_digits) return std::nullopt;
        std::int64_t unit = 0;
        if (!in_time && c == 'W') unit = 7 * 86400;
        else if (!in_time && c == 'D') unit = 86400;
        else if (in_time && c == 'H') unit = 3600;
        else if (in_time && c == 'M') unit = 60;
        else if (in_time && c == 'S') unit = 1;
        else return std::nullopt;
        total += number * unit;
        number = 0;
        have_digits = false;
        any = true;
    }
    if (have_digits || !any) return std::nullopt;
    return total;
}

}  // namespace emotrack::metadata
