#include "emotrack/categorize.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

namespace emotrack::categorize {

namespace {

bool is_word_char(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
               return std::tolower(x) == std::tolower(y);
           });
}

constexpr std::array<std::string_view, 4> kJunkLabels = {"Unspecified", "Uncategorized", "Unknown",
                                                         "Undefined"};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::size_t count_occurrences(const std::vector<std::string>& tokens, const std::vector<std::string>& phrase) {
    if (phrase.empty() || phrase.size() > tokens.size()) return 0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
        if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) ++hits;
    }
    return hits;
}

}  // namespace

bool is_label_token(std::string_view text) {
    return !text.empty() && std::all_of(text.begin(), text.end(), [](unsigned char c) { return is_word_char(c); });
}

std::optional<CategoryLabel> CategoryLabel::make(std::string_view text) {
    if (!is_label_token(text)) return std::nullopt;
    return CategoryLabel(std::string(text));
}

std::string build_prompt(std::string_view title, std::string_view description) {
    std::string prompt = "The YouTube video has the title: ";
    prompt += title;
    prompt += ", and the description: ";
    prompt += description;
    prompt += ". Categorise this YouTube video in only ONE word strictly.";
    return prompt;
}

CategoryLabel sanitize_category(std::string_view raw) {
    std::string kept;
    kept.reserve(raw.size());
    for (unsigned char c : raw)
        if (is_word_char(c)) kept += static_cast<char>(c);
    if (kept.empty()) return CategoryLabel::unknown();
    for (auto junk : kJunkLabels)
        if (iequals(kept, junk)) return CategoryLabel::unknown();
    return *CategoryLabel::make(kept);
}

CategoryLabel categorize(const std::optional<metadata::VideoMetadata>& meta, Categorizer& impl) {
    if (!meta || !meta->title) return CategoryLabel::unknown();
    return sanitize_category(impl.raw_label(*meta->title, meta->description.value_or("")));
}

const std::vector<std::string>& category_order() {
    static const std::vector<std::string> kOrder = {
        "CarsandVehicles", "Comedy",          "Education",             "Entertainment",
        "FilmandAnimation", "Gaming",         "HowtoandStyle",         "Music",
        "NewsandPolitics", "NonprofitsandActivism", "PeopleandBlogs", "PetsandAnimals",
        "ScienceandTechnology", "Sport",      "TravelandEvents",
    };
    return kOrder;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current += static_cast<char>(std::tolower(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

KeywordTable KeywordTable::parse(std::string_view text) {
    KeywordTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        const auto tab = view.find('\t');
        if (tab == std::string_view::npos)
            throw std::invalid_argument("category_keywords line " + std::to_string(line_no) + ": missing tab");
        Row row;
        row.category = std::string(trim(view.substr(0, tab)));
        if (!is_label_token(row.category))
            throw std::invalid_argument("category_keywords line " + std::to_string(line_no) +
                                        ": category must be a single token");
        std::string_view rest = view.substr(tab + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            auto phrase = tokenize(rest.substr(0, comma));
            if (!phrase.empty()) row.keywords.push_back(std::move(phrase));
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        table.rows_.push_back(std::move(row));
    }
    return table;
}

KeywordTable KeywordTable::builtin() {
    static const KeywordTable kTable = parse(builtin_keyword_text());
    return kTable;
}

KeywordTable KeywordTable::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open keyword table " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

CategoryLabel fallback_categorize(std::string_view title, std::string_view description,
                                  const KeywordTable& table) {
    std::string text(title);
    text += ' ';
    text += description;
    const auto tokens = tokenize(text);

    const auto& order = category_order();
    auto rank = [&](const std::string& category, std::size_t row_index) {
        auto it = std::find(order.begin(), order.end(), category);
        // categories outside the fifteen rank after them, in table order
        return it != order.end() ? static_cast<std::size_t>(it - order.begin()) : order.size() + row_index;
    };

    std::optional<std::size_t> best_row;
    std::size_t best_score = 0;
    std::size_t best_rank = 0;
    for (std::size_t r = 0; r < table.rows().size(); ++r) {
        const auto& row = table.rows()[r];
        std::size_t score = 0;
        for (const auto& phrase : row.keywords) score += count_occurrences(tokens, phrase);
        if (score == 0) continue;
        const std::size_t row_rank = rank(row.category, r);
        if (!best_row || score > best_score || (score == best_score && row_rank < best_rank)) {
            best_row = r;
            best_score = score;
            best_rank = row_rank;
        }
    }
    if (!best_row) return *CategoryLabel::make("PeopleandBlogs");
    return *CategoryLabel::make(table.rows()[*best_row].category);
}

CategoryLabel fallback_categorize(std::string_view title, std::string_view description) {
    static const KeywordTable kTable = KeywordTable::builtin();
    return fallback_categorize(title, description, kTable);
}

std::string KeywordCategorizer::raw_label(const std::string& title, const std::string& description) {
    return fallback_categorize(title, description, table_).str();
}

std::string RetryingCategorizer::raw_label(const std::string& title, const std::string& description) {
    for (int attempt = 1;; ++attempt) {
        try {
            return primary_.raw_label(title, description);
        } catch (const CategorizerError& e) {
            if (e.retryable() && attempt < attempts_) continue;
            if (fallback_) return fallback_->raw_label(title, description);
            throw;
        }
    }
}

}  // namespace emotrack::categorize
