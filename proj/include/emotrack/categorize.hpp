#pragma once

#include "emotrack/metadata.hpp"

#include <atomic>
#include <filesystem>
#include <istream>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace emotrack::categorize {

/// Reserved label for unavailable videos and junk model output.
inline constexpr std::string_view kUnknown = "Unknown";

/// A single `[0-9A-Za-z_]+` token.
class CategoryLabel {
public:
    /// nullopt unless `text` is a valid token.
    static std::optional<CategoryLabel> make(std::string_view text);
    static CategoryLabel unknown() { return CategoryLabel(std::string(kUnknown)); }

    const std::string& str() const noexcept { return value_; }
    bool is_unknown() const noexcept { return value_ == kUnknown; }

    friend bool operator==(const CategoryLabel&, const CategoryLabel&) = default;
    friend auto operator<=>(const CategoryLabel&, const CategoryLabel&) = default;

private:
    explicit CategoryLabel(std::string value) : value_(std::move(value)) {}
    std::string value_;
};

bool is_label_token(std::string_view text);

/// The one-word categorization prompt, verbatim.
std::string build_prompt(std::string_view title, std::string_view description);

/// Drops every character outside `[0-9A-Za-z_]`. Empty results and the
/// known junk labels (Unspecified, Uncategorized, Unknown, Undefined, any
/// case) collapse to "Unknown".
CategoryLabel sanitize_category(std::string_view raw);

class CategorizerError : public std::runtime_error {
public:
    CategorizerError(const std::string& what, bool retryable)
        : std::runtime_error(what), retryable_(retryable) {}
    bool retryable() const noexcept { return retryable_; }

private:
    bool retryable_;
};

/// (title, description) -> raw label text. Output is always sanitized downstream.
class Categorizer {
public:
    virtual ~Categorizer() = default;
    virtual std::string raw_label(const std::string& title, const std::string& description) = 0;
};

/// Unavailable metadata yields "Unknown" without consulting `impl`.
CategoryLabel categorize(const std::optional<metadata::VideoMetadata>& meta, Categorizer& impl);

/// YouTube's fifteen categories as single tokens, in tie-break order.
const std::vector<std::string>& category_order();

/// `CategoryToken<TAB>keyword,keyword,...` per line; `#` starts a comment.
class KeywordTable {
public:
    struct Row {
        std::string category;
        std::vector<std::vector<std::string>> keywords;  // each keyword as a token sequence
    };

    static KeywordTable builtin();
    static KeywordTable parse(std::string_view text);
    static KeywordTable from_file(const std::filesystem::path& path);

    const std::vector<Row>& rows() const noexcept { return rows_; }

private:
    std::vector<Row> rows_;
};

/// Text of the shipped keyword table.
std::string_view builtin_keyword_text();

/// Lowercased `[a-z0-9]+` runs of `text`.
std::vector<std::string> tokenize(std::string_view text);

/// Case-insensitive keyword-occurrence scoring over title + description.
/// Ties go to the earlier category in category_order(); no hits gives "PeopleandBlogs".
CategoryLabel fallback_categorize(std::string_view title, std::string_view description,
                                  const KeywordTable& table);
CategoryLabel fallback_categorize(std::string_view title, std::string_view description);

class KeywordCategorizer : public Categorizer {
public:
    KeywordCategorizer() : table_(KeywordTable::builtin()) {}
    explicit KeywordCategorizer(KeywordTable table) : table_(std::move(table)) {}
    std::string raw_label(const std::string& title, const std::string& description) override;

private:
    KeywordTable table_;
};

struct ChatConfig {
    std::string base_url = "https://api.openai.com";
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-3.5-turbo";
    std::string api_key;
    double temperature = 0.0;
    int max_in_flight = 2;
    int timeout_seconds = 60;
};

/// Sends the prompt as the single user message of a chat-completion request
/// and returns the first choice's message content.
class ChatCompletionCategorizer : public Categorizer {
public:
    explicit ChatCompletionCategorizer(ChatConfig config);
    std::string raw_label(const std::string& title, const std::string& description) override;

    std::size_t requests_sent() const noexcept { return requests_; }

private:
    ChatConfig config_;
    std::counting_semaphore<256> in_flight_;
    std::atomic<std::size_t> requests_{0};
};

/// Retries retryable failures of `primary`, then hands over to `fallback`
/// when one is given, otherwise rethrows.
class RetryingCategorizer : public Categorizer {
public:
    RetryingCategorizer(Categorizer& primary, int attempts, Categorizer* fallback = nullptr)
        : primary_(primary), attempts_(attempts < 1 ? 1 : attempts), fallback_(fallback) {}
    std::string raw_label(const std::string& title, const std::string& description) override;

private:
    Categorizer& primary_;
    int attempts_;
    Categorizer* fallback_;
};

}  // namespace emotrack::categorize
