#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace emotrack::store {

/// Field value. Documents hold scalars only.
using Value = std::variant<std::string, std::int64_t, bool>;

/// Field name -> value. std::map keeps names unique and gives a canonical order.
using Document = std::map<std::string, Value>;

enum class StoreErrorKind { InvalidPath, NotFound, IoFailure };

class StoreError : public std::runtime_error {
public:
    StoreError(StoreErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    StoreErrorKind kind() const noexcept { return kind_; }

private:
    StoreErrorKind kind_;
};

/// Alternating collection/document names: `Users/{uid}/Mood Records/{id}`.
/// Even length addresses a document, odd length a collection.
class DocumentPath {
public:
    DocumentPath() = default;
    explicit DocumentPath(std::vector<std::string> segments);
    DocumentPath(std::initializer_list<std::string> segments)
        : DocumentPath(std::vector<std::string>(segments)) {}

    const std::vector<std::string>& segments() const noexcept { return segments_; }
    bool is_document() const noexcept { return !segments_.empty() && segments_.size() % 2 == 0; }
    bool is_collection() const noexcept { return segments_.size() % 2 == 1; }

    DocumentPath child(std::string name) const;
    std::string str() const;

    friend bool operator==(const DocumentPath&, const DocumentPath&) = default;

private:
    std::vector<std::string> segments_;
};

/// Percent-encodes a path segment for use as a file or directory name.
/// Only `[A-Za-z0-9_-]` pass through unchanged.
std::string encode_segment(std::string_view segment);
std::string decode_segment(std::string_view encoded);

/// Canonical on-disk form: compact JSON object, keys in byte order.
std::string serialize(const Document& doc);
Document deserialize(std::string_view text);

/// File-backed hierarchical document store.
///
/// One directory per collection and one `<name>.json` file per document, with
/// subcollections of a document living in a sibling directory named after it.
/// Writes go to a temp file that is fsynced and renamed over the target, so an
/// acknowledged write survives a crash. Thread-safe with per-document locking.
class DocumentStore {
public:
    explicit DocumentStore(std::filesystem::path root);

    const std::filesystem::path& root() const noexcept { return root_; }

    void put_document(const DocumentPath& path, const Document& doc);
    void update_fields(const DocumentPath& path, const Document& partial);
    Document get_document(const DocumentPath& path) const;
    bool exists(const DocumentPath& path) const;
    std::vector<std::pair<std::string, Document>> list_collection(const DocumentPath& path) const;

    std::filesystem::path file_for(const DocumentPath& path) const;

private:
    std::shared_ptr<std::mutex> lock_for(const DocumentPath& path) const;
    Document read_locked(const DocumentPath& path) const;
    void write_locked(const DocumentPath& path, const Document& doc);

    std::filesystem::path root_;
    mutable std::mutex locks_mutex_;
    mutable std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

}  // namespace emotrack::store
