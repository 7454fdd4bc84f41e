#include "emotrack/store.hpp"

#include <json.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace emotrack::store {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kDocSuffix = ".json";

bool is_plain(unsigned char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-';
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

[[noreturn]] void io_failure(const std::string& what, const fs::path& p) {
    throw StoreError(StoreErrorKind::IoFailure,
                     what + " '" + p.string() + "': " + std::strerror(errno));
}

void fsync_dir(const fs::path& dir) {
    int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
    if (fd < 0) io_failure("cannot open directory", dir);
    ::fsync(fd);
    ::close(fd);
}

void write_all_durable(const fs::path& target, const std::string& bytes) {
    static std::atomic<unsigned long> counter{0};
    fs::path tmp = target;
    tmp += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1));

    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) io_failure("cannot create", tmp);
    const char* data = bytes.data();
    std::size_t left = bytes.size();
    while (left > 0) {
        ssize_t n = ::write(fd, data, left);
        if (n < 0) {
            if (errno == EINTR) continue;
            ::close(fd);
            ::unlink(tmp.c_str());
            io_failure("write failed", tmp);
        }
        data += n;
        left -= static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0) {
        ::close(fd);
        ::unlink(tmp.c_str());
        io_failure("fsync failed", tmp);
    }
    ::close(fd);
    if (::rename(tmp.c_str(), target.c_str()) != 0) {
        ::unlink(tmp.c_str());
        io_failure("rename failed", target);
    }
    fsync_dir(target.parent_path());
}

void require_document(const DocumentPath& path) {
    if (!path.is_document())
        throw StoreError(StoreErrorKind::InvalidPath, "not a document path: " + path.str());
}

void require_collection(const DocumentPath& path) {
    if (!path.is_collection())
        throw StoreError(StoreErrorKind::InvalidPath, "not a collection path: " + path.str());
}

}  // namespace

DocumentPath::DocumentPath(std::vector<std::string> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) throw StoreError(StoreErrorKind::InvalidPath, "empty path");
    for (const auto& s : segments_) {
        if (s.empty()) throw StoreError(StoreErrorKind::InvalidPath, "empty path segment");
        if (s.find('/') != std::string::npos || s.find('\\') != std::string::npos ||
            s.find('\0') != std::string::npos)
            throw StoreError(StoreErrorKind::InvalidPath, "separator in path segment: " + s);
    }
}

DocumentPath DocumentPath::child(std::string name) const {
    auto segs = segments_;
    segs.push_back(std::move(name));
    return DocumentPath(std::move(segs));
}

std::string DocumentPath::str() const {
    std::string out;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (i) out += '/';
        out += segments_[i];
    }
    return out;
}

std::string encode_segment(std::string_view segment) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(segment.size());
    for (unsigned char c : segment) {
        if (is_plain(c)) {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += kHex[c >> 4];
            out += kHex[c & 0xF];
        }
    }
    return out;
}

std::string decode_segment(std::string_view encoded) {
    std::string out;
    out.reserve(encoded.size());
    for (std::size_t i = 0; i < encoded.size(); ++i) {
        if (encoded[i] == '%' && i + 2 < encoded.size()) {
            int hi = hex_value(encoded[i + 1]);
            int lo = hex_value(encoded[i + 2]);
            if (hi >= 0 && lo >= 0) {
                out += static_cast<char>(hi * 16 + lo);
                i += 2;
                continue;
            }
        }
        out += encoded[i];
    }
    return out;
}

std::string serialize(const Document& doc) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, value] : doc) {
        std::visit([&](const auto& v) { j[name] = v; }, value);
    }
    try {
        return j.dump();
    } catch (const nlohmann::json::exception& e) {
        throw StoreError(StoreErrorKind::IoFailure, std::string("unserializable document: ") + e.what());
    }
}

Document deserialize(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw StoreError(StoreErrorKind::IoFailure, std::string("corrupt document: ") + e.what());
    }
    if (!j.is_object()) throw StoreError(StoreErrorKind::IoFailure, "corrupt document: not an object");
    Document doc;
    for (const auto& [name, v] : j.items()) {
        if (v.is_string()) {
            doc.emplace(name, v.get<std::string>());
        } else if (v.is_boolean()) {
            doc.emplace(name, v.get<bool>());
        } else if (v.is_number_integer()) {
            doc.emplace(name, v.get<std::int64_t>());
        } else {
            throw StoreError(StoreErrorKind::IoFailure, "corrupt document: non-scalar field " + name);
        }
    }
    return doc;
}

DocumentStore::DocumentStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw StoreError(StoreErrorKind::IoFailure, "cannot create store root '" + root_.string() + "': " + ec.message());
}

fs::path DocumentStore::file_for(const DocumentPath& path) const {
    fs::path p = root_;
    const auto& segs = path.segments();
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) p /= encode_segment(segs[i]);
    std::string leaf = encode_segment(segs.back());
    if (path.is_document()) leaf += kDocSuffix;
    return p / leaf;
}

std::shared_ptr<std::mutex> DocumentStore::lock_for(const DocumentPath& path) const {
    std::lock_guard guard(locks_mutex_);
    auto& slot = locks_[path.str()];
    if (!slot) slot = std::make_shared<std::mutex>();
    return slot;
}

Document DocumentStore::read_locked(const DocumentPath& path) const {
    const fs::path file = file_for(path);
    std::ifstream in(file, std::ios::binary);
    if (!in) throw StoreError(StoreErrorKind::NotFound, "no document at " + path.str());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str());
}

void DocumentStore::write_locked(const DocumentPath& path, const Document& doc) {
    const fs::path file = file_for(path);
    const std::string bytes = serialize(doc);
    std::error_code ec;
    fs::create_directories(file.parent_path(), ec);
    if (ec) throw StoreError(StoreErrorKind::IoFailure, "cannot create '" + file.parent_path().string() + "': " + ec.message());
    write_all_durable(file, bytes);
}

void DocumentStore::put_document(const DocumentPath& path, const Document& doc) {
    require_document(path);
    auto lock = lock_for(path);
    std::lock_guard guard(*lock);
    write_locked(path, doc);
}

void DocumentStore::update_fields(const DocumentPath& path, const Document& partial) {
    require_document(path);
    auto lock = lock_for(path);
    std::lock_guard guard(*lock);
    Document current = read_locked(path);
    if (partial.empty()) return;
    for (const auto& [name, value] : partial) current[name] = value;
    write_locked(path, current);
}

Document DocumentStore::get_document(const DocumentPath& path) const {
    require_document(path);
    auto lock = lock_for(path);
    std::lock_guard guard(*lock);
    return read_locked(path);
}

bool DocumentStore::exists(const DocumentPath& path) const {
    require_document(path);
    std::error_code ec;
    return fs::is_regular_file(file_for(path), ec);
}

std::vector<std::pair<std::string, Document>> DocumentStore::list_collection(const DocumentPath& path) const {
    require_collection(path);
    const fs::path dir = file_for(path);
    std::vector<std::string> names;
    std::error_code ec;
    if (fs::is_directory(dir, ec)) {
        for (const auto& entry : fs::directory_iterator(dir, ec)) {
            if (!entry.is_regular_file()) continue;
            const std::string file = entry.path().filename().string();
            if (file.size() <= kDocSuffix.size() ||
                file.compare(file.size() - kDocSuffix.size(), kDocSuffix.size(), kDocSuffix) != 0)
                continue;
            const std::string stem = file.substr(0, file.size() - kDocSuffix.size());
            // temp files carry a '.', which encoded names never contain
            if (stem.find('.') != std::string::npos) continue;
            names.push_back(decode_segment(stem));
        }
        if (ec) throw StoreError(StoreErrorKind::IoFailure, "cannot list '" + dir.string() + "': " + ec.message());
    }
    std::sort(names.begin(), names.end());

    std::vector<std::pair<std::string, Document>> out;
    out.reserve(names.size());
    for (auto& name : names) {
        DocumentPath doc_path = path.child(name);
        try {
            out.emplace_back(name, get_document(doc_path));
        } catch (const StoreError& e) {
            if (e.kind() != StoreErrorKind::NotFound) throw;
        }
    }
    return out;
}

}  // namespace emotrack::store
