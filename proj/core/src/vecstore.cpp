// SPDX-License-Identifier: Apache-2.0
#include "tulip/vecstore.hpp"

#include "tulip/error.hpp"
#include "tulip/json.hpp"

#include <fmt/format.h>
#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>

namespace tulip {

double squared_l2(std::span<const double> a, std::span<const double> b) noexcept
{
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

VectorStore::VectorStore(std::size_t dimension) : dimension_(dimension)
{
    if (dimension_ == 0)
        throw Error(Errc::ConfigError, "vector store dimension must be positive");
}

VectorStore::VectorStore(const VectorStore& other) : dimension_(other.dimension_)
{
    std::shared_lock lock(other.mutex_);
    entries_ = other.entries_;
    index_ = other.index_;
}

VectorStore& VectorStore::operator=(const VectorStore& other)
{
    if (this == &other)
        return *this;
    std::scoped_lock lock(mutex_);
    std::shared_lock other_lock(other.mutex_);
    dimension_ = other.dimension_;
    entries_ = other.entries_;
    index_ = other.index_;
    return *this;
}

void VectorStore::check_dimension(std::size_t got) const
{
    if (got != dimension_)
        throw Error(Errc::DimensionMismatch,
                    fmt::format("embedding dimension {} does not match store dimension {}", got, dimension_));
}

std::size_t VectorStore::count() const
{
    std::shared_lock lock(mutex_);
    return entries_.size();
}

bool VectorStore::contains(const std::string& id) const
{
    std::shared_lock lock(mutex_);
    return index_.count(id) != 0;
}

void VectorStore::add(StoreEntry entry)
{
    check_dimension(entry.embedding.size());
    std::unique_lock lock(mutex_);
    if (index_.count(entry.id))
        throw Error(Errc::DuplicateId, fmt::format("id `{}` is already in the store", entry.id));
    index_.emplace(entry.id, entries_.size());
    entries_.push_back(std::move(entry));
}

void VectorStore::update(StoreEntry entry)
{
    check_dimension(entry.embedding.size());
    std::unique_lock lock(mutex_);
    auto it = index_.find(entry.id);
    if (it == index_.end())
        throw Error(Errc::UnknownId, fmt::format("id `{}` is not in the store", entry.id));
    entries_[it->second] = std::move(entry);
}

void VectorStore::remove(const std::string& id)
{
    std::unique_lock lock(mutex_);
    auto it = index_.find(id);
    if (it == index_.end())
        throw Error(Errc::UnknownId, fmt::format("id `{}` is not in the store", id));
    const auto slot = it->second;
    index_.erase(it);
    if (slot + 1 != entries_.size()) {
        entries_[slot] = std::move(entries_.back());
        index_[entries_[slot].id] = slot;
    }
    entries_.pop_back();
}

StoreEntry VectorStore::get(const std::string& id) const
{
    auto entry = find(id);
    if (!entry)
        throw Error(Errc::UnknownId, fmt::format("id `{}` is not in the store", id));
    return std::move(*entry);
}

std::optional<StoreEntry> VectorStore::find(const std::string& id) const
{
    std::shared_lock lock(mutex_);
    auto it = index_.find(id);
    if (it == index_.end())
        return std::nullopt;
    return entries_[it->second];
}

std::vector<StoreEntry> VectorStore::entries() const
{
    std::vector<StoreEntry> out;
    {
        std::shared_lock lock(mutex_);
        out = entries_;
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return out;
}

std::vector<QueryResult> VectorStore::query(std::span<const double> q, std::size_t top_k,
                                            std::optional<double> max_distance) const
{
    check_dimension(q.size());
    if (top_k == 0)
        return {};

    struct Scored {
        double distance;
        const StoreEntry* entry;
    };
    auto closer = [](const Scored& a, const Scored& b) {
        if (a.distance != b.distance)
            return a.distance < b.distance;
        return a.entry->id < b.entry->id;
    };

    std::shared_lock lock(mutex_);
    std::vector<Scored> scored;
    scored.reserve(entries_.size());
    for (const auto& e : entries_) {
        const double d = squared_l2(q, e.embedding);
        if (max_distance && !(d <= *max_distance))
            continue;
        scored.push_back({d, &e});
    }
    const auto k = std::min(top_k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(), closer);

    std::vector<QueryResult> out;
    out.reserve(k);
    for (size_t i = 0; i < k; ++i)
        out.push_back({scored[i].entry->id, scored[i].distance, scored[i].entry->document});
    return out;
}

namespace {

std::uint32_t crc32_of(std::string_view bytes)
{
    uLong crc = ::crc32(0L, Z_NULL, 0);
    crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
    return static_cast<std::uint32_t>(crc);
}

constexpr std::string_view crc_prefix = "crc32 ";

} // namespace

void VectorStore::persist(const std::filesystem::path& path) const
{
    Json doc;
    doc["version"] = format_version;
    doc["dimension"] = dimension_;
    Json list = Json::array();
    for (const auto& e : entries()) {
        Json meta = Json::object();
        for (const auto& [k, v] : e.metadata)
            meta[k] = v;
        list.push_back({{"id", e.id}, {"document", e.document}, {"embedding", e.embedding}, {"metadata", meta}});
    }
    doc["entries"] = std::move(list);

    const auto body = doc.dump(1);
    const auto text = fmt::format("{}\n{}{:08x}\n", body, crc_prefix, crc32_of(body));

    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(Errc::IoError, fmt::format("cannot write `{}`", tmp.string()));
        out << text;
        out.flush();
        if (!out)
            throw Error(Errc::IoError, fmt::format("write to `{}` failed", tmp.string()));
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw Error(Errc::IoError, fmt::format("cannot rename `{}` to `{}`: {}", tmp.string(),
                                               path.string(), ec.message()));
}

VectorStore VectorStore::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoError, fmt::format("cannot open store `{}`", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();

    auto corrupt = [&](const std::string& why) {
        return Error(Errc::CorruptStore, fmt::format("store `{}` is corrupt: {}", path.string(), why));
    };

    while (!text.empty() && text.back() == '\n')
        text.pop_back();
    auto nl = text.rfind('\n');
    if (nl == std::string::npos)
        throw corrupt("missing checksum line");
    std::string_view body(text.data(), nl);
    std::string_view trailer(text.data() + nl + 1, text.size() - nl - 1);
    if (trailer.substr(0, crc_prefix.size()) != crc_prefix)
        throw corrupt("missing checksum line");
    const auto expected = fmt::format("{:08x}", crc32_of(body));
    if (trailer.substr(crc_prefix.size()) != expected)
        throw corrupt("checksum mismatch");

    try {
        auto doc = Json::parse(body);
        if (doc.at("version").get<int>() != format_version)
            throw corrupt(fmt::format("unsupported version {}", doc.at("version").dump()));
        VectorStore store(doc.at("dimension").get<std::size_t>());
        for (const auto& item : doc.at("entries")) {
            StoreEntry e;
            e.id = item.at("id").get<std::string>();
            e.document = item.at("document").get<std::string>();
            e.embedding = item.at("embedding").get<EmbeddingVector>();
            for (const auto& [k, v] : item.at("metadata").items())
                e.metadata[k] = v.get<std::string>();
            store.add(std::move(e));
        }
        return store;
    } catch (const Json::exception& e) {
        throw corrupt(e.what());
    } catch (const Error& e) {
        if (e.code() == Errc::CorruptStore)
            throw;
        throw corrupt(e.what());
    }
}

bool VectorStore::operator==(const VectorStore& other) const
{
    return dimension_ == other.dimension_ && entries() == other.entries();
}

} // namespace tulip
