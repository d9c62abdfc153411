// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tulip/embedding.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace tulip {

struct StoreEntry {
    std::string id;
    std::string document;
    EmbeddingVector embedding;
    std::map<std::string, std::string> metadata;

    bool operator==(const StoreEntry&) const = default;
};

struct QueryResult {
    std::string id;
    double distance = 0.0;
    std::string document;
};

/// Σ (a_i − b_i)² accumulated left to right in double precision.
double squared_l2(std::span<const double> a, std::span<const double> b) noexcept;

/// Exact nearest-neighbour store over squared L2 distance. Readers share,
/// writers are exclusive.
class VectorStore {
public:
    static constexpr int format_version = 1;

    explicit VectorStore(std::size_t dimension);

    VectorStore(const VectorStore& other);
    VectorStore& operator=(const VectorStore& other);

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t count() const;
    bool contains(const std::string& id) const;

    /// Throws DuplicateId or DimensionMismatch.
    void add(StoreEntry entry);
    /// Throws UnknownId or DimensionMismatch. Atomic with respect to queries.
    void update(StoreEntry entry);
    /// Throws UnknownId.
    void remove(const std::string& id);
    /// Throws UnknownId.
    StoreEntry get(const std::string& id) const;
    std::optional<StoreEntry> find(const std::string& id) const;
    /// Sorted by id.
    std::vector<StoreEntry> entries() const;

    /// Ascending distance, ties by id; at most `top_k` results, all within
    /// `max_distance` when given. Throws DimensionMismatch.
    std::vector<QueryResult> query(std::span<const double> q, std::size_t top_k,
                                   std::optional<double> max_distance = std::nullopt) const;

    /// Writes `{version, dimension, entries[]}` JSON plus a trailing CRC32
    /// line through a temp file and rename. Throws IoError.
    void persist(const std::filesystem::path& path) const;
    /// Throws IoError or CorruptStore.
    static VectorStore load(const std::filesystem::path& path);

    bool operator==(const VectorStore& other) const;

private:
    std::size_t dimension_;
    mutable std::shared_mutex mutex_;
    std::vector<StoreEntry> entries_;
    std::unordered_map<std::string, std::size_t> index_;

    void check_dimension(std::size_t got) const;
};

} // namespace tulip
