// SPDX-License-Identifier: Apache-2.0
//
// The tool library: parsed descriptors bound to embeddings in a vector store,
// plus the id -> entry lookup used when a tool is called.
#pragma once

#include "tulip/embedding.hpp"
#include "tulip/tooldef.hpp"
#include "tulip/vecstore.hpp"

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

namespace tulip {

enum class Binding { Native, File };

std::string_view to_string(Binding binding) noexcept;

struct ToolEntry {
    ToolDescriptor descriptor;
    std::string document;
    std::optional<std::filesystem::path> source_path;
    Binding binding = Binding::Native;

    const std::string& id() const noexcept { return descriptor.qualified_id; }
    bool operator==(const ToolEntry&) const = default;
};

struct SearchHit {
    ToolEntry entry;
    double distance = 0.0;
};

struct SearchOutcome {
    std::vector<SearchHit> hits;
    EmbeddingUsage usage;
};

struct LibraryConfig {
    /// Empty: in-memory only.
    std::filesystem::path store_path;
    /// Where create_tool writes `{module}.tdf`; required for CRUD on files.
    std::filesystem::path tool_dir;
    std::shared_ptr<EmbeddingBackend> embedding;
};

struct ModuleSource {
    std::string module;
    std::string text;
    std::optional<std::filesystem::path> path;
    Binding binding = Binding::Native;
};

/// Reads every `*.tdf` under `dir` (sorted by name) as a file-bound module.
std::vector<ModuleSource> read_tool_dir(const std::filesystem::path& dir);

/// Lowercase snake_case of free text, e.g. for generated module names.
std::string snake_case(std::string_view text);

class ToolLibrary {
public:
    explicit ToolLibrary(LibraryConfig config);

    /// Parses and embeds every public function of `sources`. Embeddings of an
    /// existing store at `store_path` are reused when the document is
    /// unchanged. Throws ParseError (module context) or DuplicateId.
    void initialize(std::span<const ModuleSource> sources);

    /// Throws EmptyInput or backend errors.
    SearchOutcome search(std::string_view query_text, std::size_t top_k,
                         std::optional<double> max_distance = std::nullopt) const;

    /// Exactly one public function; module is `{function}_module`. Writes the
    /// file, embeds, and binds as a file tool. Throws InvalidSource or
    /// DuplicateId.
    ToolEntry create_tool(std::string_view source_text);
    /// Throws UnknownId, InvalidSource or NameChanged.
    ToolEntry update_tool(const std::string& qualified_id, std::string_view new_source_text);
    /// Throws UnknownId.
    void delete_tool(const std::string& qualified_id);
    /// Throws UnknownId.
    ToolEntry lookup(const std::string& qualified_id) const;
    std::optional<ToolEntry> find(const std::string& qualified_id) const;

    std::size_t count() const;
    /// Sorted by id.
    std::vector<ToolEntry> entries() const;
    std::vector<std::string> modules() const;

    /// Writes the store to `store_path` (no-op when empty).
    void persist() const;

    /// Tokens it takes to embed every document of the last initialize(),
    /// counting cached embeddings at their original cost. This is what a
    /// benchmark run is charged for building the library.
    EmbeddingUsage initialization_usage() const;
    /// All embedding tokens this instance has consumed (init, CRUD, search).
    std::uint64_t embedding_tokens_consumed() const;

    const EmbeddingBackend& embedding() const { return *config_.embedding; }
    const VectorStore& store() const { return store_; }
    const LibraryConfig& config() const { return config_; }

private:
    ToolEntry make_entry(ToolDescriptor d, std::optional<std::filesystem::path> path, Binding binding) const;
    StoreEntry make_store_entry(const ToolEntry& entry, EmbeddingVector embedding) const;
    ToolDescriptor parse_single(std::string_view module, std::string_view source) const;
    std::filesystem::path module_path(const std::string& module) const;
    void persist_locked() const;

    LibraryConfig config_;
    mutable std::shared_mutex mutex_;
    VectorStore store_;
    std::map<std::string, ToolEntry> lookup_;
    EmbeddingUsage init_usage_;
    mutable std::atomic<std::uint64_t> tokens_consumed_{0};
};

} // namespace tulip
