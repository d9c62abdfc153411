// SPDX-License-Identifier: Apache-2.0
#include "tulip/toollib.hpp"

#include "text_util.hpp"
#include "tulip/error.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

namespace tulip {

namespace fs = std::filesystem;

std::string_view to_string(Binding binding) noexcept
{
    return binding == Binding::Native ? "native" : "file";
}

namespace {

constexpr auto meta_module = "module";
constexpr auto meta_source = "source_path";
constexpr auto meta_binding = "binding";
constexpr auto meta_tokens = "embedding_tokens";

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoError, fmt::format("cannot read `{}`", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view text)
{
    std::error_code ec;
    if (path.has_parent_path())
        fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(Errc::IoError, fmt::format("cannot write `{}`", path.string()));
    out << text;
    if (!out)
        throw Error(Errc::IoError, fmt::format("write to `{}` failed", path.string()));
}

} // namespace

std::vector<ModuleSource> read_tool_dir(const fs::path& dir)
{
    std::vector<ModuleSource> out;
    if (!fs::exists(dir))
        return out;
    if (!fs::is_directory(dir))
        throw Error(Errc::IoError, fmt::format("`{}` is not a directory", dir.string()));
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".tdf")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files)
        out.push_back({f.stem().string(), read_file(f), f, Binding::File});
    return out;
}

std::string snake_case(std::string_view text)
{
    std::string out;
    for (unsigned char c : text) {
        if (std::isalnum(c))
            out += static_cast<char>(std::tolower(c));
        else if (!out.empty() && out.back() != '_')
            out += '_';
    }
    while (!out.empty() && out.back() == '_')
        out.pop_back();
    return out;
}

ToolLibrary::ToolLibrary(LibraryConfig config)
    : config_(std::move(config)),
      store_(config_.embedding ? config_.embedding->dimension() : 1)
{
    if (!config_.embedding)
        throw Error(Errc::ConfigError, "tool library needs an embedding backend");
}

ToolEntry ToolLibrary::make_entry(ToolDescriptor d, std::optional<fs::path> path, Binding binding) const
{
    ToolEntry e;
    e.document = embedding_document(d);
    e.descriptor = std::move(d);
    e.source_path = std::move(path);
    e.binding = binding;
    return e;
}

StoreEntry ToolLibrary::make_store_entry(const ToolEntry& entry, EmbeddingVector embedding) const
{
    StoreEntry s;
    s.id = entry.id();
    s.document = entry.document;
    s.embedding = std::move(embedding);
    s.metadata[meta_module] = entry.descriptor.module;
    s.metadata[meta_binding] = std::string(to_string(entry.binding));
    if (entry.source_path)
        s.metadata[meta_source] = entry.source_path->string();
    return s;
}

void ToolLibrary::initialize(std::span<const ModuleSource> sources)
{
    std::vector<ToolEntry> parsed;
    std::set<std::string> ids;
    for (const auto& src : sources) {
        auto file = parse_tool_file(src.module, src.text);
        for (auto& d : file.descriptors) {
            if (!ids.insert(d.qualified_id).second)
                throw Error(Errc::DuplicateId, fmt::format("tool id `{}` is defined twice", d.qualified_id));
            parsed.push_back(make_entry(std::move(d), src.path, src.binding));
        }
    }

    std::optional<VectorStore> previous;
    if (!config_.store_path.empty() && fs::exists(config_.store_path)) {
        previous = VectorStore::load(config_.store_path);
        if (previous->dimension() != config_.embedding->dimension()) {
            spdlog::warn("store `{}` has dimension {}, backend has {}; re-embedding",
                         config_.store_path.string(), previous->dimension(),
                         config_.embedding->dimension());
            previous.reset();
        }
    }

    VectorStore next(config_.embedding->dimension());
    std::vector<size_t> pending;
    std::vector<std::string> documents;
    std::vector<StoreEntry> built(parsed.size());
    std::uint64_t total_tokens = 0;

    for (size_t i = 0; i < parsed.size(); ++i) {
        std::optional<StoreEntry> cached;
        if (previous)
            cached = previous->find(parsed[i].id());
        if (cached && cached->document == parsed[i].document && cached->metadata.count(meta_tokens)) {
            built[i] = make_store_entry(parsed[i], std::move(cached->embedding));
            built[i].metadata[meta_tokens] = cached->metadata.at(meta_tokens);
            total_tokens += std::stoull(cached->metadata.at(meta_tokens));
        } else {
            pending.push_back(i);
            documents.push_back(parsed[i].document);
        }
    }

    if (!documents.empty()) {
        auto embedded = config_.embedding->embed_batch(documents);
        for (size_t j = 0; j < pending.size(); ++j) {
            auto i = pending[j];
            built[i] = make_store_entry(parsed[i], std::move(embedded[j].vector));
            built[i].metadata[meta_tokens] = std::to_string(embedded[j].usage.token_count);
            total_tokens += embedded[j].usage.token_count;
            tokens_consumed_ += embedded[j].usage.token_count;
        }
    }
    for (auto& s : built)
        next.add(std::move(s));

    std::unique_lock lock(mutex_);
    store_ = std::move(next);
    lookup_.clear();
    for (auto& e : parsed)
        lookup_.emplace(e.id(), std::move(e));
    init_usage_ = {config_.embedding->model(), total_tokens};
    spdlog::debug("tool library initialized: {} tools, {} embedding tokens ({} new)", lookup_.size(),
                  total_tokens, documents.empty() ? 0 : tokens_consumed_.load());
}

SearchOutcome ToolLibrary::search(std::string_view query_text, std::size_t top_k,
                                  std::optional<double> max_distance) const
{
    auto embedded = config_.embedding->embed_text(query_text);
    tokens_consumed_ += embedded.usage.token_count;

    SearchOutcome out;
    out.usage = embedded.usage;
    std::shared_lock lock(mutex_);
    for (auto& r : store_.query(embedded.vector, top_k, max_distance)) {
        auto it = lookup_.find(r.id);
        if (it != lookup_.end())
            out.hits.push_back({it->second, r.distance});
    }
    return out;
}

ToolDescriptor ToolLibrary::parse_single(std::string_view module, std::string_view source) const
{
    ToolDefinitionFile file;
    try {
        file = parse_tool_file(module, source);
    } catch (const ParseError& e) {
        throw Error(Errc::InvalidSource, e.what());
    }
    if (file.descriptors.size() != 1)
        throw Error(Errc::InvalidSource,
                    fmt::format("expected exactly one public function, found {}", file.descriptors.size()));
    return std::move(file.descriptors.front());
}

fs::path ToolLibrary::module_path(const std::string& module) const
{
    if (config_.tool_dir.empty())
        throw Error(Errc::ConfigError, "no tool directory configured for generated tools");
    return config_.tool_dir / (module + ".tdf");
}

void ToolLibrary::persist_locked() const
{
    if (!config_.store_path.empty())
        store_.persist(config_.store_path);
}

ToolEntry ToolLibrary::create_tool(std::string_view source_text)
{
    auto probe = parse_single("generated", source_text);
    const auto module = probe.name + "_module";
    auto descriptor = parse_single(module, source_text);

    std::unique_lock lock(mutex_);
    if (lookup_.count(descriptor.qualified_id))
        throw Error(Errc::DuplicateId, fmt::format("tool `{}` already exists", descriptor.qualified_id));

    auto path = module_path(module);
    auto entry = make_entry(std::move(descriptor), path, Binding::File);
    auto embedded = config_.embedding->embed_text(entry.document);
    tokens_consumed_ += embedded.usage.token_count;

    write_file(path, source_text);
    auto s = make_store_entry(entry, std::move(embedded.vector));
    s.metadata[meta_tokens] = std::to_string(embedded.usage.token_count);
    store_.add(std::move(s));
    lookup_.emplace(entry.id(), entry);
    persist_locked();
    spdlog::info("Made tool `{}` available via the tool library.", entry.id());
    return entry;
}

ToolEntry ToolLibrary::update_tool(const std::string& id, std::string_view new_source_text)
{
    std::unique_lock lock(mutex_);
    auto it = lookup_.find(id);
    if (it == lookup_.end())
        throw Error(Errc::UnknownId, fmt::format("unknown tool `{}`", id));
    const ToolEntry old = it->second;

    auto descriptor = parse_single(old.descriptor.module, new_source_text);
    if (descriptor.name != old.descriptor.name)
        throw Error(Errc::NameChanged, fmt::format("update renames `{}` to `{}`; function names must not change",
                                                   old.descriptor.name, descriptor.name));

    std::string file_text(new_source_text);
    std::optional<fs::path> path = old.source_path;
    if (old.binding == Binding::File) {
        if (!path)
            path = module_path(old.descriptor.module);
        // Other tools living in the same file keep their definitions.
        bool shared = std::any_of(lookup_.begin(), lookup_.end(), [&](const auto& kv) {
            return kv.first != id && kv.second.source_path == path;
        });
        if (shared) {
            auto current = read_file(*path);
            auto current_desc = parse_tool_file(old.descriptor.module, current);
            auto match = std::find_if(current_desc.descriptors.begin(), current_desc.descriptors.end(),
                                      [&](const auto& d) { return d.name == old.descriptor.name; });
            if (match == current_desc.descriptors.end())
                throw Error(Errc::IoError, fmt::format("`{}` no longer defines `{}`", path->string(),
                                                       old.descriptor.name));
            auto block = definition_text(current, *match);
            auto offset = static_cast<size_t>(block.data() - current.data());
            std::string replacement(new_source_text);
            if (!replacement.empty() && replacement.back() != '\n')
                replacement += '\n';
            file_text = current.substr(0, offset) + replacement + current.substr(offset + block.size());
        }
    }

    auto entry = make_entry(std::move(descriptor), path, old.binding);
    auto previous = store_.get(id);
    StoreEntry s;
    if (previous.document == entry.document) {
        s = make_store_entry(entry, std::move(previous.embedding));
        s.metadata[meta_tokens] = previous.metadata[meta_tokens];
    } else {
        auto embedded = config_.embedding->embed_text(entry.document);
        tokens_consumed_ += embedded.usage.token_count;
        s = make_store_entry(entry, std::move(embedded.vector));
        s.metadata[meta_tokens] = std::to_string(embedded.usage.token_count);
    }

    if (old.binding == Binding::File) {
        write_file(*path, file_text);
        // Line ranges of every tool in the rewritten file may have moved.
        auto reparsed = parse_tool_file(old.descriptor.module, file_text);
        for (auto& d : reparsed.descriptors) {
            if (d.name == entry.descriptor.name)
                entry.descriptor = d;
            else if (auto other = lookup_.find(d.qualified_id); other != lookup_.end())
                other->second.descriptor = d;
        }
    }
    store_.update(std::move(s));
    it->second = entry;
    persist_locked();
    return entry;
}

void ToolLibrary::delete_tool(const std::string& id)
{
    std::unique_lock lock(mutex_);
    auto it = lookup_.find(id);
    if (it == lookup_.end())
        throw Error(Errc::UnknownId, fmt::format("unknown tool `{}`", id));
    const ToolEntry old = it->second;

    if (old.binding == Binding::File && old.source_path && fs::exists(*old.source_path)) {
        bool shared = std::any_of(lookup_.begin(), lookup_.end(), [&](const auto& kv) {
            return kv.first != id && kv.second.source_path == old.source_path;
        });
        if (!shared) {
            fs::remove(*old.source_path);
        } else {
            auto current = read_file(*old.source_path);
            auto parsed = parse_tool_file(old.descriptor.module, current);
            auto match = std::find_if(parsed.descriptors.begin(), parsed.descriptors.end(),
                                      [&](const auto& d) { return d.name == old.descriptor.name; });
            if (match != parsed.descriptors.end()) {
                auto block = definition_text(current, *match);
                auto offset = static_cast<size_t>(block.data() - current.data());
                auto text = current.substr(0, offset) + current.substr(offset + block.size());
                write_file(*old.source_path, text);
                for (auto& d : parse_tool_file(old.descriptor.module, text).descriptors)
                    if (auto other = lookup_.find(d.qualified_id); other != lookup_.end())
                        other->second.descriptor = d;
            }
        }
    }
    store_.remove(id);
    lookup_.erase(it);
    persist_locked();
}

ToolEntry ToolLibrary::lookup(const std::string& id) const
{
    auto e = find(id);
    if (!e)
        throw Error(Errc::UnknownId, fmt::format("unknown tool `{}`", id));
    return std::move(*e);
}

std::optional<ToolEntry> ToolLibrary::find(const std::string& id) const
{
    std::shared_lock lock(mutex_);
    auto it = lookup_.find(id);
    if (it == lookup_.end())
        return std::nullopt;
    return it->second;
}

std::size_t ToolLibrary::count() const
{
    std::shared_lock lock(mutex_);
    return lookup_.size();
}

std::vector<ToolEntry> ToolLibrary::entries() const
{
    std::shared_lock lock(mutex_);
    std::vector<ToolEntry> out;
    out.reserve(lookup_.size());
    for (const auto& [id, e] : lookup_)
        out.push_back(e);
    return out;
}

std::vector<std::string> ToolLibrary::modules() const
{
    std::shared_lock lock(mutex_);
    std::set<std::string> names;
    for (const auto& [id, e] : lookup_)
        names.insert(e.descriptor.module);
    return {names.begin(), names.end()};
}

void ToolLibrary::persist() const
{
    std::shared_lock lock(mutex_);
    persist_locked();
}

EmbeddingUsage ToolLibrary::initialization_usage() const
{
    std::shared_lock lock(mutex_);
    return init_usage_;
}

std::uint64_t ToolLibrary::embedding_tokens_consumed() const
{
    return tokens_consumed_.load();
}

} // namespace tulip
