// SPDX-License-Identifier: Apache-2.0
//
// Chat completion with function calling. Two backends: a scripted replay of a
// recorded transcript, and an OpenAI-compatible HTTP client. A Session wraps a
// backend with the interaction limit and a per-call usage ledger.
#pragma once

#include "tulip/embedding.hpp"
#include "tulip/json.hpp"
#include "tulip/tool_call.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tulip {

enum class Role { System, User, Assistant, Tool };

std::string_view to_string(Role role) noexcept;

struct ChatMessage {
    Role role = Role::User;
    std::string content;
    /// Assistant messages only. `tool_id` holds the function name the model used.
    std::vector<ToolCall> tool_calls;
    /// Tool messages only.
    std::optional<std::string> tool_call_id;

    static ChatMessage system(std::string content) { return {Role::System, std::move(content), {}, {}}; }
    static ChatMessage user(std::string content) { return {Role::User, std::move(content), {}, {}}; }
    static ChatMessage assistant(std::string content, std::vector<ToolCall> calls = {})
    {
        return {Role::Assistant, std::move(content), std::move(calls), {}};
    }
    static ChatMessage tool(std::string call_id, std::string content)
    {
        return {Role::Tool, std::move(content), {}, std::move(call_id)};
    }

    bool operator==(const ChatMessage&) const = default;
};

/// Chat-completions wire shape.
Json to_json(const ChatMessage& message);
/// Accepts the wire shape (`function.arguments` as JSON text) and the
/// transcript shape (`name` and `arguments` object on the call itself).
ChatMessage message_from_json(const Json& j);

struct UsageRecord {
    std::string model;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
    std::uint64_t embedding_tokens = 0;

    UsageRecord& operator+=(const UsageRecord& other);
    bool operator==(const UsageRecord&) const = default;
};

Json to_json(const UsageRecord& usage);

struct ChatRequest {
    std::vector<ChatMessage> messages;
    /// Function schemas, `[{"type": "function", "function": {...}}, ...]`.
    Json tools = Json::array();
    double temperature = 1e-9;
};

struct ChatResponse {
    ChatMessage message;
    UsageRecord usage;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string model() const = 0;
    virtual ChatResponse chat(const ChatRequest& request) = 0;
};

struct ScriptStep {
    /// Substring that must occur in the last user or tool message.
    std::optional<std::string> match;
    ChatMessage response;
    UsageRecord usage;
};

struct ScriptedTranscript {
    std::string model = "scripted";
    std::vector<ScriptStep> steps;

    /// `{"model"?: ..., "steps": [{"match"?, "response", "usage"}]}`. Throws
    /// Error(ConfigError) on schema problems.
    static ScriptedTranscript from_json(const Json& j);
    static ScriptedTranscript load(const std::filesystem::path& path);
};

/// Replays a transcript strictly in order.
class ScriptedBackend final : public ChatBackend {
public:
    explicit ScriptedBackend(ScriptedTranscript transcript);

    std::string model() const override { return transcript_.model; }
    /// Throws Error(MatchFailure) naming the step when the matcher fails or
    /// the script is exhausted.
    ChatResponse chat(const ChatRequest& request) override;

    std::size_t consumed() const;
    std::size_t remaining() const;
    std::vector<ChatRequest> requests() const;

private:
    ScriptedTranscript transcript_;
    mutable std::mutex mutex_;
    std::size_t next_ = 0;
    std::vector<ChatRequest> requests_;
};

struct HttpChatConfig {
    std::string base_url;
    std::string api_key;
    std::string model;
    int timeout_seconds = 120;
};

/// OpenAI-compatible `POST {base_url}/chat/completions`.
class HttpChatBackend final : public ChatBackend {
public:
    explicit HttpChatBackend(HttpChatConfig config);

    std::string model() const override { return config_.model; }
    ChatResponse chat(const ChatRequest& request) override;

private:
    HttpChatConfig config_;
};

struct ModelPrices {
    double input = 0.0;
    double output = 0.0;
    double embedding = 0.0;
};

/// USD per 1e6 tokens, keyed by model name.
class CostTable {
public:
    CostTable() = default;
    explicit CostTable(std::map<std::string, ModelPrices> prices);

    /// `{"models": {"<name>": {"input": x, "output": y, "embedding": z}}}`.
    static CostTable from_json(const Json& j);
    static CostTable load(const std::filesystem::path& path);

    bool contains(const std::string& model) const { return prices_.count(model) != 0; }
    /// Throws Error(UnknownModel).
    const ModelPrices& prices(const std::string& model) const;

    double cost(const UsageRecord& usage) const;
    double cost(std::span<const UsageRecord> ledger) const;

private:
    std::map<std::string, ModelPrices> prices_;
};

struct SessionConfig {
    int max_interactions = 100;
    double temperature = 1e-9;
};

/// One query's worth of LLM traffic. Not thread-safe.
class Session {
public:
    explicit Session(ChatBackend& backend, SessionConfig config = {});

    /// Throws Error(InteractionLimitExceeded) before the call that would
    /// exceed the limit.
    ChatResponse complete(const std::vector<ChatMessage>& messages, const Json& tools = Json::array());

    void record_embedding(const EmbeddingUsage& usage);

    int interactions() const noexcept { return interactions_; }
    const std::vector<UsageRecord>& ledger() const noexcept { return ledger_; }
    ChatBackend& backend() noexcept { return backend_; }
    const SessionConfig& config() const noexcept { return config_; }

private:
    ChatBackend& backend_;
    SessionConfig config_;
    int interactions_ = 0;
    std::vector<UsageRecord> ledger_;
};

} // namespace tulip
