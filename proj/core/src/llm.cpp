// SPDX-License-Identifier: Apache-2.0
#include "tulip/llm.hpp"

#include "http_client.hpp"
#include "text_util.hpp"
#include "tulip/error.hpp"

#include <fmt/format.h>

#include <fstream>

namespace tulip {

std::string_view to_string(Role role) noexcept
{
    switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    case Role::Tool: return "tool";
    }
    return "user";
}

namespace {

Role role_from_string(const std::string& s)
{
    if (s == "system")
        return Role::System;
    if (s == "user")
        return Role::User;
    if (s == "assistant")
        return Role::Assistant;
    if (s == "tool")
        return Role::Tool;
    throw Error(Errc::ConfigError, fmt::format("unknown message role `{}`", s));
}

Json parse_arguments(const Json& raw, const std::string& function)
{
    if (raw.is_object())
        return raw;
    if (!raw.is_string())
        throw Error(Errc::BackendError, fmt::format("arguments of `{}` are neither an object nor JSON text", function));
    // Trailing whitespace is tolerated; anything else must be strict JSON.
    auto text = raw.get<std::string>();
    while (!text.empty() && detail::is_space(text.back()))
        text.pop_back();
    Json parsed;
    try {
        parsed = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw BackendError(-1, text.substr(0, 512),
                           fmt::format("arguments of `{}` are not valid JSON: {}", function, e.what()));
    }
    if (!parsed.is_object())
        throw BackendError(-1, text.substr(0, 512), fmt::format("arguments of `{}` are not a JSON object", function));
    return parsed;
}

ToolCall call_from_json(const Json& j, std::size_t index)
{
    ToolCall call;
    call.call_id = j.value("id", fmt::format("call_{}", index));
    const Json& fn = j.contains("function") ? j.at("function") : j;
    if (!fn.contains("name") || !fn.at("name").is_string())
        throw Error(Errc::BackendError, "tool call without a function name");
    call.tool_id = fn.at("name").get<std::string>();
    call.arguments = fn.contains("arguments") ? parse_arguments(fn.at("arguments"), call.tool_id) : Json::object();
    return call;
}

std::uint64_t count(const Json& j, const char* key)
{
    if (!j.contains(key))
        return 0;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw Error(Errc::ConfigError, fmt::format("usage field `{}` must be a non-negative integer", key));
    return v.get<std::uint64_t>();
}

} // namespace

Json to_json(const ChatMessage& m)
{
    Json j = {{"role", to_string(m.role)}, {"content", m.content}};
    if (!m.tool_calls.empty()) {
        Json calls = Json::array();
        for (const auto& c : m.tool_calls)
            calls.push_back({{"id", c.call_id},
                             {"type", "function"},
                             {"function", {{"name", c.tool_id}, {"arguments", c.arguments.dump()}}}});
        j["tool_calls"] = std::move(calls);
    }
    if (m.tool_call_id)
        j["tool_call_id"] = *m.tool_call_id;
    return j;
}

ChatMessage message_from_json(const Json& j)
{
    if (!j.is_object())
        throw Error(Errc::BackendError, "message is not an object");
    ChatMessage m;
    m.role = role_from_string(j.value("role", std::string("assistant")));
    if (j.contains("content") && j.at("content").is_string())
        m.content = j.at("content").get<std::string>();
    if (j.contains("tool_calls") && j.at("tool_calls").is_array()) {
        std::size_t i = 0;
        for (const auto& c : j.at("tool_calls"))
            m.tool_calls.push_back(call_from_json(c, i++));
    }
    if (j.contains("tool_call_id") && j.at("tool_call_id").is_string())
        m.tool_call_id = j.at("tool_call_id").get<std::string>();
    return m;
}

UsageRecord& UsageRecord::operator+=(const UsageRecord& other)
{
    if (model.empty())
        model = other.model;
    prompt_tokens += other.prompt_tokens;
    completion_tokens += other.completion_tokens;
    embedding_tokens += other.embedding_tokens;
    return *this;
}

Json to_json(const UsageRecord& u)
{
    return {{"model", u.model},
            {"prompt_tokens", u.prompt_tokens},
            {"completion_tokens", u.completion_tokens},
            {"embedding_tokens", u.embedding_tokens}};
}

ScriptedTranscript ScriptedTranscript::from_json(const Json& j)
{
    if (!j.is_object() || !j.contains("steps") || !j.at("steps").is_array())
        throw Error(Errc::ConfigError, "transcript must be an object with a `steps` array");
    ScriptedTranscript t;
    t.model = j.value("model", t.model);
    std::size_t index = 0;
    for (const auto& s : j.at("steps")) {
        if (!s.is_object() || !s.contains("response"))
            throw Error(Errc::ConfigError, fmt::format("transcript step {} has no `response`", index));
        ScriptStep step;
        if (s.contains("match"))
            step.match = s.at("match").get<std::string>();
        Json response = s.at("response");
        if (!response.contains("role"))
            response["role"] = "assistant";
        try {
            step.response = message_from_json(response);
        } catch (const Error& e) {
            throw Error(Errc::ConfigError, fmt::format("transcript step {}: {}", index, e.what()));
        }
        const Json usage = s.value("usage", Json::object());
        step.usage.model = usage.value("model", t.model);
        step.usage.prompt_tokens = count(usage, "prompt_tokens");
        step.usage.completion_tokens = count(usage, "completion_tokens");
        t.steps.push_back(std::move(step));
        ++index;
    }
    return t;
}

ScriptedTranscript ScriptedTranscript::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::IoError, fmt::format("cannot read transcript {}", path.string()));
    try {
        return from_json(Json::parse(in));
    } catch (const Json::parse_error& e) {
        throw Error(Errc::ConfigError, fmt::format("transcript {} is not JSON: {}", path.string(), e.what()));
    }
}

ScriptedBackend::ScriptedBackend(ScriptedTranscript transcript) : transcript_(std::move(transcript)) {}

ChatResponse ScriptedBackend::chat(const ChatRequest& request)
{
    std::lock_guard lock(mutex_);
    requests_.push_back(request);
    if (next_ >= transcript_.steps.size())
        throw Error(Errc::MatchFailure,
                    fmt::format("script exhausted: request {} has no step ({} steps)", next_ + 1,
                                transcript_.steps.size()));
    const auto& step = transcript_.steps[next_];
    if (step.match) {
        const ChatMessage* last = nullptr;
        for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it)
            if (it->role == Role::User || it->role == Role::Tool) {
                last = &*it;
                break;
            }
        if (!last || last->content.find(*step.match) == std::string::npos)
            throw Error(Errc::MatchFailure,
                        fmt::format("step {} expects `{}` in the last user/tool message, got `{}`", next_ + 1,
                                    *step.match, last ? last->content.substr(0, 200) : std::string()));
    }
    ++next_;
    return {step.response, step.usage};
}

std::size_t ScriptedBackend::consumed() const
{
    std::lock_guard lock(mutex_);
    return next_;
}

std::size_t ScriptedBackend::remaining() const
{
    std::lock_guard lock(mutex_);
    return transcript_.steps.size() - next_;
}

std::vector<ChatRequest> ScriptedBackend::requests() const
{
    std::lock_guard lock(mutex_);
    return requests_;
}

HttpChatBackend::HttpChatBackend(HttpChatConfig config) : config_(std::move(config))
{
    if (config_.base_url.empty())
        throw Error(Errc::ConfigError, "chat backend needs a base URL");
    if (config_.model.empty())
        throw Error(Errc::ConfigError, "chat backend needs a model name");
}

ChatResponse HttpChatBackend::chat(const ChatRequest& request)
{
    Json body = {{"model", config_.model}, {"temperature", request.temperature}};
    Json messages = Json::array();
    for (const auto& m : request.messages)
        messages.push_back(to_json(m));
    body["messages"] = std::move(messages);
    if (!request.tools.empty())
        body["tools"] = request.tools;

    detail::JsonHttpClient client(config_.base_url, config_.api_key, config_.timeout_seconds);
    Json reply = client.post("/chat/completions", body);
    auto excerpt = [&] { return reply.dump().substr(0, 512); };
    if (!reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty() ||
        !reply["choices"][0].contains("message"))
        throw BackendError(200, excerpt(), "chat response has no choices[0].message");

    ChatResponse out;
    try {
        out.message = message_from_json(reply["choices"][0]["message"]);
    } catch (const BackendError&) {
        throw;
    } catch (const Error& e) {
        throw BackendError(200, excerpt(), e.what());
    }
    out.message.role = Role::Assistant;
    out.usage.model = reply.value("model", config_.model);
    if (reply.contains("usage") && reply["usage"].is_object()) {
        const auto& u = reply["usage"];
        out.usage.prompt_tokens = u.value("prompt_tokens", std::uint64_t{0});
        out.usage.completion_tokens = u.value("completion_tokens", std::uint64_t{0});
    }
    // Pricing is keyed by the configured name, not the dated alias a service reports.
    out.usage.model = config_.model;
    return out;
}

CostTable::CostTable(std::map<std::string, ModelPrices> prices) : prices_(std::move(prices))
{
    for (const auto& [model, p] : prices_)
        if (p.input < 0 || p.output < 0 || p.embedding < 0)
            throw Error(Errc::ConfigError, fmt::format("negative price for `{}`", model));
}

CostTable CostTable::from_json(const Json& j)
{
    if (!j.is_object() || !j.contains("models") || !j.at("models").is_object())
        throw Error(Errc::ConfigError, "cost table must be an object with a `models` object");
    std::map<std::string, ModelPrices> prices;
    for (const auto& [model, p] : j.at("models").items()) {
        ModelPrices mp;
        mp.input = p.value("input", 0.0);
        mp.output = p.value("output", 0.0);
        mp.embedding = p.value("embedding", 0.0);
        prices.emplace(model, mp);
    }
    return CostTable(std::move(prices));
}

CostTable CostTable::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::IoError, fmt::format("cannot read cost table {}", path.string()));
    try {
        return from_json(Json::parse(in));
    } catch (const Json::parse_error& e) {
        throw Error(Errc::ConfigError, fmt::format("cost table {} is not JSON: {}", path.string(), e.what()));
    }
}

const ModelPrices& CostTable::prices(const std::string& model) const
{
    auto it = prices_.find(model);
    if (it == prices_.end())
        throw Error(Errc::UnknownModel, fmt::format("no prices for model `{}`", model));
    return it->second;
}

double CostTable::cost(const UsageRecord& u) const
{
    if (u.prompt_tokens == 0 && u.completion_tokens == 0 && u.embedding_tokens == 0)
        return 0.0;
    const auto& p = prices(u.model);
    return static_cast<double>(u.prompt_tokens) * p.input / 1e6 +
           static_cast<double>(u.completion_tokens) * p.output / 1e6 +
           static_cast<double>(u.embedding_tokens) * p.embedding / 1e6;
}

double CostTable::cost(std::span<const UsageRecord> ledger) const
{
    double total = 0.0;
    for (const auto& u : ledger)
        total += cost(u);
    return total;
}

Session::Session(ChatBackend& backend, SessionConfig config) : backend_(backend), config_(config)
{
    if (config_.max_interactions <= 0)
        throw Error(Errc::ConfigError, "max_interactions must be positive");
}

ChatResponse Session::complete(const std::vector<ChatMessage>& messages, const Json& tools)
{
    if (interactions_ >= config_.max_interactions)
        throw Error(Errc::InteractionLimitExceeded,
                    fmt::format("interaction limit of {} reached", config_.max_interactions));
    ++interactions_;
    auto response = backend_.chat({messages, tools, config_.temperature});
    if (response.usage.model.empty())
        response.usage.model = backend_.model();
    ledger_.push_back(response.usage);
    return response;
}

void Session::record_embedding(const EmbeddingUsage& usage)
{
    ledger_.push_back({usage.model, 0, 0, usage.token_count});
}

} // namespace tulip
