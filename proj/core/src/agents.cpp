// SPDX-License-Identifier: Apache-2.0
#include "tulip/agents.hpp"

#include "text_util.hpp"
#include "tulip/error.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <sstream>

namespace tulip {

namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 10> variant_names{{
    {Variant::Base, "Base"},
    {Variant::NaiveTool, "NaiveTool"},
    {Variant::CotTool, "CotTool"},
    {Variant::MinimalTulip, "MinimalTulip"},
    {Variant::NaiveTulip, "NaiveTulip"},
    {Variant::CotTulip, "CotTulip"},
    {Variant::InformedCotTulip, "InformedCotTulip"},
    {Variant::PrimedCotTulip, "PrimedCotTulip"},
    {Variant::OneShotCotTulip, "OneShotCotTulip"},
    {Variant::AutoTulip, "AutoTulip"},
}};

constexpr std::string_view search_tools_name = "search_tools";

constexpr std::array<std::string_view, 6> generic_names{
    "search_tools", "decompose_task", "search_tool_library", "create_tool", "update_tool", "delete_tool"};

Json function_schema(std::string_view name, std::string_view description, Json properties)
{
    Json required = Json::array();
    for (const auto& [key, _] : properties.items())
        required.push_back(key);
    return {{"type", "function"},
            {"function",
             {{"name", name},
              {"description", description},
              {"parameters", {{"type", "object"}, {"properties", std::move(properties)}, {"required", required}}}}}};
}

Json string_param(std::string_view description)
{
    return {{"type", "string"}, {"description", description}};
}

Json search_tools_schema(std::string_view name = search_tools_name)
{
    return function_schema(
        name, "Search for tools in your tool library.",
        {{"action_descriptions",
          {{"type", "array"},
           {"items", {{"type", "string"}}},
           {"description", "A list of textual descriptions for various actions you want to execute."}}}});
}

Json auto_tulip_schemas()
{
    Json tools = Json::array();
    tools.push_back(function_schema("decompose_task", "Break a task down into a list of atomic subtasks.",
                                    {{"task", string_param("The task to decompose.")}}));
    tools.push_back(search_tools_schema("search_tool_library"));
    tools.push_back(function_schema(
        "create_tool", "Generate a new tool for a generic task and add it to the tool library.",
        {{"task_description", string_param("A generic description of the task the new tool solves.")}}));
    tools.push_back(function_schema(
        "update_tool", "Change an existing tool in the tool library according to an instruction.",
        {{"tool_name", string_param("The name of the tool to change.")},
         {"instruction", string_param("What to change about the tool.")}}));
    tools.push_back(function_schema("delete_tool", "Remove a tool from the tool library.",
                                    {{"tool_name", string_param("The name of the tool to delete.")}}));
    return tools;
}

std::string schema_name(const Json& schema)
{
    return schema.at("function").at("name").get<std::string>();
}

std::vector<std::string> schema_names(const Json& tools)
{
    std::vector<std::string> names;
    for (const auto& t : tools)
        names.push_back(schema_name(t));
    return names;
}

ChatResponse record_complete(Session& session, SessionTrace& trace, const std::vector<ChatMessage>& messages,
                             const Json& tools, std::string purpose)
{
    auto response = session.complete(messages, tools);
    trace.completions.push_back(
        {std::move(purpose), schema_names(tools), tools.empty() ? 0 : tools.dump().size(), response.usage});
    return response;
}

std::optional<Plan> parse_plan(const std::string& content)
{
    Json j;
    try {
        j = Json::parse(detail::strip_code_fence(content));
    } catch (const Json::parse_error&) {
        return std::nullopt;
    }
    if (!j.is_object() || !j.contains("subtasks") || !j.at("subtasks").is_array())
        return std::nullopt;
    Plan plan;
    for (const auto& s : j.at("subtasks")) {
        if (!s.is_string())
            return std::nullopt;
        auto text = std::string(detail::trim(s.get<std::string>()));
        if (text.empty())
            return std::nullopt;
        plan.subtasks.push_back(std::move(text));
    }
    if (plan.subtasks.empty())
        return std::nullopt;
    return plan;
}

std::optional<std::vector<std::string>> string_list(const Json& j)
{
    if (!j.is_array())
        return std::nullopt;
    std::vector<std::string> out;
    for (const auto& v : j) {
        if (!v.is_string())
            return std::nullopt;
        auto text = std::string(detail::trim(v.get<std::string>()));
        if (!text.empty())
            out.push_back(std::move(text));
    }
    return out;
}

/// Search strings from a reply to the tool-search prompt: the `search_tools`
/// call's arguments, else a JSON body, else nothing.
std::optional<std::vector<std::string>> action_descriptions(const ChatMessage& reply)
{
    for (const auto& call : reply.tool_calls)
        if (call.tool_id == search_tools_name && call.arguments.contains("action_descriptions"))
            if (auto list = string_list(call.arguments.at("action_descriptions")); list && !list->empty())
                return list;
    try {
        auto j = Json::parse(detail::strip_code_fence(reply.content));
        if (j.is_object() && j.contains("action_descriptions"))
            if (auto list = string_list(j.at("action_descriptions")); list && !list->empty())
                return list;
    } catch (const Json::parse_error&) {
    }
    return std::nullopt;
}

std::vector<SearchHit> merge_hits(std::vector<SearchHit> hits, std::size_t top_k)
{
    std::stable_sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.entry.id() < b.entry.id();
    });
    std::vector<SearchHit> out;
    for (auto& h : hits) {
        if (out.size() == top_k)
            break;
        if (std::none_of(out.begin(), out.end(), [&](const SearchHit& o) { return o.entry.id() == h.entry.id(); }))
            out.push_back(std::move(h));
    }
    return out;
}

std::string required_string(const Json& arguments, const char* key)
{
    if (!arguments.contains(key) || !arguments.at(key).is_string())
        throw Error(Errc::ArgumentError, fmt::format("missing string argument `{}`", key));
    return arguments.at(key).get<std::string>();
}

/// Errors that mean the conversation itself cannot continue.
bool is_fatal(Errc code)
{
    return code == Errc::InteractionLimitExceeded || code == Errc::MatchFailure || code == Errc::BackendError;
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

std::string_view to_string(Variant variant) noexcept
{
    for (const auto& [v, name] : variant_names)
        if (v == variant)
            return name;
    return "CotTulip";
}

std::optional<Variant> variant_from_string(std::string_view text) noexcept
{
    if (text.size() > 5 && text.substr(text.size() - 5) == "Agent")
        text.remove_suffix(5);
    for (const auto& [v, name] : variant_names)
        if (name == text)
            return v;
    return std::nullopt;
}

const std::vector<Variant>& all_variants()
{
    static const std::vector<Variant> all = [] {
        std::vector<Variant> v;
        for (const auto& [variant, _] : variant_names)
            v.push_back(variant);
        return v;
    }();
    return all;
}

bool uses_library_search(Variant v) noexcept
{
    return v != Variant::Base && v != Variant::NaiveTool && v != Variant::CotTool;
}

void validate(const AgentConfig& c)
{
    if (c.top_k == 0)
        throw Error(Errc::ConfigError, "top_k must be positive");
    if (!(c.recursion_distance_ceiling > 0))
        throw Error(Errc::ConfigError, "recursion_distance_ceiling must be positive");
    if (c.max_recursion_depth < 0)
        throw Error(Errc::ConfigError, "max_recursion_depth must be non-negative");
    if (c.max_interactions <= 0)
        throw Error(Errc::ConfigError, "max_interactions must be positive");
    if (c.temperature < 0)
        throw Error(Errc::ConfigError, "temperature must be non-negative");
    if (c.priming_pool_size == 0)
        throw Error(Errc::ConfigError, "priming_pool_size must be positive");
    if (c.codegen_attempts <= 0)
        throw Error(Errc::ConfigError, "codegen_attempts must be positive");
}

bool is_generic_tool(std::string_view name) noexcept
{
    return std::find(generic_names.begin(), generic_names.end(), name) != generic_names.end();
}

std::string unqualified_name(std::string_view tool_id)
{
    auto pos = tool_id.rfind("__");
    return std::string(pos == std::string_view::npos ? tool_id : tool_id.substr(pos + 2));
}

UsageRecord SessionTrace::total_usage() const
{
    UsageRecord total;
    for (const auto& u : usage) {
        total.prompt_tokens += u.prompt_tokens;
        total.completion_tokens += u.completion_tokens;
        total.embedding_tokens += u.embedding_tokens;
    }
    return total;
}

Json SessionTrace::to_json() const
{
    Json j;
    j["variant"] = tulip::to_string(variant);
    j["query"] = query;
    j["final_response"] = final_response;
    j["failed"] = failed;
    if (failed)
        j["failure"] = failure;

    Json calls = Json::array();
    for (const auto& e : tool_calls) {
        Json c = {{"call_id", e.call.call_id},
                  {"tool", e.call.tool_id},
                  {"name", e.tool_name},
                  {"generic", e.generic},
                  {"arguments", e.call.arguments}};
        if (e.result.ok())
            c["result"] = *e.result.value;
        else
            c["error"] = *e.result.error;
        calls.push_back(std::move(c));
    }
    j["tool_calls"] = std::move(calls);

    Json searches_json = Json::array();
    for (const auto& s : searches) {
        Json hits = Json::array();
        for (const auto& [id, d] : s.hits)
            hits.push_back({{"id", id}, {"distance", d}});
        searches_json.push_back({{"depth", s.depth}, {"query", s.query}, {"hits", std::move(hits)}});
    }
    j["searches"] = std::move(searches_json);

    Json completions_json = Json::array();
    for (const auto& c : completions)
        completions_json.push_back({{"purpose", c.purpose},
                                    {"tools", c.tool_names},
                                    {"schema_bytes", c.schema_bytes},
                                    {"usage", tulip::to_json(c.usage)}});
    j["completions"] = std::move(completions_json);

    Json ledger = Json::array();
    for (const auto& u : usage)
        ledger.push_back(tulip::to_json(u));
    j["usage"] = std::move(ledger);

    Json msgs = Json::array();
    for (const auto& m : messages)
        msgs.push_back(tulip::to_json(m));
    j["messages"] = std::move(msgs);
    return j;
}

struct Agent::Run {
    Session session;
    SessionTrace trace;
    std::vector<ChatMessage> messages;
    Json schemas = Json::array();
    std::string final_response;
};

Agent::Agent(AgentConfig config, ChatBackend& backend, ToolLibrary* library, const Runtime* runtime)
    : config_(std::move(config)), backend_(backend), library_(library), runtime_(runtime)
{
    validate(config_);
    if (!library_ && config_.variant != Variant::Base)
        throw Error(Errc::ConfigError, fmt::format("{} needs a tool library", to_string(config_.variant)));
}

void Agent::reset()
{
    history_.clear();
    auto_tools_.clear();
}

QueryOutcome Agent::run_query(std::string_view query)
{
    Run run{Session(backend_, {config_.max_interactions, config_.temperature}), {}, history_, Json::array(), {}};
    run.trace.variant = config_.variant;
    run.trace.query = std::string(query);
    spdlog::info("Query: {}", query);

    try {
        if (detail::trim(query).empty())
            throw Error(Errc::EmptyInput, "query is empty");
        switch (config_.variant) {
        case Variant::Base: run_base(run); break;
        case Variant::NaiveTool: run_naive_tool(run, false); break;
        case Variant::CotTool: run_naive_tool(run, true); break;
        case Variant::MinimalTulip: run_minimal_tulip(run); break;
        case Variant::NaiveTulip: run_naive_tulip(run); break;
        case Variant::CotTulip:
        case Variant::InformedCotTulip:
        case Variant::PrimedCotTulip:
        case Variant::OneShotCotTulip: run_cot_tulip(run); break;
        case Variant::AutoTulip: run_auto_tulip(run); break;
        }
        run.trace.final_response = run.final_response;
        history_ = run.messages;
    } catch (const Error& e) {
        run.trace.failed = true;
        run.trace.failure = fmt::format("{}: {}", errc_name(e.code()), e.what());
    } catch (const std::exception& e) {
        run.trace.failed = true;
        run.trace.failure = e.what();
    }
    if (run.trace.failed)
        spdlog::warn("Query failed: {}", run.trace.failure);
    run.trace.messages = run.messages;
    run.trace.usage = run.session.ledger();
    last_trace_ = run.trace;
    return {run.trace.final_response, std::move(run.trace)};
}

Plan Agent::decompose(Session& session, SessionTrace& trace, std::vector<ChatMessage>& messages,
                      std::string_view query, const Json& tools, std::string_view context)
{
    auto prompt = prompts::format(config_.prompts.decomposition, {{"prompt", std::string(query)}});
    if (!context.empty())
        prompt += "\n" + std::string(context);
    messages.push_back(ChatMessage::user(std::move(prompt)));
    for (int attempt = 0; attempt < 2; ++attempt) {
        if (attempt == 1)
            messages.push_back(ChatMessage::user(config_.prompts.decomposition_reminder));
        auto response = record_complete(session, trace, messages, tools, "decompose");
        messages.push_back(response.message);
        if (auto plan = parse_plan(response.message.content)) {
            spdlog::info("Subtasks: {}", fmt::join(plan->subtasks, " | "));
            return *plan;
        }
    }
    throw Error(Errc::DecompositionFormatError,
                fmt::format("no non-empty `subtasks` list in the decomposition of `{}`", query));
}

Plan Agent::plan_for(Session& session, SessionTrace& trace, std::string_view query, std::string_view context)
{
    std::vector<ChatMessage> side{ChatMessage::system(config_.prompts.cot_tulip_system)};
    return decompose(session, trace, side, query, Json::array(), context);
}

std::vector<std::string> Agent::request_search_strings(Session& session, SessionTrace& trace,
                                                       std::vector<ChatMessage>& messages, const Plan& plan,
                                                       ChatMessage& reply)
{
    messages.push_back(ChatMessage::user(
        prompts::format(config_.prompts.tool_search, {{"tasks", prompts::numbered(plan.subtasks)}})));
    Json tools = Json::array({search_tools_schema()});
    auto response = record_complete(session, trace, messages, tools, "search");
    reply = response.message;
    auto descriptions = action_descriptions(reply).value_or(plan.subtasks);
    spdlog::info("Tool search for: {}", fmt::join(descriptions, " | "));
    return descriptions;
}

std::vector<SearchHit> Agent::search_library(Session& session, SessionTrace& trace, const std::string& query,
                                             std::size_t top_k, std::optional<double> ceiling, int depth)
{
    auto outcome = library_->search(query, top_k, ceiling);
    session.record_embedding(outcome.usage);
    SearchEvent event{depth, query, {}};
    for (const auto& h : outcome.hits)
        event.hits.emplace_back(h.entry.id(), h.distance);
    trace.searches.push_back(std::move(event));
    return std::move(outcome.hits);
}

std::vector<SearchResult> Agent::search_tools_recursive(Session& session, SessionTrace& trace,
                                                        const std::vector<std::string>& descriptions, int depth)
{
    if (!library_)
        throw Error(Errc::ConfigError, "search needs a tool library");
    std::vector<SearchResult> results;
    for (const auto& description : descriptions) {
        auto hits = search_library(session, trace, description, config_.top_k, config_.recursion_distance_ceiling,
                                   depth);
        if (hits.empty() && depth < config_.max_recursion_depth) {
            // Nothing close enough: split the task further and search again.
            std::vector<ChatMessage> side{ChatMessage::system(config_.prompts.cot_tulip_system)};
            auto plan = decompose(session, trace, side, description);
            ChatMessage reply;
            auto strings = request_search_strings(session, trace, side, plan, reply);
            std::vector<SearchHit> gathered;
            for (auto& sub : search_tools_recursive(session, trace, strings, depth + 1))
                for (auto& h : sub.tools)
                    gathered.push_back(std::move(h));
            hits = merge_hits(std::move(gathered), config_.top_k);
        }
        results.push_back({description, std::move(hits)});
    }
    return results;
}

void Agent::add_schema(Run& run, const ToolEntry& entry)
{
    auto schema = descriptor_schema(entry.descriptor);
    for (auto& s : run.schemas)
        if (schema_name(s) == entry.id()) {
            s = std::move(schema);
            return;
        }
    run.schemas.push_back(std::move(schema));
}

void Agent::remove_schema(Run& run, const std::string& id)
{
    Json kept = Json::array();
    for (auto& s : run.schemas)
        if (schema_name(s) != id)
            kept.push_back(std::move(s));
    run.schemas = std::move(kept);
}

std::string Agent::library_summary() const
{
    if (!config_.library_description.empty())
        return config_.library_description;
    auto modules = library_->modules();
    return fmt::format("Your tool library contains {} tools across the modules {}.", library_->count(),
                       fmt::join(modules, ", "));
}

std::string Agent::execute_loop(Run& run, const std::string& purpose)
{
    for (;;) {
        auto response = record_complete(run.session, run.trace, run.messages, run.schemas, purpose);
        run.messages.push_back(response.message);
        if (response.message.tool_calls.empty())
            return response.message.content;
        // One at a time, in the order the model emitted them.
        for (const auto& call : response.message.tool_calls) {
            auto result = dispatch(run, call);
            std::string name = unqualified_name(call.tool_id);
            if (library_)
                if (auto entry = library_->find(call.tool_id))
                    name = entry->descriptor.name;
            if (result.ok())
                spdlog::info("Function {} returned `{}` for arguments {}.", call.tool_id, result.content(),
                             call.arguments.dump());
            else
                spdlog::info("Function {} failed: {}", call.tool_id, *result.error);
            run.messages.push_back(ChatMessage::tool(call.call_id, result.content()));
            run.trace.tool_calls.push_back({call, std::move(result), name, is_generic_tool(call.tool_id)});
        }
    }
}

ToolResult Agent::dispatch(Run& run, const ToolCall& call)
{
    auto names = schema_names(run.schemas);
    if (std::find(names.begin(), names.end(), call.tool_id) == names.end())
        return ToolResult::failure(call.call_id, fmt::format("Tool `{}` is not available.", call.tool_id),
                                   Errc::UnknownTool);
    if (is_generic_tool(call.tool_id)) {
        try {
            std::string content;
            if (call.tool_id == "search_tools")
                content = tool_search_tools(run, call.arguments, false);
            else if (call.tool_id == "search_tool_library")
                content = tool_search_tools(run, call.arguments, true);
            else if (call.tool_id == "decompose_task")
                content = tool_decompose_task(run, call.arguments);
            else if (call.tool_id == "create_tool")
                content = tool_create_tool(run, call.arguments);
            else if (call.tool_id == "update_tool")
                content = tool_update_tool(run, call.arguments);
            else
                content = tool_delete_tool(run, call.arguments);
            return ToolResult::success(call.call_id, std::move(content));
        } catch (const Error& e) {
            if (is_fatal(e.code()))
                throw;
            return ToolResult::failure(call.call_id, e.what(), e.code());
        }
    }
    if (!runtime_)
        return ToolResult::failure(call.call_id, "No tool executor is configured.", Errc::NotExecutable);
    return runtime_->execute(call);
}

std::string Agent::tool_search_tools(Run& run, const Json& arguments, bool with_ceiling)
{
    auto list = arguments.contains("action_descriptions") ? string_list(arguments.at("action_descriptions"))
                                                          : std::nullopt;
    if (!list)
        throw Error(Errc::ArgumentError, "`action_descriptions` must be a list of strings");
    Json found = Json::object();
    std::optional<double> ceiling;
    if (with_ceiling)
        ceiling = config_.recursion_distance_ceiling;
    for (const auto& description : *list) {
        auto hits = search_library(run.session, run.trace, description, config_.top_k, ceiling, 0);
        Json ids = Json::array();
        for (const auto& h : hits) {
            add_schema(run, h.entry);
            ids.push_back(h.entry.id());
        }
        spdlog::info("Tools found for `{}`: {}", description, ids.dump());
        found[description] = std::move(ids);
    }
    return found.dump();
}

std::string Agent::tool_decompose_task(Run& run, const Json& arguments)
{
    auto plan = plan_for(run.session, run.trace, required_string(arguments, "task"), {});
    return Json{{"subtasks", plan.subtasks}}.dump();
}

std::string Agent::generate_code(Run& run, std::string_view user_prompt, const std::string* keep_name)
{
    std::vector<ChatMessage> messages{ChatMessage::system(config_.prompts.codegen_system),
                                      ChatMessage::user(std::string(user_prompt))};
    std::string problems;
    for (int attempt = 0; attempt < config_.codegen_attempts; ++attempt) {
        auto response = record_complete(run.session, run.trace, messages, Json::array(), "codegen");
        auto code = detail::strip_code_fence(response.message.content);
        std::vector<std::string> errors;
        try {
            auto parsed = parse_tool_file("candidate", code);
            if (parsed.descriptors.size() != 1)
                errors.push_back(fmt::format("expected exactly one public function, found {}",
                                             parsed.descriptors.size()));
            else if (keep_name && parsed.descriptors.front().name != *keep_name)
                errors.push_back(fmt::format("the function must keep the name `{}`", *keep_name));
        } catch (const ParseError& e) {
            errors.push_back(fmt::format("line {}: {}", e.line(), e.detail()));
        }
        if (errors.empty() && runtime_)
            for (const auto& d : runtime_->validate_source(code))
                errors.push_back(d.line ? fmt::format("line {}: {}", d.line, d.message) : d.message);
        if (errors.empty()) {
            spdlog::info("Successfully generated code for the task `{} ...`", user_prompt.substr(0, user_prompt.find('\n')));
            return code;
        }
        problems = fmt::format("{}", fmt::join(errors, "\n"));
        spdlog::warn("Generated code rejected (attempt {}): {}", attempt + 1, problems);
        messages.push_back(response.message);
        messages.push_back(ChatMessage::user(prompts::format(config_.prompts.codegen_fix, {{"errors", problems}})));
    }
    throw Error(Errc::InvalidSource, fmt::format("no valid code after {} attempts: {}", config_.codegen_attempts,
                                                 problems));
}

std::string Agent::tool_create_tool(Run& run, const Json& arguments)
{
    auto task = required_string(arguments, "task_description");
    spdlog::info("Creating tool: {}", arguments.dump());
    auto code = generate_code(run, prompts::format(config_.prompts.codegen_create, {{"task", task}}), nullptr);
    auto entry = library_->create_tool(code);
    add_schema(run, entry);
    return fmt::format("Made tool `{}` available via the tool library.", entry.id());
}

std::string Agent::tool_update_tool(Run& run, const Json& arguments)
{
    auto id = required_string(arguments, "tool_name");
    auto instruction = required_string(arguments, "instruction");
    spdlog::info("Updating tool: {}", arguments.dump());
    auto entry = library_->lookup(id);
    std::string code;
    if (entry.source_path && std::filesystem::exists(*entry.source_path)) {
        auto text = read_text(*entry.source_path);
        auto parsed = parse_tool_file(entry.descriptor.module, text);
        code = parsed.descriptors.size() == 1 ? text : std::string(definition_text(text, entry.descriptor));
    } else {
        throw Error(Errc::NotExecutable, fmt::format("the source of `{}` is not available for editing", id));
    }
    auto prompt = prompts::format(config_.prompts.codegen_update, {{"instruction", instruction}, {"code", code}});
    auto updated = library_->update_tool(id, generate_code(run, prompt, &entry.descriptor.name));
    add_schema(run, updated);
    return fmt::format("Successfully updated `{}`.", id);
}

std::string Agent::tool_delete_tool(Run& run, const Json& arguments)
{
    auto id = required_string(arguments, "tool_name");
    spdlog::info("Deleting tool: {}", arguments.dump());
    library_->delete_tool(id);
    remove_schema(run, id);
    return fmt::format("Successfully deleted `{}`.", id);
}

void Agent::run_base(Run& run)
{
    if (run.messages.empty())
        run.messages.push_back(ChatMessage::system(config_.prompts.base_system));
    run.messages.push_back(ChatMessage::user(run.trace.query));
    auto response = record_complete(run.session, run.trace, run.messages, Json::array(), "answer");
    // Base has no tools; any calls it hallucinates are dropped.
    response.message.tool_calls.clear();
    run.messages.push_back(response.message);
    run.final_response = response.message.content;
}

void Agent::run_naive_tool(Run& run, bool cot)
{
    for (const auto& entry : library_->entries())
        add_schema(run, entry);
    if (run.messages.empty())
        run.messages.push_back(ChatMessage::system(config_.prompts.naive_tool_system));
    if (cot) {
        auto plan = decompose(run.session, run.trace, run.messages, run.trace.query, run.schemas);
        run.messages.push_back(ChatMessage::user(
            prompts::format(config_.prompts.execution, {{"steps", prompts::numbered(plan.subtasks)}})));
    } else {
        run.messages.push_back(ChatMessage::user(run.trace.query));
    }
    run.final_response = execute_loop(run, "execute");
}

void Agent::run_minimal_tulip(Run& run)
{
    for (const auto& h : search_library(run.session, run.trace, run.trace.query, config_.top_k, std::nullopt, 0))
        add_schema(run, h.entry);
    if (run.messages.empty())
        run.messages.push_back(ChatMessage::system(config_.prompts.naive_tool_system));
    run.messages.push_back(ChatMessage::user(run.trace.query));
    run.final_response = execute_loop(run, "execute");
}

void Agent::run_naive_tulip(Run& run)
{
    run.schemas.push_back(search_tools_schema());
    if (run.messages.empty())
        run.messages.push_back(ChatMessage::system(config_.prompts.cot_tulip_system));
    run.messages.push_back(ChatMessage::user(run.trace.query));
    run.final_response = execute_loop(run, "execute");
}

void Agent::run_cot_tulip(Run& run)
{
    const auto variant = config_.variant;
    if (run.messages.empty()) {
        std::string system = config_.prompts.cot_tulip_system;
        if (variant == Variant::OneShotCotTulip)
            system += "\n\n" + config_.prompts.one_shot_example;
        run.messages.push_back(ChatMessage::system(std::move(system)));
    }

    std::string context;
    if (variant == Variant::InformedCotTulip) {
        context = library_summary();
    } else if (variant == Variant::PrimedCotTulip) {
        std::vector<std::string> names;
        for (const auto& h : search_library(run.session, run.trace, run.trace.query, config_.priming_pool_size,
                                            std::nullopt, 0))
            names.push_back(h.entry.descriptor.name);
        if (!names.empty())
            context = fmt::format("Your tool library includes tools such as: {}.", fmt::join(names, ", "));
    }

    auto plan = decompose(run.session, run.trace, run.messages, run.trace.query, Json::array(), context);
    ChatMessage reply;
    auto descriptions = request_search_strings(run.session, run.trace, run.messages, plan, reply);
    auto results = search_tools_recursive(run.session, run.trace, descriptions, 0);

    std::vector<std::string> missing;
    Json found = Json::object();
    for (const auto& r : results) {
        Json ids = Json::array();
        for (const auto& h : r.tools) {
            add_schema(run, h.entry);
            ids.push_back(h.entry.id());
        }
        spdlog::info("Functions for `{}`: {}", r.subtask, ids.dump());
        if (r.tools.empty())
            missing.push_back(r.subtask);
        found[r.subtask] = std::move(ids);
    }

    // The search request must be answered before the conversation goes on.
    run.messages.push_back(reply);
    for (const auto& call : reply.tool_calls) {
        ToolResult result = call.tool_id == search_tools_name
                                ? ToolResult::success(call.call_id, found.dump())
                                : ToolResult::failure(call.call_id,
                                                      fmt::format("Tool `{}` is not available.", call.tool_id),
                                                      Errc::UnknownTool);
        run.messages.push_back(ChatMessage::tool(call.call_id, result.content()));
        run.trace.tool_calls.push_back({call, std::move(result), call.tool_id, is_generic_tool(call.tool_id)});
    }

    auto prompt = prompts::format(config_.prompts.execution, {{"steps", prompts::numbered(plan.subtasks)}});
    if (!missing.empty())
        prompt += fmt::format("\nNo suitable tools were found for: {}.", fmt::join(missing, "; "));
    run.messages.push_back(ChatMessage::user(std::move(prompt)));
    run.final_response = execute_loop(run, "execute");
}

void Agent::run_auto_tulip(Run& run)
{
    run.schemas = auto_tulip_schemas();
    for (const auto& id : auto_tools_)
        if (auto entry = library_->find(id))
            add_schema(run, *entry);
    if (run.messages.empty())
        run.messages.push_back(ChatMessage::system(config_.prompts.auto_tulip_system));
    run.messages.push_back(ChatMessage::user(run.trace.query));
    try {
        run.final_response = execute_loop(run, "execute");
    } catch (...) {
        auto_tools_.clear();
        for (const auto& name : schema_names(run.schemas))
            if (!is_generic_tool(name))
                auto_tools_.push_back(name);
        throw;
    }
    auto_tools_.clear();
    for (const auto& name : schema_names(run.schemas))
        if (!is_generic_tool(name))
            auto_tools_.push_back(name);
}

} // namespace tulip
