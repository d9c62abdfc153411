// SPDX-License-Identifier: Apache-2.0
//
// Agent variants. All of them drive one LLM session per query; the Tulip
// variants retrieve tool schemas from the library instead of sending the whole
// library with every request.
#pragma once

#include "tulip/llm.hpp"
#include "tulip/prompts.hpp"
#include "tulip/runtime.hpp"
#include "tulip/toollib.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tulip {

enum class Variant {
    Base,
    NaiveTool,
    CotTool,
    MinimalTulip,
    NaiveTulip,
    CotTulip,
    InformedCotTulip,
    PrimedCotTulip,
    OneShotCotTulip,
    AutoTulip,
};

std::string_view to_string(Variant variant) noexcept;
/// Accepts the enum spelling ("CotTulip") and the agent class name ("CotTulipAgent").
std::optional<Variant> variant_from_string(std::string_view text) noexcept;
const std::vector<Variant>& all_variants();
/// Variants that search the library.
bool uses_library_search(Variant variant) noexcept;

struct PromptSet {
    std::string base_system{prompts::base_system};
    std::string naive_tool_system{prompts::naive_tool_system};
    std::string cot_tulip_system{prompts::cot_tulip_system};
    std::string decomposition{prompts::decomposition};
    std::string decomposition_reminder{prompts::decomposition_reminder};
    std::string tool_search{prompts::tool_search};
    std::string execution{prompts::execution};
    std::string one_shot_example{prompts::one_shot_example};
    std::string auto_tulip_system{prompts::auto_tulip_system};
    std::string codegen_system{prompts::codegen_system};
    std::string codegen_create{prompts::codegen_create};
    std::string codegen_update{prompts::codegen_update};
    std::string codegen_fix{prompts::codegen_fix};
};

struct AgentConfig {
    Variant variant = Variant::CotTulip;
    std::size_t top_k = 5;
    /// Squared-L2 ceiling on unit vectors; 1.2 is roughly cosine similarity 0.4.
    double recursion_distance_ceiling = 1.2;
    int max_recursion_depth = 2;
    int max_interactions = 100;
    double temperature = 1e-9;
    std::size_t priming_pool_size = 30;
    int codegen_attempts = 3;
    /// InformedCotTulip; generated from the library when empty.
    std::string library_description;
    PromptSet prompts;
};

/// Throws Error(ConfigError) on out-of-range values.
void validate(const AgentConfig& config);

struct Plan {
    std::vector<std::string> subtasks;
};

struct SearchResult {
    std::string subtask;
    /// Ascending distance, at most top_k.
    std::vector<SearchHit> tools;
};

struct SearchEvent {
    int depth = 0;
    std::string query;
    std::vector<std::pair<std::string, double>> hits;
};

struct CompletionEvent {
    std::string purpose;
    std::vector<std::string> tool_names;
    std::size_t schema_bytes = 0;
    UsageRecord usage;
};

struct ToolCallEvent {
    ToolCall call;
    ToolResult result;
    /// Function name without the module prefix.
    std::string tool_name;
    bool generic = false;
};

struct SessionTrace {
    Variant variant = Variant::CotTulip;
    std::string query;
    std::vector<ChatMessage> messages;
    std::vector<CompletionEvent> completions;
    std::vector<ToolCallEvent> tool_calls;
    std::vector<SearchEvent> searches;
    std::vector<UsageRecord> usage;
    std::string final_response;
    bool failed = false;
    std::string failure;

    std::size_t llm_calls() const noexcept { return completions.size(); }
    UsageRecord total_usage() const;
    Json to_json() const;
};

struct QueryOutcome {
    std::string final_response;
    SessionTrace trace;
};

/// Names of the generic tools (search, decomposition, CRUD); they are not
/// scored as tool use.
bool is_generic_tool(std::string_view name) noexcept;
std::string unqualified_name(std::string_view tool_id);

class Agent {
public:
    /// `library` may be null only for Base. AutoTulip writes to it.
    Agent(AgentConfig config, ChatBackend& backend, ToolLibrary* library, const Runtime* runtime);

    /// Never throws for agent-level failures: the trace is marked failed and
    /// returned with everything gathered so far. Conversation history carries
    /// over between calls; see reset().
    QueryOutcome run_query(std::string_view query);

    void reset();

    const AgentConfig& config() const noexcept { return config_; }
    const SessionTrace& last_trace() const noexcept { return last_trace_; }

    // Pipeline stages, exposed for direct testing. `session` must outlive the call.
    /// Appends the decomposition prompt for `query` (plus `context`) and the
    /// model's answers to `messages`. Retries once with a format reminder.
    /// Throws Error(DecompositionFormatError).
    Plan decompose(Session& session, SessionTrace& trace, std::vector<ChatMessage>& messages,
                   std::string_view query, const Json& tools = Json::array(), std::string_view context = {});
    std::vector<SearchResult> search_tools_recursive(Session& session, SessionTrace& trace,
                                                     const std::vector<std::string>& descriptions, int depth);

private:
    struct Run;

    std::string execute_loop(Run& run, const std::string& purpose);
    ToolResult dispatch(Run& run, const ToolCall& call);
    std::vector<SearchHit> search_library(Session& session, SessionTrace& trace, const std::string& query,
                                          std::size_t top_k, std::optional<double> ceiling, int depth);
    std::string library_summary() const;
    void add_schema(Run& run, const ToolEntry& entry);
    void remove_schema(Run& run, const std::string& id);
    std::string generate_code(Run& run, std::string_view user_prompt, const std::string* keep_name);
    Plan plan_for(Session& session, SessionTrace& trace, std::string_view query, std::string_view context);
    std::vector<std::string> request_search_strings(Session& session, SessionTrace& trace,
                                                    std::vector<ChatMessage>& messages, const Plan& plan,
                                                    ChatMessage& reply);

    std::string tool_search_tools(Run& run, const Json& arguments, bool with_ceiling);
    std::string tool_decompose_task(Run& run, const Json& arguments);
    std::string tool_create_tool(Run& run, const Json& arguments);
    std::string tool_update_tool(Run& run, const Json& arguments);
    std::string tool_delete_tool(Run& run, const Json& arguments);

    void run_base(Run& run);
    void run_naive_tool(Run& run, bool cot);
    void run_minimal_tulip(Run& run);
    void run_naive_tulip(Run& run);
    void run_cot_tulip(Run& run);
    void run_auto_tulip(Run& run);

    AgentConfig config_;
    ChatBackend& backend_;
    ToolLibrary* library_;
    const Runtime* runtime_;
    std::vector<ChatMessage> history_;
    /// AutoTulip keeps tools it found or made available across queries.
    std::vector<std::string> auto_tools_;
    SessionTrace last_trace_;
};

} // namespace tulip
