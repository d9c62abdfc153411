// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include "tulip/agents.hpp"
#include "tulip/corpus.hpp"
#include "tulip/error.hpp"
#include "tulip/eval.hpp"
#include "tulip/llm.hpp"
#include "tulip/runtime.hpp"
#include "tulip/toollib.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#ifndef TULIP_RUNNER_PATH
#define TULIP_RUNNER_PATH ""
#endif

namespace fs = std::filesystem;

namespace tulip::cli {

namespace {

struct Settings {
    std::string tools;
    std::string db = "tulip_store.json";
    std::string embedding = "hash";
    std::size_t dim = HashingEmbedding::default_dimension;
    std::string embedding_model = "text-embedding-3-large";
    std::string chat_model = "gpt-3.5-turbo-0125";
    std::string base_url;
    std::string transcript;
    std::string cost_table;
    std::string interpreter;
    int tool_timeout_ms = 10'000;
    bool natives = true;
    std::string agent = "CotTulip";
    std::size_t top_k = 5;
    double recursion_distance_ceiling = 1.2;
    int max_recursion_depth = 2;
    int max_interactions = 100;
    double temperature = 1e-9;
    std::size_t priming_pool_size = 30;
    int codegen_attempts = 3;
    std::string library_description;
    std::string trace_out = "tulip_trace.json";
    bool verbose = false;
};

/// Everything a command needs at run time; built lazily from Settings.
struct Context {
    std::shared_ptr<EmbeddingBackend> embedding;
    std::unique_ptr<ToolLibrary> library;
    std::unique_ptr<Runtime> runtime;
};

constexpr const char* default_base_url = "https://api.openai.com/v1";

std::string env_or(const char* name, std::string fallback)
{
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : std::move(fallback);
}

fs::path tools_dir(const Settings& s)
{
    return s.tools.empty() ? corpus::math_dir() : fs::path(s.tools);
}

std::shared_ptr<EmbeddingBackend> make_embedding(const Settings& s)
{
    if (s.embedding == "hash")
        return std::make_shared<HashingEmbedding>(s.dim, s.embedding_model);
    return std::make_shared<HttpEmbedding>(HttpEmbeddingConfig{
        env_or("TULIP_BASE_URL", s.base_url.empty() ? default_base_url : s.base_url), env_or("TULIP_API_KEY", ""),
        s.embedding_model, s.dim, 60});
}

std::vector<ModuleSource> read_sources(const Settings& s)
{
    const auto dir = tools_dir(s);
    if (!fs::is_directory(dir))
        throw Error(Errc::ConfigError, fmt::format("tool directory {} does not exist", dir.string()));
    auto sources = read_tool_dir(dir);
    if (s.natives) {
        std::set<std::string> native_modules;
        for (const auto& n : corpus::math_natives())
            native_modules.insert(n.module);
        for (auto& src : sources)
            if (native_modules.count(src.module))
                src.binding = Binding::Native;
    }
    return sources;
}

InterpreterConfig interpreter_config(const Settings& s)
{
    InterpreterConfig config;
    config.timeout = std::chrono::milliseconds(s.tool_timeout_ms);
    std::istringstream words(s.interpreter);
    for (std::string w; words >> w;)
        config.command.push_back(w);
    if (config.command.empty() && *TULIP_RUNNER_PATH && fs::exists(TULIP_RUNNER_PATH))
        config.command = {"python3", TULIP_RUNNER_PATH};
    config.enabled = !config.command.empty();
    return InterpreterConfig::from_env(std::move(config));
}

Context open_library(const Settings& s, bool persist)
{
    Context ctx;
    ctx.embedding = make_embedding(s);
    ctx.library = std::make_unique<ToolLibrary>(LibraryConfig{s.db, tools_dir(s), ctx.embedding});
    auto sources = read_sources(s);
    ctx.library->initialize(sources);
    if (persist)
        ctx.library->persist();
    ctx.runtime = std::make_unique<Runtime>(*ctx.library, interpreter_config(s));
    if (s.natives)
        corpus::register_math_natives(*ctx.runtime, *ctx.library);
    return ctx;
}

AgentConfig agent_config(const Settings& s)
{
    auto variant = variant_from_string(s.agent);
    if (!variant)
        throw Error(Errc::ConfigError, fmt::format("unknown agent `{}`", s.agent));
    AgentConfig c;
    c.variant = *variant;
    c.top_k = s.top_k;
    c.recursion_distance_ceiling = s.recursion_distance_ceiling;
    c.max_recursion_depth = s.max_recursion_depth;
    c.max_interactions = s.max_interactions;
    c.temperature = s.temperature;
    c.priming_pool_size = s.priming_pool_size;
    c.codegen_attempts = s.codegen_attempts;
    c.library_description = s.library_description;
    validate(c);
    return c;
}

std::unique_ptr<ChatBackend> make_chat(const Settings& s, const fs::path& transcript)
{
    if (!transcript.empty())
        return std::make_unique<ScriptedBackend>(ScriptedTranscript::load(transcript));
    auto key = env_or("TULIP_API_KEY", "");
    if (key.empty())
        throw Error(Errc::ConfigError, "no --transcript given and TULIP_API_KEY is not set");
    return std::make_unique<HttpChatBackend>(
        HttpChatConfig{env_or("TULIP_BASE_URL", s.base_url.empty() ? default_base_url : s.base_url), key,
                       s.chat_model, 120});
}

CostTable load_costs(const Settings& s)
{
    fs::path path = s.cost_table.empty() ? corpus::data_dir() / "cost_table.json" : fs::path(s.cost_table);
    return CostTable::load(path);
}

std::string cost_summary(const SessionTrace& trace, const CostTable& costs)
{
    auto total = trace.total_usage();
    std::string usd;
    try {
        usd = fmt::format("${:.6f}", costs.cost(trace.usage));
    } catch (const Error&) {
        usd = "unpriced";
    }
    return fmt::format("[{} LLM calls, {} prompt + {} completion + {} embedding tokens, {}]", trace.llm_calls(),
                       total.prompt_tokens, total.completion_tokens, total.embedding_tokens, usd);
}

void write_json(const fs::path& path, const Json& j)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw Error(Errc::IoError, fmt::format("cannot write {}", path.string()));
    out << j.dump(2) << "\n";
}

int cmd_init(const Settings& s, std::ostream& out)
{
    auto ctx = open_library(s, true);
    out << ctx.library->count() << " tools indexed\n";
    out << "embedding tokens: " << ctx.library->embedding_tokens_consumed() << " consumed, "
        << ctx.library->initialization_usage().token_count << " for the full library\n";
    return ok;
}

int cmd_search(const Settings& s, const std::string& query, std::ostream& out)
{
    auto ctx = open_library(s, false);
    if (ctx.library->count() == 0)
        return ok;
    auto outcome = ctx.library->search(query, s.top_k);
    int rank = 1;
    for (const auto& h : outcome.hits)
        out << fmt::format("{}. {}  {:.6f}\n", rank++, h.entry.id(), h.distance);
    return ok;
}

int report_outcome(const Settings& s, const QueryOutcome& outcome, const CostTable& costs, std::ostream& out,
                   std::ostream& err)
{
    if (outcome.trace.failed) {
        write_json(s.trace_out, outcome.trace.to_json());
        err << "agent failure: " << outcome.trace.failure << "\n"
            << "partial trace written to " << s.trace_out << "\n";
        return agent_failure;
    }
    out << outcome.final_response << "\n" << cost_summary(outcome.trace, costs) << "\n";
    return ok;
}

int cmd_query(const Settings& s, const std::string& prompt, std::ostream& out, std::ostream& err)
{
    auto config = agent_config(s);
    auto costs = load_costs(s);
    auto ctx = open_library(s, true);
    auto backend = make_chat(s, s.transcript);
    Agent agent(config, *backend, ctx.library.get(), ctx.runtime.get());
    return report_outcome(s, agent.run_query(prompt), costs, out, err);
}

int cmd_chat(const Settings& s, std::istream& in, std::ostream& out, std::ostream& err)
{
    auto config = agent_config(s);
    auto costs = load_costs(s);
    auto ctx = open_library(s, true);
    auto backend = make_chat(s, s.transcript);
    Agent agent(config, *backend, ctx.library.get(), ctx.runtime.get());
    int status = ok;
    out << "> " << std::flush;
    for (std::string line; std::getline(in, line); out << "> " << std::flush) {
        if (line == "/quit")
            break;
        if (line == "/trace") {
            write_json(s.trace_out, agent.last_trace().to_json());
            out << "trace written to " << s.trace_out << "\n";
            continue;
        }
        if (line == "/reset") {
            agent.reset();
            continue;
        }
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        status = report_outcome(s, agent.run_query(line), costs, out, err);
        if (status != ok)
            return status;
    }
    out << "\n";
    return status;
}

struct EvalArgs {
    std::string tasks;
    std::string report = "tulip_report.json";
    std::string csv;
    std::string traces;
    int runs = 5;
    int jobs = 1;
};

int cmd_eval(const Settings& s, const EvalArgs& a, std::ostream& out)
{
    auto config = agent_config(s);
    auto costs = load_costs(s);
    auto tasks = load_tasks(a.tasks.empty() ? corpus::data_dir() / "tasks" / "mini_corpus.json" : fs::path(a.tasks));
    auto ctx = open_library(s, true);

    BackendFactory factory;
    if (!s.transcript.empty()) {
        // One transcript per task: `{dir}/{task name}.json`.
        fs::path dir = s.transcript;
        if (!fs::is_directory(dir))
            throw Error(Errc::ConfigError, "eval --transcript expects a directory of `<task>.json` files");
        factory = [dir](const EvalTask& task, int) -> std::unique_ptr<ChatBackend> {
            return std::make_unique<ScriptedBackend>(ScriptedTranscript::load(dir / (task.name + ".json")));
        };
    } else {
        make_chat(s, {});
        factory = [&s](const EvalTask&, int) { return make_chat(s, {}); };
    }

    BenchmarkOptions options;
    options.runs = a.runs;
    options.jobs = a.jobs;
    if (!a.traces.empty())
        options.trace_dir = fs::path(a.traces);
    auto report = run_benchmark(config, tasks, *ctx.library, ctx.runtime.get(), costs, factory, options);
    write_json(a.report, report.to_json());
    if (!a.csv.empty()) {
        std::ofstream csv(a.csv);
        csv << comparison_csv(std::span<const Report>(&report, 1));
    }
    out << report.table() << "report written to " << a.report << "\n";
    return ok;
}

struct GenArgs {
    std::vector<std::string> subfields;
    int iterations = 25;
    int per_iteration = 5;
    std::string out_dir = "generated_tools";
};

int cmd_genfuncs(const Settings& s, const GenArgs& a, std::ostream& out)
{
    if (!s.transcript.empty() || env_or("TULIP_API_KEY", "").empty())
        throw Error(Errc::ConfigError, "codegen requires a live backend");
    auto backend = make_chat(s, {});
    auto embedding = make_embedding(s);
    ToolLibrary scratch(LibraryConfig{{}, {}, embedding});
    Runtime validator(scratch, interpreter_config(s));
    GeneratorOptions options{a.subfields, a.iterations, a.per_iteration, s.temperature};
    auto sources = generate_benchmark_tools(*backend, options, &validator);
    fs::create_directories(a.out_dir);
    std::size_t functions = 0;
    for (const auto& src : sources) {
        std::ofstream file(fs::path(a.out_dir) / (src.module + ".tdf"));
        file << src.text;
        functions += src.functions.size();
    }
    out << functions << " functions in " << sources.size() << " files written to " << a.out_dir << "\n";
    return ok;
}

void configure_logging(bool verbose, std::ostream& err)
{
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    sink->set_pattern("%^%l%$: %v");
    auto logger = std::make_shared<spdlog::logger>("tulip", sink);
    logger->set_level(verbose ? spdlog::level::info : spdlog::level::warn);
    spdlog::set_default_logger(logger);
}

} // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Semantic tool retrieval and tool-using agents."};
    app.name("tulip");
    app.require_subcommand(1);
    app.fallthrough();
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "tulip.toml", "Flat TOML file; every key mirrors a long option");

    Settings s;
    app.add_option("--tools", s.tools, "Directory of tool definition files");
    app.add_option("--db", s.db, "Vector store file");
    app.add_option("--embedding", s.embedding, "Embedding backend")->check(CLI::IsMember({"hash", "http"}));
    app.add_option("--dim", s.dim, "Embedding dimension")->check(CLI::PositiveNumber);
    app.add_option("--embedding-model,--embedding_model", s.embedding_model, "Embedding model name");
    app.add_option("--chat-model,--chat_model", s.chat_model, "Chat model name");
    app.add_option("--base-url,--base_url", s.base_url, "OpenAI-compatible endpoint");
    app.add_option("--transcript", s.transcript, "Replay a recorded transcript instead of calling a model");
    app.add_option("--cost-table,--cost_table", s.cost_table, "Price table JSON");
    app.add_option("--interpreter", s.interpreter, "Command that runs file-bound tools");
    app.add_option("--tool-timeout-ms,--tool_timeout_ms", s.tool_timeout_ms, "Per-call subprocess timeout");
    app.add_flag("--natives,!--no-natives", s.natives, "Use built-in implementations of the math corpus");
    app.add_option("--agent", s.agent, "Agent variant");
    app.add_option("--top-k,--top_k", s.top_k, "Tools returned per search")->check(CLI::PositiveNumber);
    app.add_option("--recursion-distance-ceiling,--recursion_distance_ceiling", s.recursion_distance_ceiling,
                   "Squared-L2 distance above which a search counts as empty");
    app.add_option("--max-recursion-depth,--max_recursion_depth", s.max_recursion_depth, "Search recursion bound");
    app.add_option("--max-interactions,--max_interactions", s.max_interactions, "LLM calls per query");
    app.add_option("--temperature", s.temperature, "Sampling temperature");
    app.add_option("--priming-pool-size,--priming_pool_size", s.priming_pool_size, "Tool names for priming");
    app.add_option("--codegen-attempts,--codegen_attempts", s.codegen_attempts, "Tries per generated tool");
    app.add_option("--library-description,--library_description", s.library_description,
                   "Library summary for the informed agent");
    app.add_option("--trace-out,--trace_out", s.trace_out, "Where traces are written");
    app.add_flag("-v,--verbose", s.verbose, "Log agent progress to stderr");

    auto* init = app.add_subcommand("init", "Parse and embed the tool library");

    std::string query;
    auto* search = app.add_subcommand("search", "Rank library tools for a query");
    search->add_option("query", query, "Search text")->required();

    std::string prompt;
    auto* query_cmd = app.add_subcommand("query", "Answer one prompt");
    query_cmd->add_option("prompt", prompt, "User request")->required();

    auto* chat = app.add_subcommand("chat", "Interactive session; /trace, /reset, /quit");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Run the benchmark");
    eval->add_option("--tasks", eval_args.tasks, "Task file");
    eval->add_option("--runs", eval_args.runs, "Runs per task")->check(CLI::PositiveNumber);
    eval->add_option("--jobs", eval_args.jobs, "Parallel runs")->check(CLI::PositiveNumber);
    eval->add_option("--report", eval_args.report, "Report JSON");
    eval->add_option("--csv", eval_args.csv, "Comparison table CSV");
    eval->add_option("--traces", eval_args.traces, "Directory for per-run traces");

    GenArgs gen_args;
    auto* genfuncs = app.add_subcommand("genfuncs", "Generate benchmark tools with a live model");
    genfuncs->add_option("--subfields", gen_args.subfields, "Subfields of mathematics");
    genfuncs->add_option("--iterations", gen_args.iterations, "Prompts per subfield")->check(CLI::PositiveNumber);
    genfuncs->add_option("--per-iteration", gen_args.per_iteration, "Functions per prompt")
        ->check(CLI::PositiveNumber);
    genfuncs->add_option("--out", gen_args.out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, r;
        int code = app.exit(e, o, r);
        out << o.str();
        err << r.str();
        return code == 0 ? ok : input_error;
    }

    configure_logging(s.verbose, err);
    try {
        if (init->parsed())
            return cmd_init(s, out);
        if (search->parsed())
            return cmd_search(s, query, out);
        if (query_cmd->parsed())
            return cmd_query(s, prompt, out, err);
        if (chat->parsed())
            return cmd_chat(s, in, out, err);
        if (eval->parsed())
            return cmd_eval(s, eval_args, out);
        if (genfuncs->parsed())
            return cmd_genfuncs(s, gen_args, out);
    } catch (const ParseError& e) {
        err << "error: " << e.module() << ".tdf:" << e.line() << ": " << e.detail() << "\n";
        return input_error;
    } catch (const Error& e) {
        err << "error: " << errc_name(e.code()) << ": " << e.what() << "\n";
        return e.code() == Errc::InteractionLimitExceeded ? agent_failure : input_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    }
    return input_error;
}

} // namespace tulip::cli
