// SPDX-License-Identifier: Apache-2.0
#include "tulip/eval.hpp"

#include "text_util.hpp"
#include "tulip/error.hpp"
#include "tulip/prompts.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

namespace tulip {

namespace {

constexpr double relative_tolerance = 1e-6;

bool numbers_match(double got, double want)
{
    return std::abs(got - want) <= relative_tolerance * std::max(std::abs(got), std::abs(want));
}

std::vector<double> numeric_tokens(std::string_view text)
{
    static const std::regex number(R"(-?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?(?:[eE][-+]?\d+)?)");
    std::vector<double> out;
    std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), number); it != std::sregex_iterator(); ++it) {
        auto token = it->str();
        token.erase(std::remove(token.begin(), token.end(), ','), token.end());
        try {
            out.push_back(std::stod(token));
        } catch (const std::out_of_range&) {
        }
    }
    return out;
}

[[noreturn]] void bad_task(std::size_t index, const std::string& name, const std::string& why)
{
    throw Error(Errc::ConfigError,
                fmt::format("task {}{}: {}", index, name.empty() ? "" : fmt::format(" ({})", name), why));
}

double mean(std::span<const double> values)
{
    if (values.empty())
        return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

Json run_to_json(const EvalRunResult& r)
{
    Json j = {{"task", r.task},
              {"category", to_string(r.category)},
              {"run", r.run},
              {"correct", r.correct},
              {"precision", r.precision},
              {"recall", r.recall},
              {"cost_usd", r.cost_usd},
              {"interaction_count", r.interaction_count},
              {"usage", to_json(r.usage)},
              {"final_response", r.final_response}};
    j["failure"] = r.failure ? Json(*r.failure) : Json(nullptr);
    return j;
}

EvalRunResult run_from_json(const Json& j)
{
    EvalRunResult r;
    r.task = j.at("task").get<std::string>();
    auto category = category_from_string(j.at("category").get<std::string>());
    if (!category)
        throw Error(Errc::ConfigError, "report run has an unknown category");
    r.category = *category;
    r.run = j.at("run").get<int>();
    r.correct = j.at("correct").get<bool>();
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    r.cost_usd = j.at("cost_usd").get<double>();
    r.interaction_count = j.at("interaction_count").get<int>();
    const auto& u = j.at("usage");
    r.usage.model = u.value("model", "");
    r.usage.prompt_tokens = u.value("prompt_tokens", std::uint64_t{0});
    r.usage.completion_tokens = u.value("completion_tokens", std::uint64_t{0});
    r.usage.embedding_tokens = u.value("embedding_tokens", std::uint64_t{0});
    r.final_response = j.value("final_response", "");
    if (j.contains("failure") && j.at("failure").is_string())
        r.failure = j.at("failure").get<std::string>();
    return r;
}

Json aggregate_to_json(const CategoryAggregate& a)
{
    return {{"category", to_string(a.category)}, {"tasks", a.tasks},         {"runs", a.runs},
            {"correctness", a.correctness},      {"precision", a.precision}, {"recall", a.recall},
            {"iqm_cost_usd", a.iqm_cost}};
}

Json config_to_json(const AgentConfig& c)
{
    return {{"agent", to_string(c.variant)},
            {"top_k", c.top_k},
            {"recursion_distance_ceiling", c.recursion_distance_ceiling},
            {"max_recursion_depth", c.max_recursion_depth},
            {"max_interactions", c.max_interactions},
            {"temperature", c.temperature},
            {"priming_pool_size", c.priming_pool_size}};
}

std::string file_safe(std::string_view name)
{
    std::string out;
    for (char c : name)
        out += std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_' ? c : '_';
    return out;
}

} // namespace

std::string_view to_string(Category category) noexcept
{
    switch (category) {
    case Category::Easy: return "easy";
    case Category::Medium: return "medium";
    case Category::Hard: return "hard";
    }
    return "easy";
}

std::optional<Category> category_from_string(std::string_view text) noexcept
{
    auto lower = detail::to_lower(text);
    if (lower == "easy")
        return Category::Easy;
    if (lower == "medium")
        return Category::Medium;
    if (lower == "hard")
        return Category::Hard;
    return std::nullopt;
}

Category infer_category(std::size_t n)
{
    if (n == 0)
        throw Error(Errc::ConfigError, "a task needs at least one expected function");
    if (n == 1)
        return Category::Easy;
    return n <= 3 ? Category::Medium : Category::Hard;
}

std::vector<EvalTask> tasks_from_json(const Json& j)
{
    if (!j.is_array())
        throw Error(Errc::ConfigError, "task file must hold a JSON array");
    std::vector<EvalTask> tasks;
    std::set<std::string> names;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& t = j[i];
        if (!t.is_object())
            bad_task(i, "", "not an object");
        EvalTask task;
        if (!t.contains("name") || !t.at("name").is_string() || t.at("name").get<std::string>().empty())
            bad_task(i, "", "missing `name`");
        task.name = t.at("name").get<std::string>();
        if (!names.insert(task.name).second)
            bad_task(i, task.name, "duplicate name");
        if (!t.contains("task") || !t.at("task").is_string() || detail::trim(t.at("task").get<std::string>()).empty())
            bad_task(i, task.name, "missing `task`");
        task.task = t.at("task").get<std::string>();
        if (!t.contains("functions") || !t.at("functions").is_array() || t.at("functions").empty())
            bad_task(i, task.name, "`functions` must be a non-empty list");
        for (const auto& f : t.at("functions")) {
            if (!f.is_string())
                bad_task(i, task.name, "`functions` entries must be strings");
            task.functions.push_back(f.get<std::string>());
        }
        if (!t.contains("valid_solutions") || !t.at("valid_solutions").is_array() || t.at("valid_solutions").empty())
            bad_task(i, task.name, "`valid_solutions` must be a non-empty list");
        for (const auto& s : t.at("valid_solutions"))
            if (!s.is_number() && !s.is_string())
                bad_task(i, task.name, "`valid_solutions` entries must be numbers or strings");
        task.valid_solutions = t.at("valid_solutions");
        auto inferred = infer_category(task.functions.size());
        if (t.contains("category")) {
            auto given = t.at("category").is_string() ? category_from_string(t.at("category").get<std::string>())
                                                      : std::nullopt;
            if (!given)
                bad_task(i, task.name, "`category` must be easy, medium or hard");
            if (*given != inferred)
                bad_task(i, task.name,
                         fmt::format("category {} does not fit {} expected functions", to_string(*given),
                                     task.functions.size()));
        }
        task.category = inferred;
        tasks.push_back(std::move(task));
    }
    return tasks;
}

std::vector<EvalTask> load_tasks(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::ConfigError, fmt::format("cannot read task file {}", path.string()));
    try {
        return tasks_from_json(Json::parse(in));
    } catch (const Json::exception& e) {
        throw Error(Errc::ConfigError, fmt::format("{}: {}", path.string(), e.what()));
    }
}

bool score_correctness(std::string_view final_response, const Json& valid_solutions)
{
    std::optional<std::vector<double>> numbers;
    for (const auto& solution : valid_solutions) {
        if (solution.is_string()) {
            if (final_response.find(solution.get<std::string>()) != std::string_view::npos)
                return true;
        } else if (solution.is_number()) {
            if (!numbers)
                numbers = numeric_tokens(final_response);
            const auto want = solution.get<double>();
            if (std::any_of(numbers->begin(), numbers->end(), [&](double got) { return numbers_match(got, want); }))
                return true;
        }
    }
    return false;
}

std::vector<std::string> called_tool_names(const SessionTrace& trace)
{
    std::vector<std::string> names;
    for (const auto& e : trace.tool_calls)
        if (!e.generic)
            names.push_back(e.tool_name);
    return names;
}

PrecisionRecall tool_precision_recall(std::span<const std::string> called, std::span<const std::string> expected)
{
    std::set<std::string> want;
    for (const auto& e : expected)
        if (!is_generic_tool(e))
            want.insert(unqualified_name(e));
    std::vector<std::string> calls;
    for (const auto& c : called)
        if (!is_generic_tool(c))
            calls.push_back(unqualified_name(c));

    PrecisionRecall pr;
    if (!calls.empty()) {
        auto hits = std::count_if(calls.begin(), calls.end(), [&](const std::string& c) { return want.count(c); });
        pr.precision = static_cast<double>(hits) / static_cast<double>(calls.size());
    }
    if (!want.empty()) {
        auto found = std::count_if(want.begin(), want.end(), [&](const std::string& w) {
            return std::find(calls.begin(), calls.end(), w) != calls.end();
        });
        pr.recall = static_cast<double>(found) / static_cast<double>(want.size());
    }
    return pr;
}

PrecisionRecall tool_precision_recall(const SessionTrace& trace, std::span<const std::string> expected)
{
    auto called = called_tool_names(trace);
    return tool_precision_recall(std::span<const std::string>(called), expected);
}

double interquartile_mean(std::span<const double> values)
{
    if (values.empty())
        throw Error(Errc::EmptyInput, "interquartile mean of an empty list");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const auto cut = sorted.size() / 4;
    return mean(std::span<const double>(sorted).subspan(cut, sorted.size() - 2 * cut));
}

std::vector<CategoryAggregate> aggregate(std::span<const EvalRunResult> runs)
{
    std::vector<CategoryAggregate> out;
    for (auto category : {Category::Easy, Category::Medium, Category::Hard}) {
        std::vector<double> correct, precision, recall;
        std::map<std::string, std::vector<double>> costs;
        for (const auto& r : runs) {
            if (r.category != category)
                continue;
            correct.push_back(r.correct ? 1.0 : 0.0);
            precision.push_back(r.precision);
            recall.push_back(r.recall);
            costs[r.task].push_back(r.cost_usd);
        }
        if (correct.empty())
            continue;
        std::vector<double> per_task;
        for (const auto& [_, c] : costs)
            per_task.push_back(interquartile_mean(c));
        out.push_back({category, costs.size(), correct.size(), mean(correct), mean(precision), mean(recall),
                       mean(per_task)});
    }
    return out;
}

Json Report::to_json() const
{
    Json j;
    j["agent"] = agent;
    j["config"] = config;
    j["metric_notes"] = {
        {"precision", "calls to expected tools / all non-generic tool calls; 1.0 when no tool was called"},
        {"recall", "expected tools called at least once / expected tools"},
        {"cost", "USD per run, including the embedding of the whole tool library for retrieval agents"},
        {"iqm_cost_usd", "mean over tasks of the interquartile mean of each task's run costs"}};
    Json runs_json = Json::array();
    for (const auto& r : runs)
        runs_json.push_back(run_to_json(r));
    j["runs"] = std::move(runs_json);
    Json aggregates_json = Json::array();
    for (const auto& a : aggregates)
        aggregates_json.push_back(aggregate_to_json(a));
    j["aggregates"] = std::move(aggregates_json);
    return j;
}

Report Report::from_json(const Json& j)
{
    Report r;
    r.agent = j.value("agent", "");
    r.config = j.value("config", Json::object());
    for (const auto& run : j.at("runs"))
        r.runs.push_back(run_from_json(run));
    r.aggregates = aggregate(r.runs);
    return r;
}

std::string Report::table() const
{
    std::string out = fmt::format("{}\n{:<8} {:>5} {:>5} {:>8} {:>9} {:>7} {:>12}\n", agent, "category", "tasks",
                                  "runs", "correct", "precision", "recall", "cost_usd");
    for (const auto& a : aggregates)
        out += fmt::format("{:<8} {:>5} {:>5} {:>8.3f} {:>9.3f} {:>7.3f} {:>12.6f}\n", to_string(a.category), a.tasks,
                           a.runs, a.correctness, a.precision, a.recall, a.iqm_cost);
    return out;
}

std::string comparison_csv(std::span<const Report> reports)
{
    std::string out = "agent";
    for (auto c : {Category::Easy, Category::Medium, Category::Hard})
        out += fmt::format(",{0}_correct,{0}_precision,{0}_recall,{0}_cost_usd", to_string(c));
    out += "\n";
    for (const auto& report : reports) {
        out += report.agent;
        for (auto c : {Category::Easy, Category::Medium, Category::Hard}) {
            auto it = std::find_if(report.aggregates.begin(), report.aggregates.end(),
                                   [&](const CategoryAggregate& a) { return a.category == c; });
            if (it == report.aggregates.end())
                out += ",,,,";
            else
                out += fmt::format(",{},{},{},{}", it->correctness, it->precision, it->recall, it->iqm_cost);
        }
        out += "\n";
    }
    return out;
}

void check_corpus_integrity(const ToolLibrary& library, std::span<const EvalTask> tasks)
{
    std::set<std::string> names;
    for (const auto& e : library.entries())
        names.insert(e.descriptor.name);
    std::vector<std::string> missing;
    for (const auto& t : tasks)
        for (const auto& f : t.functions)
            if (!names.count(unqualified_name(f)))
                missing.push_back(fmt::format("{} ({})", f, t.name));
    if (!missing.empty())
        throw Error(Errc::ConfigError,
                    fmt::format("expected functions missing from the library: {}", fmt::join(missing, ", ")));
}

Report run_benchmark(const AgentConfig& config, std::span<const EvalTask> tasks, ToolLibrary& library,
                     const Runtime* runtime, const CostTable& costs, const BackendFactory& backends,
                     const BenchmarkOptions& options)
{
    if (options.runs <= 0)
        throw Error(Errc::ConfigError, "runs must be positive");
    validate(config);
    check_corpus_integrity(library, tasks);
    if (options.trace_dir)
        std::filesystem::create_directories(*options.trace_dir);

    std::optional<UsageRecord> init_charge;
    if (uses_library_search(config.variant)) {
        auto init = library.initialization_usage();
        init_charge = UsageRecord{init.model, 0, 0, init.token_count};
    }

    struct Item {
        const EvalTask* task;
        int run;
    };
    std::vector<Item> items;
    for (const auto& t : tasks)
        for (int r = 0; r < options.runs; ++r)
            items.push_back({&t, r});
    std::vector<EvalRunResult> results(items.size());

    auto execute = [&](const Item& item) {
        const auto& task = *item.task;
        EvalRunResult r;
        r.task = task.name;
        r.category = task.category;
        r.run = item.run;
        try {
            auto backend = backends(task, item.run);
            Agent agent(config, *backend, &library, runtime);
            auto outcome = agent.run_query(task.task);
            const auto& trace = outcome.trace;
            r.final_response = outcome.final_response;
            r.interaction_count = static_cast<int>(trace.llm_calls());
            auto ledger = trace.usage;
            if (init_charge)
                ledger.push_back(*init_charge);
            for (const auto& u : ledger)
                r.usage += u;
            r.cost_usd = costs.cost(ledger);
            auto pr = tool_precision_recall(trace, task.functions);
            r.precision = pr.precision;
            r.recall = pr.recall;
            if (trace.failed)
                r.failure = trace.failure;
            else
                r.correct = score_correctness(r.final_response, task.valid_solutions);
            if (options.trace_dir) {
                std::ofstream out(*options.trace_dir / fmt::format("{}.run{}.json", file_safe(task.name), item.run));
                out << trace.to_json().dump(2) << "\n";
            }
        } catch (const Error& e) {
            r.failure = fmt::format("{}: {}", errc_name(e.code()), e.what());
        } catch (const std::exception& e) {
            r.failure = e.what();
        }
        spdlog::info("{} run {}: correct={} precision={:.3f} recall={:.3f} cost=${:.6f}{}", r.task, r.run, r.correct,
                     r.precision, r.recall, r.cost_usd, r.failure ? " failure=" + *r.failure : "");
        return r;
    };

    const int jobs = config.variant == Variant::AutoTulip ? 1 : std::max(1, options.jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < items.size(); ++i)
            results[i] = execute(items[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (int w = 0; w < jobs; ++w)
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < items.size(); i = next++)
                    results[i] = execute(items[i]);
            });
        for (auto& w : workers)
            w.join();
    }

    Report report;
    report.agent = std::string(to_string(config.variant));
    report.config = config_to_json(config);
    report.config["runs"] = options.runs;
    report.config["embedding_model"] = library.embedding().model();
    report.config["library_size"] = library.count();
    report.runs = std::move(results);
    report.aggregates = aggregate(report.runs);
    return report;
}

const std::vector<std::string>& default_subfields()
{
    static const std::vector<std::string> subfields{"algebra",       "analysis", "calculus",   "number theory",
                                                    "geometry",      "topology", "logic",      "set theory",
                                                    "probability theory", "statistics"};
    return subfields;
}

std::vector<GeneratedSource> generate_benchmark_tools(ChatBackend& llm, const GeneratorOptions& options,
                                                      const Runtime* validator)
{
    const auto& subfields = options.subfields.empty() ? default_subfields() : options.subfields;
    std::vector<GeneratedSource> out;
    std::set<std::string> all_names;

    for (const auto& subfield : subfields) {
        std::vector<std::string> known;
        for (int iteration = 0; iteration < options.iterations; ++iteration) {
            std::string prompt = detail::replace_all(
                detail::replace_all(std::string(prompts::genfuncs), "NUMBER_FUNCTIONS",
                                    std::to_string(options.per_iteration)),
                "SUBFIELD", subfield);
            if (!known.empty())
                prompt += "\n" + detail::replace_all(std::string(prompts::genfuncs_known), "KNOWN_FUNCTIONS",
                                                     fmt::format("{}", fmt::join(known, ", ")));
            ChatRequest request{{ChatMessage::system(std::string(prompts::codegen_system)), ChatMessage::user(prompt)},
                                Json::array(),
                                options.temperature};
            auto response = llm.chat(request);
            const auto module = fmt::format("{}_{}", snake_case(subfield), iteration);
            auto code = detail::strip_code_fence(response.message.content);

            ToolDefinitionFile parsed;
            try {
                parsed = parse_tool_file(module, code);
            } catch (const ParseError& e) {
                spdlog::warn("Discarding {}: line {}: {}", module, e.line(), e.detail());
                continue;
            }

            // Keep the preamble (imports) and every definition with a new name.
            auto lines = detail::split_lines(code);
            std::string text;
            const int first = parsed.descriptors.empty() ? 1 : parsed.descriptors.front().first_line;
            for (int i = 0; i + 1 < first && i < static_cast<int>(lines.size()); ++i)
                text += std::string(lines[i]) + "\n";
            GeneratedSource source{subfield, iteration, module, {}, {}};
            for (const auto& d : parsed.descriptors) {
                known.push_back(d.name);
                if (all_names.count(d.name) || std::count(source.functions.begin(), source.functions.end(), d.name)) {
                    spdlog::info("Discarding duplicate function {} from {}", d.name, module);
                    continue;
                }
                if (!source.functions.empty())
                    text += "\n\n";
                text += std::string(definition_text(code, d)) + "\n";
                source.functions.push_back(d.name);
            }
            if (source.functions.empty()) {
                spdlog::info("Discarding {}: no new functions", module);
                continue;
            }
            try {
                parse_tool_file(module, text);
            } catch (const ParseError& e) {
                spdlog::warn("Discarding {}: line {}: {}", module, e.line(), e.detail());
                continue;
            }
            if (validator) {
                auto diagnostics = validator->validate_source(text);
                if (!diagnostics.empty()) {
                    spdlog::warn("Discarding {}: {}", module, diagnostics.front().message);
                    continue;
                }
            }
            all_names.insert(source.functions.begin(), source.functions.end());
            source.text = std::move(text);
            out.push_back(std::move(source));
        }
    }
    return out;
}

} // namespace tulip
