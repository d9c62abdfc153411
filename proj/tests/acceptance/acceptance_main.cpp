// SPDX-License-Identifier: Apache-2.0
//
// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.
#include "support.hpp"

#include "tulip/agents.hpp"
#include "tulip/error.hpp"
#include "tulip/eval.hpp"
#include "tulip/tooldef.hpp"
#include "tulip/vecstore.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

namespace tulip {
namespace {

using Clock = std::chrono::steady_clock;

/// Collects failed expectations for one criterion.
struct Check {
    std::vector<std::string> problems;

    void expect(bool ok, const std::string& what)
    {
        if (!ok)
            problems.push_back(what);
    }
};

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

const std::string golden_query = "What is 45342 * 23487 + 32478?";

AgentConfig fixture_config(Variant v)
{
    AgentConfig c;
    c.variant = v;
    c.recursion_distance_ceiling = test::fixture_ceiling;
    return c;
}

// --- 1 ---------------------------------------------------------------------

struct ExpectedParam {
    std::string name;
    ParamKind kind;
    std::optional<ParamKind> item;
    std::string description;
};

struct ExpectedListing {
    std::string file;
    std::string name;
    std::string summary;
    std::vector<ExpectedParam> params;
    std::string returns;
};

void parser_fidelity(Check& c)
{
    const auto start = Clock::now();
    const std::vector<ExpectedListing> listings{
        {"add.tdf",
         "add",
         "Add two numbers.",
         {{"a", ParamKind::Number, {}, "The first number."}, {"b", ParamKind::Number, {}, "The second number."}},
         "The sum of a and b."},
        {"multiply.tdf",
         "multiply",
         "Multiply two numbers.",
         {{"a", ParamKind::Number, {}, "The first multiplicand."},
          {"b", ParamKind::Number, {}, "The second multiplicand."}},
         "The product of a and b."},
        {"coefficient_of_variation.tdf",
         "coefficient_of_variation",
         "Calculate the coefficient of variation of a list of numbers.",
         {{"numbers", ParamKind::Array, ParamKind::Number, "A list of numbers."}},
         "The coefficient of variation."},
        {"pour_into.tdf",
         "pour_into",
         "You get a source container, pour it into a target container, and put it back on the table.",
         {{"source_container_name", ParamKind::String, {}, "The name of the container to pour from."},
          {"target_container_name", ParamKind::String, {}, "The name of the container to pour into."}},
         "Result message."},
    };
    for (const auto& want : listings) {
        auto parsed = parse_tool_file("listing", test::read_file(test::fixtures() / "listings" / want.file));
        if (parsed.descriptors.size() != 1) {
            c.expect(false, want.file + ": expected one descriptor");
            continue;
        }
        const auto& d = parsed.descriptors[0];
        c.expect(d.name == want.name, want.file + ": name " + d.name);
        c.expect(d.summary == want.summary, want.file + ": summary `" + d.summary + "`");
        c.expect(d.return_description == want.returns, want.file + ": return `" + d.return_description + "`");
        c.expect(d.parameters.size() == want.params.size(), want.file + ": parameter count");
        for (std::size_t i = 0; i < std::min(d.parameters.size(), want.params.size()); ++i) {
            const auto& p = d.parameters[i];
            const auto& w = want.params[i];
            c.expect(p.name == w.name, want.file + ": parameter name " + p.name);
            c.expect(p.kind == w.kind, want.file + ": kind of " + p.name);
            c.expect(p.item_kind == w.item, want.file + ": item kind of " + p.name);
            c.expect(p.description == w.description, want.file + ": description of " + p.name);
        }
    }
    const double t = seconds_since(start);
    c.expect(t < 1.0, fmt::format("took {:.3f}s", t));
}

// --- 2 ---------------------------------------------------------------------

void knn_oracle(Check& c)
{
    const auto start = Clock::now();
    std::mt19937_64 rng(2024);
    std::size_t compared = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t dim = 1 + rng() % 256;
        const std::size_t n = rng() % 1001;
        const bool coarse = trial % 4 == 0; // integer grids produce exact ties
        auto sample = [&] {
            std::vector<double> v(dim);
            for (auto& x : v)
                x = coarse ? static_cast<double>(static_cast<int>(rng() % 3) - 1)
                           : std::uniform_real_distribution<double>(-1, 1)(rng);
            return v;
        };
        VectorStore store(dim);
        std::vector<std::pair<std::string, std::vector<double>>> rows;
        for (std::size_t i = 0; i < n; ++i) {
            std::string id = fmt::format("t{:04}_{}", rng() % 10000, i);
            auto v = sample();
            store.add({id, "", v, {}});
            rows.emplace_back(id, std::move(v));
        }
        for (int q = 0; q < 3; ++q) {
            auto query = sample();
            const std::size_t k = rng() % (n + 5);
            std::optional<double> ceiling;
            if (q == 2)
                ceiling = std::uniform_real_distribution<double>(0, 2.0 * dim)(rng);

            // Independent scan: sum in coordinate order, full sort by (distance, id).
            std::vector<std::pair<double, std::string>> scan;
            for (const auto& [id, v] : rows) {
                double d = 0.0;
                for (std::size_t i = 0; i < dim; ++i) {
                    const double diff = query[i] - v[i];
                    d += diff * diff;
                }
                if (!ceiling || d <= *ceiling)
                    scan.emplace_back(d, id);
            }
            std::sort(scan.begin(), scan.end());
            scan.resize(std::min(scan.size(), k));

            auto got = store.query(query, k, ceiling);
            if (got.size() != scan.size()) {
                c.expect(false, fmt::format("trial {}: {} results, want {}", trial, got.size(), scan.size()));
                continue;
            }
            for (std::size_t i = 0; i < got.size(); ++i) {
                c.expect(got[i].id == scan[i].second, fmt::format("trial {} rank {}: id", trial, i));
                c.expect(got[i].distance == scan[i].first, fmt::format("trial {} rank {}: distance", trial, i));
                ++compared;
            }
        }
    }
    const double t = seconds_since(start);
    c.expect(compared > 0, "nothing compared");
    c.expect(t < 30.0, fmt::format("took {:.3f}s", t));
}

// --- 3 ---------------------------------------------------------------------

void golden_transcript(Check& c)
{
    test::MathLibrary m;
    ScriptedBackend backend(test::transcript("cot_tulip_golden.json"));
    Agent agent(fixture_config(Variant::CotTulip), backend, m.library.get(), m.runtime.get());
    auto out = agent.run_query(golden_query);
    c.expect(!out.trace.failed, "run failed: " + out.trace.failure);
    c.expect(out.final_response.find("1064980032") != std::string::npos, "final response lacks 1064980032");

    std::vector<const ToolCallEvent*> calls;
    for (const auto& e : out.trace.tool_calls)
        if (!e.generic)
            calls.push_back(&e);
    c.expect(calls.size() == 2, fmt::format("{} tool calls", calls.size()));
    if (calls.size() == 2) {
        c.expect(calls[0]->tool_name == "multiply" && calls[0]->call.arguments == Json{{"a", 45342}, {"b", 23487}},
                 "first call is not multiply(45342, 23487)");
        c.expect(calls[0]->result.ok() && *calls[0]->result.value == 1064947554, "multiply result");
        c.expect(calls[1]->tool_name == "add" && calls[1]->call.arguments == Json{{"a", 1064947554}, {"b", 32478}},
                 "second call is not add(1064947554, 32478)");
        c.expect(calls[1]->result.ok() && *calls[1]->result.value == 1064980032, "add result");
    }

    // Hand arithmetic from the transcript's own counts and the price list:
    // 0.5 and 1.5 USD per million chat tokens, 0.13 per million embedding tokens.
    auto raw = Json::parse(test::read_file(test::transcripts() / "cot_tulip_golden.json"));
    double prompt = 0, completion = 0;
    for (const auto& s : raw["steps"]) {
        prompt += s["usage"]["prompt_tokens"].get<double>();
        completion += s["usage"]["completion_tokens"].get<double>();
    }
    double embedding = 0; // whitespace words of the two search strings
    for (const std::string text : {"multiply two numbers", "add two numbers"}) {
        std::istringstream words(text);
        for (std::string w; words >> w;)
            ++embedding;
    }
    const double hand = prompt * 0.5 / 1e6 + completion * 1.5 / 1e6 + embedding * 0.13 / 1e6;
    const double computed = CostTable::load(test::data() / "cost_table.json").cost(out.trace.usage);
    c.expect(std::abs(computed - hand) <= 1e-9, fmt::format("cost {} vs hand {}", computed, hand));
    c.expect(prompt == 1747 && completion == 103, "transcript token totals changed");
}

// --- 4 ---------------------------------------------------------------------

void golden_lifecycle(Check& c)
{
    if (!test::have_python()) {
        c.expect(false, "python3 is required to execute generated tools");
        return;
    }
    test::TempDir dir;
    ToolLibrary lib(LibraryConfig{dir / "store.json", dir / "tools", test::hashing()});
    lib.initialize({});
    c.expect(lib.count() == 0, "library not empty at start");
    Runtime runtime(lib, test::python_interpreter());
    ScriptedBackend backend(test::transcript("auto_tulip_crud.json"));
    Agent agent(fixture_config(Variant::AutoTulip), backend, &lib, &runtime);
    const std::string id = "calculate_square_root_module__calculate_square_root";

    auto last_result = [](const SessionTrace& t) -> std::optional<Json> {
        for (auto it = t.tool_calls.rbegin(); it != t.tool_calls.rend(); ++it)
            if (!it->generic)
                return it->result.value;
        return std::nullopt;
    };

    auto first = agent.run_query("What is the square root of 23456789?");
    c.expect(!first.trace.failed, "create: " + first.trace.failure);
    c.expect(lib.find(id).has_value(), "tool not created");
    auto root = last_result(first.trace);
    const double want = 4843.220932396126;
    c.expect(root && root->is_number() && std::abs(root->get<double>() - want) <= 1e-9 * want,
             "square root of 23456789: " + (root ? root->dump() : "none"));

    auto second = agent.run_query("Change the square root tool so that it handles negative numbers.");
    c.expect(!second.trace.failed, "update: " + second.trace.failure);

    auto third = agent.run_query("What is the square root of -200?");
    c.expect(!third.trace.failed, "use: " + third.trace.failure);
    auto complex = last_result(third.trace);
    c.expect(complex && *complex == "14.142135623730951j", "sqrt(-200): " + (complex ? complex->dump() : "none"));

    auto fourth = agent.run_query("Delete the square root tool.");
    c.expect(!fourth.trace.failed, "delete: " + fourth.trace.failure);
    c.expect(lib.count() == 0, fmt::format("library count {} after delete", lib.count()));
    c.expect(backend.remaining() == 0, "transcript not fully consumed");
}

// --- 5 ---------------------------------------------------------------------

void benchmark_ground_truth(Check& c)
{
    test::MathLibrary m;
    auto value = [&](const std::string& id, Json args) -> Json {
        auto r = m.runtime->execute({"c", id, std::move(args)});
        return r.ok() ? *r.value : Json();
    };
    const auto fib = value("number_theory__fibonacci_recursive", {{"n", 10}});
    const auto fact = value("number_theory__factorial", {{"n", 10}});
    c.expect(fib == 55, "fibonacci_recursive(10) = " + fib.dump());
    c.expect(fact == 3628800, "factorial(10) = " + fact.dump());
    const auto sum = value("math_tools__add", {{"a", fib}, {"b", fact}});
    c.expect(sum == 3628855, "sum = " + sum.dump());

    auto tasks = load_tasks(test::data() / "tasks" / "mini_corpus.json");
    auto it = std::find_if(tasks.begin(), tasks.end(), [](const EvalTask& t) { return t.name == "M.T.M.003"; });
    if (it == tasks.end()) {
        c.expect(false, "M.T.M.003 missing from the task file");
        return;
    }
    c.expect(score_correctness(sum.dump(), it->valid_solutions), "computed value is not a valid solution");
    c.expect(it->valid_solutions.size() == 2 && it->valid_solutions[0] == 3628855 &&
                 it->valid_solutions[1] == "3,628,855",
             "valid solutions changed");

    std::vector<EvalTask> one{*it};
    auto report = run_benchmark(
        fixture_config(Variant::CotTulip), one, *m.library, m.runtime.get(),
        CostTable::load(test::data() / "cost_table.json"),
        [](const EvalTask& t, int) {
            return std::make_unique<ScriptedBackend>(test::transcript("mini_corpus/" + t.name + ".json"));
        },
        {1, 1, {}});
    const auto& r = report.runs.at(0);
    c.expect(!r.failure, "run failed: " + r.failure.value_or(""));
    c.expect(r.correct, "scored incorrect: " + r.final_response);
    c.expect(r.precision == 1.0, fmt::format("precision {}", r.precision));
    c.expect(r.recall == 1.0, fmt::format("recall {}", r.recall));
}

// --- 6 ---------------------------------------------------------------------

void token_reduction(Check& c)
{
    test::MathLibrary m;
    auto run = [&](Variant v, const std::string& transcript) {
        ScriptedBackend backend(test::transcript(transcript));
        Agent agent(fixture_config(v), backend, m.library.get(), m.runtime.get());
        return agent.run_query(golden_query).trace;
    };
    auto naive = run(Variant::NaiveTool, "naive_tool_golden.json");
    auto cot = run(Variant::CotTulip, "cot_tulip_golden.json");
    c.expect(!naive.failed, "naive run failed: " + naive.failure);
    c.expect(!cot.failed, "cot run failed: " + cot.failure);

    std::size_t naive_bytes = 0, cot_bytes = 0, subtasks = 0;
    for (const auto& e : naive.completions) {
        naive_bytes += e.schema_bytes;
        c.expect(e.tool_names.size() == m.library->count(), "naive request without the full library");
    }
    for (const auto& e : cot.completions)
        cot_bytes += e.schema_bytes;
    // Two subtasks in the golden plan; each retrieves at most top_k tools.
    for (const auto& s : cot.searches)
        subtasks += s.depth == 0;
    const std::size_t bound = fixture_config(Variant::CotTulip).top_k * subtasks;
    for (const auto& e : cot.completions)
        if (e.purpose == "execute")
            c.expect(e.tool_names.size() <= bound, fmt::format("{} schemas > {}", e.tool_names.size(), bound));
    c.expect(naive_bytes >= 2 * cot_bytes, fmt::format("naive {} bytes vs cot {} bytes", naive_bytes, cot_bytes));
}

// --- 7 ---------------------------------------------------------------------

void metric_oracles(Check& c)
{
    const std::vector<double> values{1, 2, 3, 4, 100};
    c.expect(interquartile_mean(values) == 3.0, fmt::format("iqm {}", interquartile_mean(values)));

    const std::vector<std::string> expected{"multiply", "add"};
    struct Case {
        std::vector<std::string> called;
        double precision, recall;
    };
    const std::vector<Case> cases{{{"multiply", "add"}, 1.0, 1.0},
                                  {{"multiply", "multiply", "subtract"}, 2.0 / 3.0, 1.0 / 2.0},
                                  {{}, 1.0, 0.0}};
    for (const auto& k : cases) {
        auto pr = tool_precision_recall(k.called, expected);
        c.expect(pr.precision == k.precision && pr.recall == k.recall,
                 fmt::format("P/R for [{}]: {} {}", fmt::join(k.called, ","), pr.precision, pr.recall));
    }

    const double cost = CostTable::load(test::data() / "cost_table.json")
                            .cost(UsageRecord{"gpt-3.5-turbo-0125", 3960, 19, 0});
    c.expect(std::abs(cost - 0.0020085) <= 1e-12, fmt::format("cost {:.12f}", cost));
}

// --- 8 ---------------------------------------------------------------------

Json step(Json response)
{
    return {{"response", std::move(response)}, {"usage", {{"prompt_tokens", 1}, {"completion_tokens", 1}}}};
}

Json plan(const std::vector<std::string>& subtasks)
{
    return step({{"content", Json{{"subtasks", subtasks}}.dump()}});
}

Json search(const std::vector<std::string>& strings)
{
    return step({{"content", ""},
                 {"tool_calls",
                  {{{"id", "s"}, {"name", "search_tools"}, {"arguments", {{"action_descriptions", strings}}}}}}});
}

void recursion_bound(Check& c)
{
    test::MathLibrary m;
    const std::string nothing = "frobnicate";
    for (int depth = 0; depth <= 4; ++depth) {
        // Whole query: plan and search once, one re-decomposition per level,
        // then the final answer.
        std::vector<Json> steps{plan({nothing}), search({nothing})};
        for (int d = 0; d < depth; ++d) {
            steps.push_back(plan({nothing}));
            steps.push_back(search({nothing}));
        }
        steps.push_back(step({{"content", "No tool can do that."}}));
        // Spare steps: an unbounded search would consume them.
        for (int spare = 0; spare < 20; ++spare) {
            steps.push_back(plan({nothing}));
            steps.push_back(search({nothing}));
        }
        ScriptedBackend backend(ScriptedTranscript::from_json({{"steps", steps}}));
        auto cfg = fixture_config(Variant::CotTulip);
        cfg.max_recursion_depth = depth;
        Agent agent(cfg, backend, m.library.get(), m.runtime.get());
        auto out = agent.run_query(nothing);
        c.expect(!out.trace.failed, fmt::format("depth {}: {}", depth, out.trace.failure));
        const auto redecompositions =
            std::count_if(out.trace.completions.begin(), out.trace.completions.end(),
                          [](const CompletionEvent& e) { return e.purpose == "decompose"; }) -
            1;
        c.expect(redecompositions == depth, fmt::format("depth {}: {} re-decompositions", depth, redecompositions));
        c.expect(out.trace.llm_calls() == static_cast<std::size_t>(2 + 2 * depth + 1),
                 fmt::format("depth {}: {} LLM calls", depth, out.trace.llm_calls()));
        c.expect(out.final_response == "No tool can do that.", fmt::format("depth {}: did not terminate", depth));
    }

    // Wider trees still stop at the bound.
    for (std::size_t branching = 2; branching <= 3; ++branching) {
        std::vector<std::string> subs(branching, nothing);
        std::vector<Json> steps;
        for (int i = 0; i < 100; ++i) {
            steps.push_back(plan(subs));
            steps.push_back(search(subs));
        }
        ScriptedBackend backend(ScriptedTranscript::from_json({{"steps", steps}}));
        auto cfg = fixture_config(Variant::CotTulip);
        cfg.max_recursion_depth = 2;
        Agent agent(cfg, backend, m.library.get(), m.runtime.get());
        Session session(backend, {1000, 0.0});
        SessionTrace trace;
        agent.search_tools_recursive(session, trace, {nothing}, 0);
        int deepest = 0;
        for (const auto& s : trace.searches)
            deepest = std::max(deepest, s.depth);
        c.expect(deepest == 2, fmt::format("branching {}: depth {}", branching, deepest));
        c.expect(backend.consumed() == 2 * (1 + branching),
                 fmt::format("branching {}: {} LLM calls", branching, backend.consumed()));
    }
}

// --- 9 ---------------------------------------------------------------------

void persistence(Check& c)
{
    test::TempDir dir;
    test::MathLibrary first(dir / "store.json");
    first.library->persist();
    c.expect(first.library->count() == 100, "corpus size");
    test::MathLibrary second(dir / "store.json");
    c.expect(second.library->embedding_tokens_consumed() == 0,
             fmt::format("re-initialization consumed {} tokens", second.library->embedding_tokens_consumed()));

    std::mt19937 rng(99);
    std::vector<std::string> vocabulary;
    for (const auto& e : first.library->entries())
        for (const auto& t : tokenize(e.document))
            vocabulary.push_back(t);
    for (int q = 0; q < 50; ++q) {
        std::string query;
        for (int w = 0, n = 1 + static_cast<int>(rng() % 6); w < n; ++w)
            query += vocabulary[rng() % vocabulary.size()] + " ";
        auto a = first.library->search(query, 10).hits;
        auto b = second.library->search(query, 10).hits;
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < a.size(); ++i)
            same = a[i].entry.id() == b[i].entry.id() && a[i].distance == b[i].distance;
        c.expect(same, "rankings differ for `" + query + "`");
    }
}

} // namespace
} // namespace tulip

int main()
{
    spdlog::set_level(spdlog::level::off);
    using namespace tulip;
    const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
        {"parser fidelity on the four documented listings", parser_fidelity},
        {"exact kNN against a brute-force scan", knn_oracle},
        {"golden CotTulip transcript", golden_transcript},
        {"golden AutoTulip create/update/delete lifecycle", golden_lifecycle},
        {"benchmark ground truth M.T.M.003", benchmark_ground_truth},
        {"schema payload reduction versus NaiveTool", token_reduction},
        {"metric oracles", metric_oracles},
        {"bounded recursive tool search", recursion_bound},
        {"persistence round trip", persistence},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check check;
        try {
            criteria[i].second(check);
        } catch (const std::exception& e) {
            check.problems.push_back(std::string("exception: ") + e.what());
        }
        const bool pass = check.problems.empty();
        failed += !pass;
        std::cout << (pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first;
        if (!pass) {
            std::cout << ": " << check.problems.front();
            if (check.problems.size() > 1)
                std::cout << " (+" << check.problems.size() - 1 << " more)";
        }
        std::cout << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
