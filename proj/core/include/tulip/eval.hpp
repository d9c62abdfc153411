// SPDX-License-Identifier: Apache-2.0
//
// Benchmark harness: task files, per-run metrics, category aggregates with
// interquartile-mean costs, and the LLM-driven benchmark tool generator.
#pragma once

#include "tulip/agents.hpp"
#include "tulip/llm.hpp"
#include "tulip/runtime.hpp"
#include "tulip/toollib.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tulip {

enum class Category { Easy, Medium, Hard };

std::string_view to_string(Category category) noexcept;
std::optional<Category> category_from_string(std::string_view text) noexcept;
/// 1 tool is easy, 2 to 3 medium, 4 or more hard. Throws Error(ConfigError) for 0.
Category infer_category(std::size_t function_count);

struct EvalTask {
    std::string name;
    std::string task;
    std::vector<std::string> functions;
    /// Numbers and strings.
    Json valid_solutions = Json::array();
    Category category = Category::Easy;
};

/// JSON array of `{name, task, functions, valid_solutions, category?}`.
/// Throws Error(ConfigError) naming the offending task.
std::vector<EvalTask> tasks_from_json(const Json& j);
std::vector<EvalTask> load_tasks(const std::filesystem::path& path);

bool score_correctness(std::string_view final_response, const Json& valid_solutions);

struct PrecisionRecall {
    double precision = 1.0;
    double recall = 0.0;
};

/// Unqualified names of the non-generic tools called, in call order.
std::vector<std::string> called_tool_names(const SessionTrace& trace);
/// Precision is 1.0 when nothing was called. Repeats count in the denominator.
PrecisionRecall tool_precision_recall(std::span<const std::string> called, std::span<const std::string> expected);
PrecisionRecall tool_precision_recall(const SessionTrace& trace, std::span<const std::string> expected);

/// Drops floor(n/4) values from each end of the sorted input. Throws Error(EmptyInput).
double interquartile_mean(std::span<const double> values);

struct EvalRunResult {
    std::string task;
    Category category = Category::Easy;
    int run = 0;
    bool correct = false;
    double precision = 1.0;
    double recall = 0.0;
    double cost_usd = 0.0;
    int interaction_count = 0;
    UsageRecord usage;
    std::string final_response;
    std::optional<std::string> failure;
};

struct CategoryAggregate {
    Category category = Category::Easy;
    std::size_t tasks = 0;
    std::size_t runs = 0;
    double correctness = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    /// Mean over tasks of each task's IQM run cost.
    double iqm_cost = 0.0;
};

std::vector<CategoryAggregate> aggregate(std::span<const EvalRunResult> runs);

struct Report {
    std::string agent;
    Json config = Json::object();
    std::vector<EvalRunResult> runs;
    std::vector<CategoryAggregate> aggregates;

    Json to_json() const;
    static Report from_json(const Json& j);
    /// Human-readable per-category table.
    std::string table() const;
};

/// Agents as rows, categories as column groups of correctness, precision,
/// recall and cost.
std::string comparison_csv(std::span<const Report> reports);

using BackendFactory = std::function<std::unique_ptr<ChatBackend>(const EvalTask& task, int run)>;

struct BenchmarkOptions {
    int runs = 5;
    /// Ignored for AutoTulip, which edits the library and runs serially.
    int jobs = 1;
    /// When set, each run's trace goes to `{dir}/{task}.run{n}.json`.
    std::optional<std::filesystem::path> trace_dir;
};

/// Every expected function name must name a library tool. Throws
/// Error(ConfigError) listing the missing names.
void check_corpus_integrity(const ToolLibrary& library, std::span<const EvalTask> tasks);

/// Runs every task `runs` times with a fresh agent and backend. Run failures
/// are recorded, never thrown.
Report run_benchmark(const AgentConfig& config, std::span<const EvalTask> tasks, ToolLibrary& library,
                     const Runtime* runtime, const CostTable& costs, const BackendFactory& backends,
                     const BenchmarkOptions& options = {});

struct GeneratedSource {
    std::string subfield;
    int iteration = 0;
    std::string module;
    std::string text;
    std::vector<std::string> functions;
};

struct GeneratorOptions {
    std::vector<std::string> subfields;
    int iterations = 25;
    int per_iteration = 5;
    double temperature = 1e-9;
};

const std::vector<std::string>& default_subfields();

/// Sources that fail to parse are logged and dropped; functions whose name was
/// already produced are removed from later sources.
std::vector<GeneratedSource> generate_benchmark_tools(ChatBackend& llm, const GeneratorOptions& options,
                                                      const Runtime* validator = nullptr);

} // namespace tulip
