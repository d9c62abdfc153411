// SPDX-License-Identifier: Apache-2.0
#include "tulip/runtime.hpp"

#include "subprocess.hpp"
#include "text_util.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <regex>
#include <sstream>

#include <unistd.h>

namespace tulip {

namespace fs = std::filesystem;

InterpreterConfig InterpreterConfig::from_env()
{
    return from_env(InterpreterConfig{});
}

InterpreterConfig InterpreterConfig::from_env(InterpreterConfig base)
{
    if (const char* env = std::getenv("TULIP_INTERPRETER"); env && *env) {
        std::istringstream words(env);
        base.command.clear();
        for (std::string w; words >> w;)
            base.command.push_back(w);
        base.enabled = !base.command.empty();
    }
    return base;
}

Runtime::Runtime(const ToolLibrary& library, InterpreterConfig interpreter)
    : library_(library), interpreter_(std::move(interpreter))
{
    if (interpreter_.timeout.count() <= 0)
        throw Error(Errc::ConfigError, "interpreter timeout must be positive");
    if (interpreter_.enabled && interpreter_.command.empty())
        throw Error(Errc::ConfigError, "interpreter enabled without a command");
}

void Runtime::register_native(const ToolDescriptor& d, NativeTool tool)
{
    if (!tool.fn)
        throw Error(Errc::SignatureMismatch, fmt::format("native `{}` has no callable", d.qualified_id));
    if (tool.kinds.size() != d.parameters.size())
        throw Error(Errc::SignatureMismatch,
                    fmt::format("native `{}` takes {} arguments, descriptor declares {}", d.qualified_id,
                                tool.kinds.size(), d.parameters.size()));
    for (size_t i = 0; i < tool.kinds.size(); ++i)
        if (tool.kinds[i] != d.parameters[i].kind)
            throw Error(Errc::SignatureMismatch,
                        fmt::format("native `{}` parameter `{}` is {}, descriptor declares {}", d.qualified_id,
                                    d.parameters[i].name, to_string(tool.kinds[i]),
                                    to_string(d.parameters[i].kind)));
    std::unique_lock lock(mutex_);
    if (!natives_.emplace(d.qualified_id, std::move(tool)).second)
        throw Error(Errc::DuplicateRegistration, fmt::format("`{}` is already registered", d.qualified_id));
}

bool Runtime::has_native(const std::string& id) const
{
    std::shared_lock lock(mutex_);
    return natives_.count(id) != 0;
}

namespace {

bool matches_kind(ParamKind kind, const Json& value)
{
    switch (kind) {
    case ParamKind::Number: return value.is_number();
    case ParamKind::Integer:
        if (value.is_number_integer())
            return true;
        if (value.is_number_float()) {
            double v = value.get<double>();
            return std::isfinite(v) && std::floor(v) == v && std::fabs(v) < 9.007199254740992e15;
        }
        return false;
    case ParamKind::String: return value.is_string();
    case ParamKind::Boolean: return value.is_boolean();
    case ParamKind::Array: return value.is_array();
    case ParamKind::Object: return value.is_object();
    }
    return false;
}

Json coerce(ParamKind kind, const Json& value)
{
    if (kind == ParamKind::Integer && value.is_number_float())
        return static_cast<std::int64_t>(value.get<double>());
    return value;
}

} // namespace

Json validate_arguments(const ToolDescriptor& d, const Json& arguments)
{
    if (!arguments.is_object())
        throw Error(Errc::ArgumentError, fmt::format("arguments to `{}` must be an object", d.name));
    for (const auto& [key, value] : arguments.items()) {
        bool known = std::any_of(d.parameters.begin(), d.parameters.end(),
                                 [&](const auto& p) { return p.name == key; });
        if (!known)
            throw Error(Errc::ArgumentError, fmt::format("unexpected argument `{}` for `{}`", key, d.name));
    }
    Json out = Json::object();
    for (const auto& p : d.parameters) {
        if (!arguments.contains(p.name))
            throw Error(Errc::ArgumentError, fmt::format("missing argument `{}` for `{}`", p.name, d.name));
        const auto& value = arguments.at(p.name);
        if (!matches_kind(p.kind, value))
            throw Error(Errc::ArgumentError, fmt::format("argument `{}` of `{}` must be {}, got {}", p.name,
                                                         d.name, to_string(p.kind), value.dump()));
        Json v = coerce(p.kind, value);
        if (p.kind == ParamKind::Array && p.item_kind) {
            for (auto& item : v) {
                if (!matches_kind(*p.item_kind, item))
                    throw Error(Errc::ArgumentError,
                                fmt::format("argument `{}` of `{}` must contain only {} values, got {}", p.name,
                                            d.name, to_string(*p.item_kind), item.dump()));
                item = coerce(*p.item_kind, item);
            }
        }
        out[p.name] = std::move(v);
    }
    return out;
}

ToolResult Runtime::execute(const ToolCall& call) const
{
    auto entry = library_.find(call.tool_id);
    if (!entry)
        return ToolResult::failure(call.call_id, fmt::format("Unknown tool `{}`.", call.tool_id), Errc::UnknownTool);

    Json arguments;
    try {
        arguments = validate_arguments(entry->descriptor, call.arguments);
    } catch (const Error& e) {
        return ToolResult::failure(call.call_id, e.what(), e.code());
    }

    if (entry->binding == Binding::File)
        return run_file(call, *entry, arguments);

    NativeTool native;
    {
        std::shared_lock lock(mutex_);
        auto it = natives_.find(call.tool_id);
        if (it == natives_.end())
            return ToolResult::failure(call.call_id,
                                       fmt::format("Tool `{}` has no native implementation.", call.tool_id),
                                       Errc::NotExecutable);
        native = it->second;
    }
    const auto& params = entry->descriptor.parameters;
    if (native.kinds.size() != params.size())
        return ToolResult::failure(call.call_id,
                                   fmt::format("Native `{}` no longer matches its descriptor.", call.tool_id),
                                   Errc::SignatureMismatch);
    for (size_t i = 0; i < params.size(); ++i)
        if (native.kinds[i] != params[i].kind)
            return ToolResult::failure(call.call_id,
                                       fmt::format("Native `{}` no longer matches its descriptor.", call.tool_id),
                                       Errc::SignatureMismatch);
    try {
        return ToolResult::success(call.call_id, native.fn(arguments));
    } catch (const std::exception& e) {
        return ToolResult::failure(call.call_id, e.what());
    }
}

ToolResult Runtime::run_file(const ToolCall& call, const ToolEntry& entry, const Json& arguments) const
{
    if (!interpreter_.enabled)
        return ToolResult::failure(call.call_id,
                                   fmt::format("Tool `{}` is file-bound and no interpreter is configured.", call.tool_id),
                                   Errc::NotExecutable);
    if (!entry.source_path || !fs::exists(*entry.source_path))
        return ToolResult::failure(call.call_id, fmt::format("Source of `{}` is missing.", call.tool_id),
                                   Errc::NotExecutable);

    auto argv = interpreter_.command;
    argv.push_back(entry.source_path->string());
    argv.push_back(entry.descriptor.name);
    const auto input = Json{{"arguments", arguments}}.dump() + "\n";

    detail::ProcessResult proc;
    try {
        proc = detail::run_process(argv, input, interpreter_.timeout);
    } catch (const Error& e) {
        return ToolResult::failure(call.call_id, e.what(), e.code());
    }
    if (proc.timed_out)
        return ToolResult::failure(call.call_id,
                                   fmt::format("Tool `{}` timed out after {} ms.", call.tool_id,
                                               interpreter_.timeout.count()),
                                   Errc::Timeout);

    auto line = proc.out.substr(0, proc.out.find('\n'));
    Json reply;
    try {
        reply = Json::parse(line);
    } catch (const Json::parse_error&) {
        auto detail = std::string(detail::trim(proc.err.empty() ? proc.out : proc.err));
        return ToolResult::failure(call.call_id,
                                   fmt::format("Tool `{}` produced no valid reply (exit {}): {}", call.tool_id,
                                               proc.exit_code, detail.substr(0, 400)));
    }
    if (reply.is_object() && reply.contains("error"))
        return ToolResult::failure(call.call_id, reply["error"].is_string() ? reply["error"].get<std::string>()
                                                                           : reply["error"].dump());
    if (proc.exit_code != 0)
        return ToolResult::failure(call.call_id,
                                   fmt::format("Tool `{}` exited with status {}.", call.tool_id, proc.exit_code));
    if (!reply.is_object() || !reply.contains("result"))
        return ToolResult::failure(call.call_id, fmt::format("Malformed reply from `{}`: {}", call.tool_id, line));
    return ToolResult::success(call.call_id, reply["result"]);
}

std::vector<Diagnostic> Runtime::validate_source(std::string_view source_text) const
{
    std::vector<Diagnostic> out;
    try {
        parse_tool_file("candidate", source_text);
    } catch (const ParseError& e) {
        out.push_back({e.code(), e.line(), e.detail()});
        return out;
    }
    if (!interpreter_.enabled)
        return out;

    auto tmp = fs::temp_directory_path() / fmt::format("tulip-check-{}-XXXXXX", ::getpid());
    std::string pattern = tmp.string();
    int fd = ::mkstemp(pattern.data());
    if (fd < 0) {
        out.push_back({Errc::IoError, 0, "cannot create temporary file for validation"});
        return out;
    }
    ::close(fd);
    {
        std::ofstream f(pattern, std::ios::binary | std::ios::trunc);
        f << source_text;
    }
    auto argv = interpreter_.command;
    argv.push_back("--check");
    argv.push_back(pattern);
    try {
        auto proc = detail::run_process(argv, "", interpreter_.timeout);
        if (proc.timed_out) {
            out.push_back({Errc::Timeout, 0, "validation timed out"});
        } else if (proc.exit_code != 0) {
            std::string message(detail::trim(proc.out.empty() ? proc.err : proc.out));
            int line = 0;
            std::smatch m;
            static const std::regex line_re(R"(line (\d+))");
            if (std::regex_search(message, m, line_re))
                line = std::stoi(m[1]);
            out.push_back({Errc::SyntaxError, line, message});
        }
    } catch (const Error& e) {
        out.push_back({e.code(), 0, e.what()});
    }
    std::error_code ec;
    fs::remove(pattern, ec);
    return out;
}

} // namespace tulip
