// SPDX-License-Identifier: Apache-2.0
#include "tulip/tooldef.hpp"

#include "text_util.hpp"
#include "tulip/error.hpp"

#include <fmt/format.h>

#include <map>
#include <set>

namespace tulip {

using detail::split_lines;
using detail::starts_with;
using detail::trim;

std::string_view to_string(ParamKind kind) noexcept
{
    switch (kind) {
    case ParamKind::Number: return "number";
    case ParamKind::Integer: return "integer";
    case ParamKind::String: return "string";
    case ParamKind::Boolean: return "boolean";
    case ParamKind::Array: return "array";
    case ParamKind::Object: return "object";
    }
    return "string";
}

std::optional<ParamKind> param_kind_from_string(std::string_view text) noexcept
{
    static constexpr std::pair<std::string_view, ParamKind> table[] = {
        {"number", ParamKind::Number},   {"integer", ParamKind::Integer},
        {"string", ParamKind::String},   {"boolean", ParamKind::Boolean},
        {"array", ParamKind::Array},     {"object", ParamKind::Object},
    };
    for (auto [name, kind] : table)
        if (name == text)
            return kind;
    return std::nullopt;
}

bool is_identifier(std::string_view text) noexcept
{
    if (text.empty())
        return false;
    auto head = static_cast<unsigned char>(text.front());
    if (!(std::isalpha(head) || head == '_'))
        return false;
    for (unsigned char c : text)
        if (!(std::isalnum(c) || c == '_'))
            return false;
    return true;
}

std::string qualified_id(std::string_view module, std::string_view name)
{
    return fmt::format("{}__{}", module, name);
}

namespace {

struct Annotation {
    ParamKind kind;
    std::optional<ParamKind> item_kind;
};

std::optional<ParamKind> scalar_kind(std::string_view type)
{
    if (starts_with(type, "typing."))
        type.remove_prefix(7);
    if (type == "float")
        return ParamKind::Number;
    if (type == "int")
        return ParamKind::Integer;
    if (type == "str")
        return ParamKind::String;
    if (type == "bool")
        return ParamKind::Boolean;
    return std::nullopt;
}

std::optional<Annotation> annotation_kind(std::string_view type)
{
    type = trim(type);
    if (auto scalar = scalar_kind(type))
        return Annotation{*scalar, std::nullopt};

    auto open = type.find('[');
    auto base = trim(type.substr(0, open));
    if (starts_with(base, "typing."))
        base.remove_prefix(7);
    std::string_view inner;
    if (open != std::string_view::npos) {
        if (type.back() != ']')
            return std::nullopt;
        inner = trim(type.substr(open + 1, type.size() - open - 2));
    }

    static const std::set<std::string_view> arrays = {"list", "List", "tuple", "Tuple",
                                                      "set",  "Set",  "Sequence"};
    static const std::set<std::string_view> objects = {"dict", "Dict", "Mapping"};
    if (arrays.count(base)) {
        Annotation a{ParamKind::Array, std::nullopt};
        if (!inner.empty() && inner.find(',') == std::string_view::npos)
            a.item_kind = scalar_kind(inner);
        return a;
    }
    if (objects.count(base))
        return Annotation{ParamKind::Object, std::nullopt};
    return std::nullopt;
}

/// Splits on commas that are not nested in brackets or string literals.
std::vector<std::string_view> split_top_level(std::string_view text, char sep)
{
    std::vector<std::string_view> parts;
    int depth = 0;
    char quote = 0;
    size_t start = 0;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quote) {
            if (c == '\\')
                ++i;
            else if (c == quote)
                quote = 0;
            continue;
        }
        if (c == '"' || c == '\'')
            quote = c;
        else if (c == '(' || c == '[' || c == '{')
            ++depth;
        else if (c == ')' || c == ']' || c == '}')
            --depth;
        else if (c == sep && depth == 0) {
            parts.push_back(text.substr(start, i - start));
            start = i + 1;
        }
    }
    parts.push_back(text.substr(start));
    return parts;
}

size_t find_top_level(std::string_view text, char target)
{
    int depth = 0;
    char quote = 0;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quote) {
            if (c == '\\')
                ++i;
            else if (c == quote)
                quote = 0;
            continue;
        }
        if (c == target && depth == 0)
            return i;
        if (c == '"' || c == '\'')
            quote = c;
        else if (c == '(' || c == '[' || c == '{')
            ++depth;
        else if (c == ')' || c == ']' || c == '}')
            --depth;
    }
    return std::string_view::npos;
}

struct Signature {
    std::string name;
    std::vector<std::pair<std::string, Annotation>> params;
    bool has_inline_body = false;
};

class FileParser {
public:
    FileParser(std::string_view module, std::string_view source)
        : module_(module), lines_(split_lines(source))
    {
    }

    std::vector<ToolDescriptor> run()
    {
        if (!is_identifier(module_))
            fail(Errc::SyntaxError, 0, fmt::format("module name `{}` is not an identifier", module_));

        std::vector<ToolDescriptor> out;
        std::set<std::string> seen;
        size_t i = 0;
        while (i < lines_.size()) {
            auto line = lines_[i];
            if (line.empty() || detail::is_space(line.front()) || trim(line).empty()) {
                ++i;
                continue;
            }
            if (starts_with(line, "def ") || starts_with(line, "def\t")) {
                auto result = parse_function(i);
                if (result) {
                    if (!seen.insert(result->name).second)
                        fail(Errc::SyntaxError, result->first_line,
                             fmt::format("duplicate definition of `{}`", result->name));
                    out.push_back(std::move(*result));
                }
                continue;
            }
            i = skip_top_level_statement(i);
        }
        return out;
    }

private:
    [[noreturn]] void fail(Errc code, int line, const std::string& message) const
    {
        throw ParseError(code, std::string(module_), line, message);
    }

    static size_t count_triple_quotes(std::string_view line, std::string_view delim)
    {
        size_t n = 0;
        for (auto pos = line.find(delim); pos != std::string_view::npos;
             pos = line.find(delim, pos + 3))
            ++n;
        return n;
    }

    /// Skips a non-def top-level line, including a module-level triple-quoted
    /// string spanning several lines.
    size_t skip_top_level_statement(size_t i) const
    {
        for (auto delim : {std::string_view("\"\"\""), std::string_view("'''")}) {
            if (count_triple_quotes(lines_[i], delim) % 2 == 1) {
                for (size_t j = i + 1; j < lines_.size(); ++j)
                    if (lines_[j].find(delim) != std::string_view::npos)
                        return j + 1;
                fail(Errc::SyntaxError, static_cast<int>(i + 1), "unterminated string literal");
            }
        }
        return i + 1;
    }

    Signature parse_signature(size_t index) const
    {
        const int lineno = static_cast<int>(index + 1);
        auto line = lines_[index];
        auto rest = trim(line.substr(3));
        auto open = rest.find('(');
        if (open == std::string_view::npos)
            fail(Errc::SyntaxError, lineno, "malformed signature: missing `(`");

        Signature sig;
        sig.name = std::string(trim(rest.substr(0, open)));
        if (!is_identifier(sig.name))
            fail(Errc::SyntaxError, lineno, fmt::format("malformed function name `{}`", sig.name));

        auto after_open = rest.substr(open + 1);
        auto close = find_top_level(after_open, ')');
        if (close == std::string_view::npos)
            fail(Errc::SyntaxError, lineno, "malformed signature: missing `)` (signatures must fit on one line)");
        auto params_text = after_open.substr(0, close);
        auto tail = trim(after_open.substr(close + 1));

        if (starts_with(tail, "->")) {
            tail = trim(tail.substr(2));
            auto colon = find_top_level(tail, ':');
            if (colon == std::string_view::npos || trim(tail.substr(0, colon)).empty())
                fail(Errc::SyntaxError, lineno, "malformed return annotation");
            tail = tail.substr(colon);
        }
        if (!starts_with(tail, ":"))
            fail(Errc::SyntaxError, lineno, "malformed signature: missing `:`");
        auto inline_body = trim(tail.substr(1));
        sig.has_inline_body = !inline_body.empty() && inline_body.front() != '#';

        for (auto raw : split_top_level(params_text, ',')) {
            auto param = trim(raw);
            if (param.empty() || param == "*" || param == "/")
                continue;
            if (starts_with(param, "*"))
                fail(Errc::SyntaxError, lineno,
                     fmt::format("variadic parameter `{}` is not supported", param));
            auto eq = find_top_level(param, '=');
            auto decl = trim(param.substr(0, eq));
            auto colon = decl.find(':');
            if (colon == std::string_view::npos)
                fail(Errc::DocMismatch, lineno,
                     fmt::format("parameter `{}` of `{}` has no type annotation", decl, sig.name));
            auto pname = std::string(trim(decl.substr(0, colon)));
            auto ptype = trim(decl.substr(colon + 1));
            if (!is_identifier(pname))
                fail(Errc::SyntaxError, lineno, fmt::format("malformed parameter name `{}`", pname));
            auto kind = annotation_kind(ptype);
            if (!kind)
                fail(Errc::DocMismatch, lineno,
                     fmt::format("unsupported type annotation `{}` for parameter `{}`", ptype, pname));
            sig.params.emplace_back(std::move(pname), *kind);
        }
        return sig;
    }

    /// Returns the dedented docstring and advances `index` past its closing
    /// delimiter. `std::nullopt` when the next statement is not a docstring.
    std::optional<std::string> read_docstring(size_t& index) const
    {
        size_t j = index;
        while (j < lines_.size() && trim(lines_[j]).empty())
            ++j;
        if (j >= lines_.size() || !detail::is_space(lines_[j].front()))
            return std::nullopt;

        auto first = trim(lines_[j]);
        for (auto prefix : {"r\"\"\"", "\"\"\"", "r'''", "'''"}) {
            std::string_view p(prefix);
            if (!starts_with(first, p))
                continue;
            auto delim = p.substr(p.size() - 3);
            auto opening = first.substr(p.size());
            std::vector<std::string> raw;
            auto close = opening.find(delim);
            if (close != std::string_view::npos) {
                raw.emplace_back(opening.substr(0, close));
                index = j + 1;
                return clean_docstring(raw);
            }
            raw.emplace_back(opening);
            for (size_t k = j + 1; k < lines_.size(); ++k) {
                auto l = lines_[k];
                auto c = l.find(delim);
                if (c != std::string_view::npos) {
                    raw.emplace_back(l.substr(0, c));
                    index = k + 1;
                    return clean_docstring(raw);
                }
                raw.emplace_back(l);
            }
            fail(Errc::SyntaxError, static_cast<int>(j + 1), "unterminated docstring");
        }
        return std::nullopt;
    }

    /// Same normalization as Python's inspect.cleandoc.
    static std::string clean_docstring(const std::vector<std::string>& raw)
    {
        size_t margin = std::string::npos;
        for (size_t i = 1; i < raw.size(); ++i) {
            std::string_view l = raw[i];
            if (trim(l).empty())
                continue;
            size_t indent = 0;
            while (indent < l.size() && detail::is_space(l[indent]))
                ++indent;
            margin = std::min(margin, indent);
        }
        std::vector<std::string> lines;
        lines.emplace_back(trim(raw.front()));
        for (size_t i = 1; i < raw.size(); ++i) {
            std::string_view l = raw[i];
            if (margin != std::string::npos && l.size() >= margin)
                l.remove_prefix(margin);
            else
                l = detail::trim_left(l);
            while (!l.empty() && detail::is_space(l.back()))
                l.remove_suffix(1);
            lines.emplace_back(l);
        }
        while (!lines.empty() && lines.front().empty())
            lines.erase(lines.begin());
        while (!lines.empty() && lines.back().empty())
            lines.pop_back();
        std::string out;
        for (size_t i = 0; i < lines.size(); ++i) {
            if (i)
                out += '\n';
            out += lines[i];
        }
        return out;
    }

    /// Advances past an indented body; returns index of the last body line.
    size_t skip_body(size_t& index) const
    {
        size_t last = index == 0 ? 0 : index - 1;
        while (index < lines_.size()) {
            auto l = lines_[index];
            if (!trim(l).empty() && !detail::is_space(l.front()))
                break;
            if (!trim(l).empty())
                last = index;
            ++index;
        }
        return last;
    }

    std::optional<ToolDescriptor> parse_function(size_t& index) const
    {
        const size_t def_index = index;
        const int lineno = static_cast<int>(def_index + 1);
        auto sig = parse_signature(def_index);
        index = def_index + 1;

        const bool is_public = sig.name.front() != '_';
        if (sig.has_inline_body) {
            if (is_public)
                fail(Errc::MissingDoc, lineno, fmt::format("function `{}` has no docstring", sig.name));
            return std::nullopt;
        }

        size_t cursor = index;
        auto doc = read_docstring(cursor);
        if (!is_public) {
            if (doc)
                index = cursor;
            skip_body(index);
            return std::nullopt;
        }
        if (!doc || trim(*doc).empty())
            fail(Errc::MissingDoc, lineno, fmt::format("function `{}` has no docstring", sig.name));
        index = cursor;
        size_t last = skip_body(index);

        ToolDescriptor d;
        d.module = std::string(module_);
        d.name = sig.name;
        d.qualified_id = qualified_id(d.module, d.name);
        d.raw_docstring = *doc;
        d.first_line = lineno;
        d.last_line = static_cast<int>(std::max(last, cursor - 1) + 1);
        apply_docstring(d, sig, lineno);
        return d;
    }

    void apply_docstring(ToolDescriptor& d, const Signature& sig, int lineno) const
    {
        struct Field {
            std::string key;
            std::string arg;
            std::string text;
        };
        std::vector<std::string> summary_lines;
        std::vector<Field> fields;
        bool in_summary = true;
        bool summary_done = false;

        auto append = [](std::string& dst, std::string_view piece) {
            piece = trim(piece);
            if (piece.empty())
                return;
            if (!dst.empty())
                dst += ' ';
            dst += piece;
        };

        for (auto line : split_lines(d.raw_docstring)) {
            auto t = trim(line);
            if (starts_with(t, ":")) {
                auto close = t.find(':', 1);
                if (close == std::string_view::npos) {
                    if (!fields.empty())
                        append(fields.back().text, t);
                    continue;
                }
                auto head = trim(t.substr(1, close - 1));
                auto space = head.find_first_of(" \t");
                Field f;
                f.key = std::string(head.substr(0, space));
                if (space != std::string_view::npos) {
                    auto arg = trim(head.substr(space));
                    // `:param float x:` carries the name last
                    auto last_space = arg.find_last_of(" \t");
                    f.arg = std::string(last_space == std::string_view::npos ? arg
                                                                             : arg.substr(last_space + 1));
                }
                append(f.text, t.substr(close + 1));
                fields.push_back(std::move(f));
                in_summary = false;
                summary_done = true;
                continue;
            }
            if (in_summary && !summary_done) {
                if (t.empty()) {
                    if (!summary_lines.empty())
                        summary_done = true;
                    continue;
                }
                summary_lines.emplace_back(t);
                continue;
            }
            if (!fields.empty())
                append(fields.back().text, t);
        }

        for (auto& l : summary_lines)
            append(d.summary, l);
        if (d.summary.empty())
            fail(Errc::MissingDoc, lineno, fmt::format("docstring of `{}` has no summary", d.name));

        std::map<std::string, std::string> documented;
        for (auto& f : fields) {
            if (f.key == "param" || f.key == "parameter" || f.key == "arg" || f.key == "argument") {
                if (f.arg.empty())
                    fail(Errc::DocMismatch, lineno, fmt::format("`:{}:` without a parameter name", f.key));
                if (!documented.emplace(f.arg, f.text).second)
                    fail(Errc::DocMismatch, lineno,
                         fmt::format("parameter `{}` of `{}` is documented twice", f.arg, d.name));
            } else if (f.key == "return" || f.key == "returns") {
                d.return_description = f.text;
            }
        }

        for (auto& [pname, annotation] : sig.params) {
            auto it = documented.find(pname);
            if (it == documented.end())
                fail(Errc::DocMismatch, lineno,
                     fmt::format("parameter `{}` of `{}` has no `:param:` entry", pname, d.name));
            if (it->second.empty())
                fail(Errc::DocMismatch, lineno,
                     fmt::format("parameter `{}` of `{}` has an empty description", pname, d.name));
            d.parameters.push_back({pname, annotation.kind, it->second, annotation.item_kind});
            documented.erase(it);
        }
        if (!documented.empty())
            fail(Errc::DocMismatch, lineno,
                 fmt::format("`:param {}:` does not match any parameter of `{}`",
                             documented.begin()->first, d.name));
    }

    std::string_view module_;
    std::vector<std::string_view> lines_;
};

} // namespace

ToolDefinitionFile parse_tool_file(std::string_view module_name, std::string_view source_text)
{
    ToolDefinitionFile file;
    file.module = std::string(module_name);
    file.source_text = std::string(source_text);
    file.descriptors = FileParser(module_name, source_text).run();
    return file;
}

Json descriptor_schema(const ToolDescriptor& d)
{
    Json properties = Json::object();
    Json required = Json::array();
    for (const auto& p : d.parameters) {
        Json prop = {{"type", to_string(p.kind)}, {"description", p.description}};
        if (p.kind == ParamKind::Array)
            prop["items"] = p.item_kind ? Json{{"type", to_string(*p.item_kind)}} : Json::object();
        properties[p.name] = std::move(prop);
        required.push_back(p.name);
    }
    return {
        {"type", "function"},
        {"function",
         {
             {"name", d.qualified_id},
             {"description", d.summary},
             {"parameters", {{"type", "object"}, {"properties", properties}, {"required", required}}},
         }},
    };
}

std::string embedding_document(const ToolDescriptor& d)
{
    return d.name + ":\n" + d.raw_docstring;
}

std::string render_docstring(const ToolDescriptor& d)
{
    std::string out = d.summary;
    if (!d.parameters.empty() || !d.return_description.empty())
        out += "\n";
    for (const auto& p : d.parameters)
        out += fmt::format("\n:param {}: {}", p.name, p.description);
    if (!d.return_description.empty())
        out += fmt::format("\n:return: {}", d.return_description);
    return out;
}

std::string_view definition_text(std::string_view source_text, const ToolDescriptor& d)
{
    size_t begin = 0;
    int line = 1;
    while (line < d.first_line && begin < source_text.size()) {
        auto nl = source_text.find('\n', begin);
        if (nl == std::string_view::npos)
            return {};
        begin = nl + 1;
        ++line;
    }
    size_t end = begin;
    while (line <= d.last_line && end < source_text.size()) {
        auto nl = source_text.find('\n', end);
        end = nl == std::string_view::npos ? source_text.size() : nl + 1;
        ++line;
    }
    return source_text.substr(begin, end - begin);
}

} // namespace tulip
