// SPDX-License-Identifier: Apache-2.0
//
// Tool definition files: one-line Python-style signatures followed by a
// Sphinx-style docstring. The parser extracts identity, documentation and the
// typed parameter list of every public top-level function; bodies are skipped.
#pragma once

#include "tulip/json.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tulip {

enum class ParamKind { Number, Integer, String, Boolean, Array, Object };

std::string_view to_string(ParamKind kind) noexcept;
std::optional<ParamKind> param_kind_from_string(std::string_view text) noexcept;

struct ToolParameter {
    std::string name;
    ParamKind kind = ParamKind::String;
    std::string description;
    /// Element kind for `list[T]` annotations, when T is a scalar.
    std::optional<ParamKind> item_kind;

    bool operator==(const ToolParameter&) const = default;
};

struct ToolDescriptor {
    std::string module;
    std::string name;
    std::string qualified_id;
    std::string summary;
    std::vector<ToolParameter> parameters;
    std::string return_description;
    std::string raw_docstring;
    /// 1-based inclusive line range of the definition in its file.
    int first_line = 0;
    int last_line = 0;

    bool operator==(const ToolDescriptor&) const = default;
};

struct ToolDefinitionFile {
    std::string module;
    std::string source_text;
    std::vector<ToolDescriptor> descriptors;
};

bool is_identifier(std::string_view text) noexcept;

/// `{module}__{name}`
std::string qualified_id(std::string_view module, std::string_view name);

/// Throws ParseError with Errc::SyntaxError, DocMismatch or MissingDoc.
ToolDefinitionFile parse_tool_file(std::string_view module_name, std::string_view source_text);

/// OpenAI-style `{"type": "function", "function": {...}}` schema.
Json descriptor_schema(const ToolDescriptor& descriptor);

/// Canonical text that gets embedded for retrieval: `{name}:\n{raw_docstring}`.
std::string embedding_document(const ToolDescriptor& descriptor);

/// Summary plus `:param:` / `:return:` fields, in the layout the parser reads.
std::string render_docstring(const ToolDescriptor& descriptor);

/// Source lines [first_line, last_line] of one definition.
std::string_view definition_text(std::string_view source_text, const ToolDescriptor& descriptor);

} // namespace tulip
