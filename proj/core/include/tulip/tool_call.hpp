// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tulip/error.hpp"
#include "tulip/json.hpp"

#include <optional>
#include <string>

namespace tulip {

/// A composed action: a tool id plus its named arguments.
struct ToolCall {
    std::string call_id;
    std::string tool_id;
    Json arguments = Json::object();

    bool operator==(const ToolCall&) const = default;
};

/// Outcome of executing a ToolCall: exactly one of value or error.
struct ToolResult {
    std::string call_id;
    std::optional<Json> value;
    std::optional<std::string> error;
    /// Set for failures the framework itself detected (unknown tool, bad
    /// arguments, timeout); empty when the tool raised.
    std::optional<Errc> error_code;

    static ToolResult success(std::string call_id, Json value)
    {
        return {std::move(call_id), std::move(value), std::nullopt, std::nullopt};
    }
    static ToolResult failure(std::string call_id, std::string message,
                              std::optional<Errc> code = std::nullopt)
    {
        return {std::move(call_id), std::nullopt, std::move(message), code};
    }

    bool ok() const noexcept { return value.has_value(); }

    /// Text handed back to the model: strings verbatim, everything else as JSON.
    std::string content() const
    {
        if (error)
            return "Error: " + *error;
        if (value->is_string())
            return value->get<std::string>();
        return value->dump();
    }

    bool operator==(const ToolResult&) const = default;
};

} // namespace tulip
