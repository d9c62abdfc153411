// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tulip {

enum class Errc {
    // tooldef
    SyntaxError,
    DocMismatch,
    MissingDoc,
    // embedding / http
    EmptyInput,
    BackendError,
    // vecstore / toollib
    DuplicateId,
    DimensionMismatch,
    UnknownId,
    IoError,
    CorruptStore,
    InvalidSource,
    NameChanged,
    // runtime
    DuplicateRegistration,
    SignatureMismatch,
    UnknownTool,
    NotExecutable,
    ArgumentError,
    Timeout,
    // llm
    InteractionLimitExceeded,
    MatchFailure,
    UnknownModel,
    // agents
    DecompositionFormatError,
    // cli / config
    ConfigError,
};

std::string_view errc_name(Errc code) noexcept;

/// Base exception for everything the framework raises. The code is stable and
/// is what tests and the CLI switch on; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Tool-definition parse failure, located in the source text.
class ParseError : public Error {
public:
    ParseError(Errc code, std::string module, int line, const std::string& message);

    const std::string& module() const noexcept { return module_; }
    /// 1-based; 0 when the problem is not tied to a line.
    int line() const noexcept { return line_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string module_;
    int line_;
    std::string detail_;
};

/// Non-2xx response, transport failure, or malformed body from an HTTP backend.
class BackendError : public Error {
public:
    BackendError(int status, std::string body_excerpt, const std::string& message);

    /// HTTP status, or -1 for transport-level failures.
    int status() const noexcept { return status_; }
    const std::string& body_excerpt() const noexcept { return body_excerpt_; }

private:
    int status_;
    std::string body_excerpt_;
};

} // namespace tulip
