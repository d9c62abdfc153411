// SPDX-License-Identifier: Apache-2.0
#include "tulip/error.hpp"

#include <fmt/format.h>

namespace tulip {

std::string_view errc_name(Errc code) noexcept
{
    switch (code) {
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::DocMismatch: return "DocMismatch";
    case Errc::MissingDoc: return "MissingDoc";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::BackendError: return "BackendError";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::UnknownId: return "UnknownId";
    case Errc::IoError: return "IoError";
    case Errc::CorruptStore: return "CorruptStore";
    case Errc::InvalidSource: return "InvalidSource";
    case Errc::NameChanged: return "NameChanged";
    case Errc::DuplicateRegistration: return "DuplicateRegistration";
    case Errc::SignatureMismatch: return "SignatureMismatch";
    case Errc::UnknownTool: return "UnknownTool";
    case Errc::NotExecutable: return "NotExecutable";
    case Errc::ArgumentError: return "ArgumentError";
    case Errc::Timeout: return "Timeout";
    case Errc::InteractionLimitExceeded: return "InteractionLimitExceeded";
    case Errc::MatchFailure: return "MatchFailure";
    case Errc::UnknownModel: return "UnknownModel";
    case Errc::DecompositionFormatError: return "DecompositionFormatError";
    case Errc::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

ParseError::ParseError(Errc code, std::string module, int line, const std::string& message)
    : Error(code,
            line > 0 ? fmt::format("{}:{}: {}: {}", module, line, errc_name(code), message)
                     : fmt::format("{}: {}: {}", module, errc_name(code), message)),
      module_(std::move(module)),
      line_(line),
      detail_(message)
{
}

BackendError::BackendError(int status, std::string body_excerpt, const std::string& message)
    : Error(Errc::BackendError,
            status >= 0 ? fmt::format("{} (HTTP {}): {}", message, status, body_excerpt) : message),
      status_(status),
      body_excerpt_(std::move(body_excerpt))
{
}

} // namespace tulip
