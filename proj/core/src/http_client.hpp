// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tulip/json.hpp"

#include <string>

namespace tulip::detail {

/// Minimal JSON-over-HTTP POST used by the OpenAI-compatible backends.
/// Retries once on transport failure, never on an HTTP status.
class JsonHttpClient {
public:
    JsonHttpClient(std::string base_url, std::string api_key, int timeout_seconds);

    /// POST `{base_url}{path}`; throws BackendError on transport failure,
    /// non-2xx status or a body that is not JSON.
    Json post(const std::string& path, const Json& body) const;

private:
    std::string origin_;
    std::string path_prefix_;
    std::string api_key_;
    int timeout_seconds_;
};

} // namespace tulip::detail
