// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

namespace tulip {

// Insertion-ordered so schemas keep signature order and traces serialize
// byte-identically across runs.
using Json = nlohmann::ordered_json;

} // namespace tulip
