// SPDX-License-Identifier: Apache-2.0
//
// Default prompt texts. Placeholders are `{prompt}`, `{tasks}`, `{steps}`,
// `{task}`, `{instruction}`, `{code}` and `{errors}`; the benchmark tool
// generator prompts use bare NUMBER_FUNCTIONS, SUBFIELD and KNOWN_FUNCTIONS.
#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tulip::prompts {

extern const std::string_view base_system;
extern const std::string_view naive_tool_system;
extern const std::string_view cot_tulip_system;
extern const std::string_view decomposition;
extern const std::string_view decomposition_reminder;
extern const std::string_view tool_search;
extern const std::string_view execution;
extern const std::string_view one_shot_example;
extern const std::string_view auto_tulip_system;

extern const std::string_view codegen_system;
extern const std::string_view codegen_create;
extern const std::string_view codegen_update;
extern const std::string_view codegen_fix;
extern const std::string_view genfuncs;
extern const std::string_view genfuncs_known;

/// Replaces each `{key}` with its value; unknown placeholders are left alone.
std::string format(std::string_view templ, const std::vector<std::pair<std::string, std::string>>& values);

/// "1. first\n2. second"
std::string numbered(const std::vector<std::string>& items);

} // namespace tulip::prompts
