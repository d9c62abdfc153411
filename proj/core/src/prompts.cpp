// SPDX-License-Identifier: Apache-2.0
#include "tulip/prompts.hpp"

#include "text_util.hpp"

namespace tulip::prompts {

const std::string_view base_system = "You are a helpful agent.";

const std::string_view naive_tool_system =
    "You are a helpful agent who has access to an abundance of tools.\n"
    "Always adhere to the following procedure:\n"
    "1. Identify all individual steps mentioned in the user request.\n"
    "2. Whenever possible use the tools available to fulfill the user request.\n"
    "3. Respond to the user with the final result.";

const std::string_view cot_tulip_system =
    "You are a helpful agent who has access to an abundance of tools.\n"
    "Always adhere to the following procedure:\n"
    "1. Break the user request down into atomic tasks.\n"
    "2. Search your tool library for appropriate tools for these atomic tasks using the `search_tools` function. "
    "Provide generic task descriptions to ensure that you find generic tools.\n"
    "3. Whenever possible use the tools found to solve the atomic tasks.\n"
    "4. Respond to the user with the final result, never with an intermediate result.";

const std::string_view decomposition =
    "Considering the following task, what are the necessary steps you need to execute?\n"
    "`{prompt}`\n"
    "Return an ordered list of steps.\n"
    "Return valid JSON and use the key `subtasks`.";

const std::string_view decomposition_reminder =
    "Your previous answer could not be read. Reply with a JSON object only, "
    "for example {\"subtasks\": [\"first step\", \"second step\"]}, containing at least one step.";

const std::string_view tool_search =
    "Search for suitable tools for each of the following tasks:\n"
    "{tasks}";

const std::string_view execution =
    "Now use the tools to fulfill the user request. Adhere exactly to the following steps:\n"
    "{steps}\n"
    "Execute the tool calls one at a time.";

const std::string_view one_shot_example =
    "Example of a task decomposition:\n"
    "Task: `What is the area of a circle with radius 4, rounded to one decimal?`\n"
    "{\"subtasks\": [\"Calculate the area of a circle with a radius of 4.\", "
    "\"Round the area to one decimal place.\"]}";

const std::string_view auto_tulip_system =
    "You are a helpful agent who has access to a tool library that you can search and edit.\n"
    "Always adhere to the following procedure:\n"
    "1. Break complex user requests down into atomic tasks with `decompose_task`.\n"
    "2. Search your tool library for appropriate tools for these atomic tasks using `search_tool_library`. "
    "Provide generic task descriptions to ensure that you find generic tools.\n"
    "3. If no suitable tool exists, create one with `create_tool`, describing a generic task.\n"
    "4. Change or remove tools with `update_tool` and `delete_tool` when the user asks for it.\n"
    "5. Whenever possible use the tools to solve the atomic tasks.\n"
    "6. Respond to the user with the final result, never with an intermediate result.";

const std::string_view codegen_system =
    "You are a very senior Python developer.\n"
    "You are extremely efficient and return ONLY code.";

const std::string_view codegen_create =
    "Write a single Python function for the following task: {task}\n"
    "Adhere to the following rules:\n"
    "1. Use sphinx documentation style without type documentation, with a `:param <name>:` line for every "
    "parameter and a `:return:` line\n"
    "2. Use python type hints for all parameters and the return value\n"
    "3. Write the signature on a single line\n"
    "4. Put imports at the top of the module\n"
    "5. Return only valid code and avoid Markdown syntax for code blocks";

const std::string_view codegen_update =
    "Edit the following Python code according to the instruction. "
    "Make sure to not change function names in the process.\n"
    "Instruction: {instruction}\n"
    "Code:\n"
    "{code}";

const std::string_view codegen_fix =
    "The code is invalid:\n"
    "{errors}\n"
    "Return the complete corrected code.";

const std::string_view genfuncs =
    "Please write NUMBER_FUNCTIONS Python functions for solving math tasks related to SUBFIELD.\n"
    "You may include even trivial functions, such as addition and subtraction.\n"
    "Adhere to the following rules:\n"
    "1. Use sphinx documentation style without type documentation\n"
    "2. Add meaningful and slightly verbose docstrings\n"
    "3. Use python type hints\n"
    "4. Return only valid code and avoid Markdown syntax for code blocks\n"
    "5. Avoid adding examples to the docstring";

const std::string_view genfuncs_known =
    "Make sure to return unique functions and do not include the following ones: KNOWN_FUNCTIONS.";

std::string format(std::string_view templ, const std::vector<std::pair<std::string, std::string>>& values)
{
    std::string out;
    out.reserve(templ.size());
    size_t pos = 0;
    while (pos < templ.size()) {
        auto open = templ.find('{', pos);
        if (open == std::string_view::npos) {
            out.append(templ.substr(pos));
            break;
        }
        out.append(templ.substr(pos, open - pos));
        auto close = templ.find('}', open);
        bool replaced = false;
        if (close != std::string_view::npos) {
            auto key = templ.substr(open + 1, close - open - 1);
            for (const auto& [k, v] : values)
                if (k == key) {
                    out.append(v);
                    pos = close + 1;
                    replaced = true;
                    break;
                }
        }
        if (!replaced) {
            out.push_back('{');
            pos = open + 1;
        }
    }
    return out;
}

std::string numbered(const std::vector<std::string>& items)
{
    std::string out;
    for (size_t i = 0; i < items.size(); ++i) {
        if (i)
            out += '\n';
        out += std::to_string(i + 1) + ". " + items[i];
    }
    return out;
}

} // namespace tulip::prompts
