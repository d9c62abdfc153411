// SPDX-License-Identifier: Apache-2.0
//
// The shipped math tool corpus: 100 functions in 10 modules. The `.tdf` files
// under `<data>/corpus/math` carry the documentation (and Python bodies for the
// subprocess runner); this header exposes host implementations of the same
// functions so the library can run without an interpreter.
#pragma once

#include "tulip/json.hpp"
#include "tulip/runtime.hpp"
#include "tulip/toollib.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tulip::corpus {

struct NativeFunction {
    std::string module;
    std::string name;
    NativeTool tool;
    /// Argument objects exercising the function, errors included.
    std::vector<Json> samples;

    std::string id() const { return qualified_id(module, name); }
};

const std::vector<NativeFunction>& math_natives();

/// `TULIP_DATA_DIR` if set, else the source tree's `data/`, else the install
/// prefix's `share/tulip`.
std::filesystem::path data_dir();
std::filesystem::path math_dir();

/// The `.tdf` modules of `dir`, bound as native tools.
std::vector<ModuleSource> math_modules(const std::filesystem::path& dir = math_dir());

/// Registers every native whose id is present in `library`. Returns the number
/// registered.
std::size_t register_math_natives(Runtime& runtime, const ToolLibrary& library);

} // namespace tulip::corpus
