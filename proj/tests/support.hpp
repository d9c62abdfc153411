// SPDX-License-Identifier: Apache-2.0
//
// Shared helpers for the unit and acceptance tests.
#pragma once

#include "tulip/corpus.hpp"
#include "tulip/embedding.hpp"
#include "tulip/llm.hpp"
#include "tulip/runtime.hpp"
#include "tulip/toollib.hpp"

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

namespace tulip::test {

namespace fs = std::filesystem;

inline fs::path fixtures() { return TULIP_TEST_FIXTURES; }
inline fs::path data() { return TULIP_TEST_DATA; }
inline fs::path runner() { return TULIP_TEST_RUNNER; }
inline fs::path transcripts() { return data() / "transcripts"; }

/// Distance ceiling the scripted fixtures are recorded against. The hashing
/// embedding puts two-word queries like "multiply two numbers" at about 1.24
/// from their tool, above the 1.2 default meant for dense embeddings.
constexpr double fixture_ceiling = 1.5;

inline std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_file(const fs::path& path, const std::string& text)
{
    fs::create_directories(path.parent_path());
    std::ofstream(path, std::ios::binary) << text;
}

class TempDir {
public:
    TempDir()
    {
        static std::mt19937_64 rng{std::random_device{}()};
        path_ = fs::temp_directory_path() / ("tulip-test-" + std::to_string(rng()));
        fs::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline bool have_python()
{
    return std::system("python3 -c pass >/dev/null 2>&1") == 0;
}

inline InterpreterConfig python_interpreter()
{
    InterpreterConfig c;
    c.command = {"python3", runner().string()};
    c.enabled = true;
    return c;
}

inline std::shared_ptr<EmbeddingBackend> hashing(const std::string& label = "text-embedding-3-large")
{
    return std::make_shared<HashingEmbedding>(HashingEmbedding::default_dimension, label);
}

/// The shipped math corpus, natively bound, with every native registered.
struct MathLibrary {
    std::shared_ptr<EmbeddingBackend> embedding = hashing();
    std::unique_ptr<ToolLibrary> library;
    std::unique_ptr<Runtime> runtime;

    explicit MathLibrary(fs::path store = {}, InterpreterConfig interpreter = {})
    {
        library = std::make_unique<ToolLibrary>(LibraryConfig{std::move(store), {}, embedding});
        auto sources = corpus::math_modules(data() / "corpus" / "math");
        library->initialize(sources);
        runtime = std::make_unique<Runtime>(*library, std::move(interpreter));
        corpus::register_math_natives(*runtime, *library);
    }
};

inline ScriptedTranscript transcript(const std::string& name)
{
    return ScriptedTranscript::load(transcripts() / name);
}

} // namespace tulip::test
