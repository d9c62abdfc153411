// SPDX-License-Identifier: Apache-2.0
#include "tulip/tooldef.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::vector<std::pair<std::string, std::string>> corpus()
{
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& entry : std::filesystem::directory_iterator(TULIP_CORPUS_DIR)) {
        std::ifstream in(entry.path());
        std::ostringstream text;
        text << in.rdbuf();
        files.emplace_back(entry.path().stem().string(), text.str());
    }
    return files;
}

void BM_ParseCorpus(benchmark::State& state)
{
    const auto files = corpus();
    std::size_t bytes = 0;
    for (const auto& f : files)
        bytes += f.second.size();
    for (auto _ : state)
        for (const auto& [module, text] : files)
            benchmark::DoNotOptimize(tulip::parse_tool_file(module, text));
    state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(bytes));
}
BENCHMARK(BM_ParseCorpus);

} // namespace
