// SPDX-License-Identifier: Apache-2.0
#include "tulip/embedding.hpp"

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

namespace {

const std::string summary =
    "def multiply(a: float, b: float) -> float:\n"
    "    Multiply two numbers.\n"
    "    a: The first multiplicand.\n"
    "    b: The second multiplicand.\n"
    "    Returns: The product of a and b.\n";

void BM_Tokenize(benchmark::State& state)
{
    for (auto _ : state)
        benchmark::DoNotOptimize(tulip::tokenize(summary));
}
BENCHMARK(BM_Tokenize);

void BM_HashingEmbedText(benchmark::State& state)
{
    tulip::HashingEmbedding e(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(e.embed_text(summary));
}
BENCHMARK(BM_HashingEmbedText)->Arg(256)->Arg(3072);

void BM_HashingEmbedBatch(benchmark::State& state)
{
    tulip::HashingEmbedding e;
    std::vector<std::string> texts(static_cast<std::size_t>(state.range(0)), summary);
    for (auto _ : state)
        benchmark::DoNotOptimize(e.embed_batch(texts));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HashingEmbedBatch)->Arg(16)->Arg(128);

} // namespace
