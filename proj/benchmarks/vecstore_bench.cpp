// SPDX-License-Identifier: Apache-2.0
#include "tulip/vecstore.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <string>

namespace {

tulip::EmbeddingVector random_vector(std::mt19937_64& rng, std::size_t dim)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    tulip::EmbeddingVector v(dim);
    for (auto& x : v)
        x = u(rng);
    return v;
}

tulip::VectorStore filled_store(std::size_t n, std::size_t dim)
{
    std::mt19937_64 rng(7);
    tulip::VectorStore store(dim);
    for (std::size_t i = 0; i < n; ++i)
        store.add({"tool_" + std::to_string(i), "", random_vector(rng, dim), {}});
    return store;
}

void BM_Query(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto dim = static_cast<std::size_t>(state.range(1));
    auto store = filled_store(n, dim);
    std::mt19937_64 rng(11);
    auto q = random_vector(rng, dim);
    for (auto _ : state)
        benchmark::DoNotOptimize(store.query(q, 5));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_Query)->Args({100, 256})->Args({1000, 256})->Args({10000, 256})->Args({1000, 3072});

void BM_QueryWithCeiling(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    auto store = filled_store(n, 256);
    std::mt19937_64 rng(13);
    auto q = random_vector(rng, 256);
    for (auto _ : state)
        benchmark::DoNotOptimize(store.query(q, 5, 150.0));
}
BENCHMARK(BM_QueryWithCeiling)->Arg(1000)->Arg(10000);

void BM_SquaredL2(benchmark::State& state)
{
    const auto dim = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(17);
    auto a = random_vector(rng, dim);
    auto b = random_vector(rng, dim);
    for (auto _ : state)
        benchmark::DoNotOptimize(tulip::squared_l2(a, b));
}
BENCHMARK(BM_SquaredL2)->Arg(256)->Arg(3072);

} // namespace
