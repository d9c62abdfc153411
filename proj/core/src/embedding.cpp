// SPDX-License-Identifier: Apache-2.0
#include "tulip/embedding.hpp"

#include "http_client.hpp"
#include "text_util.hpp"
#include "tulip/error.hpp"

#include <fmt/format.h>

#include <cctype>
#include <cmath>
#include <numeric>

namespace tulip {

std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current += static_cast<char>(std::tolower(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty())
        tokens.push_back(std::move(current));
    return tokens;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept
{
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

Embedded EmbeddingBackend::embed_text(std::string_view text)
{
    std::string owned(text);
    auto batch = embed_batch(std::span<const std::string>(&owned, 1));
    return std::move(batch.front());
}

namespace {

void require_non_empty(std::span<const std::string> texts)
{
    for (size_t i = 0; i < texts.size(); ++i)
        if (detail::trim(texts[i]).empty())
            throw Error(Errc::EmptyInput,
                        texts.size() == 1 ? std::string("cannot embed empty text")
                                          : fmt::format("cannot embed empty text at index {}", i));
}

} // namespace

HashingEmbedding::HashingEmbedding(std::size_t dimension, std::string model_name)
    : dimension_(dimension), model_(std::move(model_name))
{
    if (dimension_ == 0)
        throw Error(Errc::ConfigError, "embedding dimension must be positive");
}

std::vector<Embedded> HashingEmbedding::embed_batch(std::span<const std::string> texts)
{
    require_non_empty(texts);
    std::vector<Embedded> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        auto tokens = tokenize(text);
        // Non-empty after trimming but punctuation-only: nothing to hash.
        if (tokens.empty())
            throw Error(Errc::EmptyInput, fmt::format("text `{}` contains no tokens", text));
        EmbeddingVector v(dimension_, 0.0);
        for (const auto& t : tokens)
            v[fnv1a64(t) % dimension_] += 1.0;
        double norm_sq = 0.0;
        for (double x : v)
            norm_sq += x * x;
        const double norm = std::sqrt(norm_sq);
        for (double& x : v)
            x /= norm;
        out.push_back({std::move(v), {model_, tokens.size()}});
    }
    return out;
}

HttpEmbedding::HttpEmbedding(HttpEmbeddingConfig config) : config_(std::move(config))
{
    if (config_.dimension == 0)
        throw Error(Errc::ConfigError, "HTTP embedding backend needs an explicit dimension");
    if (config_.model.empty())
        throw Error(Errc::ConfigError, "HTTP embedding backend needs a model name");
}

std::vector<Embedded> HttpEmbedding::embed_batch(std::span<const std::string> texts)
{
    require_non_empty(texts);
    if (texts.empty())
        return {};

    detail::JsonHttpClient client(config_.base_url, config_.api_key, config_.timeout_seconds);
    Json input = Json::array();
    for (const auto& t : texts)
        input.push_back(t);
    auto response = client.post("/embeddings", {{"model", config_.model}, {"input", input}});

    std::vector<Embedded> out(texts.size());
    std::uint64_t total_tokens = 0;
    try {
        const auto& data = response.at("data");
        if (!data.is_array() || data.size() != texts.size())
            throw BackendError(200, response.dump().substr(0, 256),
                               fmt::format("expected {} embeddings", texts.size()));
        for (size_t i = 0; i < data.size(); ++i) {
            const auto& item = data[i];
            size_t index = item.contains("index") ? item.at("index").get<size_t>() : i;
            if (index >= out.size())
                throw BackendError(200, item.dump().substr(0, 256), "embedding index out of range");
            auto values = item.at("embedding").get<std::vector<double>>();
            if (values.size() != config_.dimension)
                throw BackendError(200, "",
                                   fmt::format("embedding dimension {} does not match configured {}",
                                               values.size(), config_.dimension));
            for (double x : values)
                if (!std::isfinite(x))
                    throw BackendError(200, "", "embedding contains a non-finite value");
            out[index].vector = std::move(values);
        }
        total_tokens = response.at("usage").at("total_tokens").get<std::uint64_t>();
    } catch (const Json::exception& e) {
        throw BackendError(200, response.dump().substr(0, 256),
                           std::string("malformed embeddings response: ") + e.what());
    }

    // The service reports one total per request; attribute it to the inputs in
    // proportion to their local token counts (largest remainder, at least 1).
    std::vector<std::uint64_t> local(texts.size());
    for (size_t i = 0; i < texts.size(); ++i)
        local[i] = std::max<std::uint64_t>(1, tokenize(texts[i]).size());
    const auto local_sum = std::accumulate(local.begin(), local.end(), std::uint64_t{0});
    std::uint64_t assigned = 0;
    for (size_t i = 0; i < texts.size(); ++i) {
        auto share = total_tokens * local[i] / local_sum;
        out[i].usage = {config_.model, share};
        assigned += share;
    }
    for (size_t i = 0; assigned < total_tokens; i = (i + 1) % texts.size(), ++assigned)
        ++out[i].usage.token_count;
    return out;
}

} // namespace tulip
