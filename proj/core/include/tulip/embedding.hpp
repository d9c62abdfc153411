// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tulip {

using EmbeddingVector = std::vector<double>;

struct EmbeddingUsage {
    std::string model;
    std::uint64_t token_count = 0;
};

struct Embedded {
    EmbeddingVector vector;
    EmbeddingUsage usage;
};

/// Lowercased alphanumeric runs; the unit the hashing backend counts.
std::vector<std::string> tokenize(std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;

    virtual std::string model() const = 0;
    virtual std::size_t dimension() const = 0;

    /// Order-preserving. Throws Error(EmptyInput) naming the failing index,
    /// or BackendError.
    virtual std::vector<Embedded> embed_batch(std::span<const std::string> texts) = 0;

    Embedded embed_text(std::string_view text);
};

/// Feature hashing over FNV-1a token hashes, L2-normalized. Pure function of
/// (text, dimension); used offline and in tests.
class HashingEmbedding final : public EmbeddingBackend {
public:
    static constexpr std::size_t default_dimension = 256;

    explicit HashingEmbedding(std::size_t dimension = default_dimension,
                              std::string model_name = "hashing-fnv1a");

    std::string model() const override { return model_; }
    std::size_t dimension() const override { return dimension_; }
    std::vector<Embedded> embed_batch(std::span<const std::string> texts) override;

private:
    std::size_t dimension_;
    std::string model_;
};

struct HttpEmbeddingConfig {
    std::string base_url;
    std::string api_key;
    std::string model;
    std::size_t dimension = 0;
    int timeout_seconds = 60;
};

/// OpenAI-compatible `POST {base_url}/embeddings`.
class HttpEmbedding final : public EmbeddingBackend {
public:
    explicit HttpEmbedding(HttpEmbeddingConfig config);

    std::string model() const override { return config_.model; }
    std::size_t dimension() const override { return config_.dimension; }
    std::vector<Embedded> embed_batch(std::span<const std::string> texts) override;

private:
    HttpEmbeddingConfig config_;
};

} // namespace tulip
