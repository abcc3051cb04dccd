#pragma once

#include "semcomp/similarity.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace semcomp {

/// Source of sentence/block embeddings. Implementations must return one
/// vector per input text, in input order, and be safe to share across jobs.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
    virtual std::string name() const = 0;
};

/// Offline embedder backed by hashed_bow_embed.
class StubEmbedder final : public Embedder {
public:
    explicit StubEmbedder(std::size_t dim = 512, std::uint64_t seed = 0) : dim_(dim), seed_(seed) {}

    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
    std::string name() const override { return "stub-hashed-bow-" + std::to_string(dim_); }

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

}  // namespace semcomp
