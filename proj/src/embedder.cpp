#include "semcomp/embedder.hpp"

namespace semcomp {

std::vector<EmbeddingVector> StubEmbedder::embed(std::span<const std::string> texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(hashed_bow_embed(t, dim_, seed_));
    return out;
}

}  // namespace semcomp
