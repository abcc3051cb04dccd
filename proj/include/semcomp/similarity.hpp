#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace semcomp {

class EmbeddingVector {
public:
    EmbeddingVector() = default;
    explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {}

    std::size_t dim() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    double norm() const;
    bool is_zero() const;

    bool operator==(const EmbeddingVector&) const = default;

private:
    std::vector<double> values_;
};

/// Cosine of the angle between u and v, clamped to [-1, 1]. Zero when either
/// vector has zero norm. Throws std::invalid_argument on a dimension mismatch.
double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

/// Dense symmetric matrix of pairwise block similarities.
class SimilarityGraph {
public:
    SimilarityGraph() = default;
    /// Takes ownership of an n*n row-major matrix. Throws if the size is wrong.
    SimilarityGraph(std::size_t n, std::vector<double> weights);

    std::size_t size() const { return n_; }
    double weight(std::size_t i, std::size_t j) const { return weights_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(weights_).subspan(i * n_, n_);
    }

    /// Sub-graph over the given nodes, in the given order.
    SimilarityGraph induced(std::span<const std::size_t> nodes) const;

private:
    std::size_t n_ = 0;
    std::vector<double> weights_;
};

/// weights[i][j] = cosine_similarity(v_i, v_j). The diagonal is exactly 1 for
/// nonzero vectors and 0 for zero vectors.
SimilarityGraph build_graph(std::span<const EmbeddingVector> vectors);

/// Deterministic bag-of-words embedding: lowercase word tokens hashed with a
/// seeded 64-bit FNV-1a into `dim` buckets, counts L2-normalized. Empty text
/// (or text without word characters) maps to the zero vector.
EmbeddingVector hashed_bow_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

}  // namespace semcomp
