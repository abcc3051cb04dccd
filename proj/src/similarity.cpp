#include "semcomp/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace semcomp {

namespace {

bool is_word_char(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80 ||
           c == '\'' || c == '-';
}

char lower_ascii(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::uint64_t seeded_fnv1a(std::string_view token, std::uint64_t seed) {
    std::uint64_t h = 1469598103934665603ULL;
    for (int shift = 0; shift < 64; shift += 8) {
        h ^= (seed >> shift) & 0xffU;
        h *= 1099511628211ULL;
    }
    for (unsigned char c : token) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    // splitmix64 finalizer.
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return h;
}

}  // namespace

double EmbeddingVector::norm() const {
    double sum = 0.0;
    for (double x : values_) sum += x * x;
    return std::sqrt(sum);
}

bool EmbeddingVector::is_zero() const {
    return std::all_of(values_.begin(), values_.end(), [](double x) { return x == 0.0; });
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dim() != v.dim()) {
        throw std::invalid_argument("cosine_similarity: dimension mismatch (" + std::to_string(u.dim()) +
                                    " vs " + std::to_string(v.dim()) + ")");
    }
    double dot = 0.0;
    double uu = 0.0;
    double vv = 0.0;
    for (std::size_t i = 0; i < u.dim(); ++i) {
        dot += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    if (uu == 0.0 || vv == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

SimilarityGraph::SimilarityGraph(std::size_t n, std::vector<double> weights)
    : n_(n), weights_(std::move(weights)) {
    if (weights_.size() != n_ * n_) throw std::invalid_argument("SimilarityGraph: weights must be n*n");
}

SimilarityGraph SimilarityGraph::induced(std::span<const std::size_t> nodes) const {
    const std::size_t m = nodes.size();
    std::vector<double> w(m * m);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) w[a * m + b] = weight(nodes[a], nodes[b]);
    }
    return SimilarityGraph(m, std::move(w));
}

SimilarityGraph build_graph(std::span<const EmbeddingVector> vectors) {
    if (vectors.empty()) throw std::invalid_argument("build_graph: no vectors");
    const std::size_t n = vectors.size();
    const std::size_t dim = vectors.front().dim();
    for (const auto& v : vectors) {
        if (v.dim() != dim) throw std::invalid_argument("build_graph: dimension mismatch");
    }
    std::vector<double> w(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        w[i * n + i] = vectors[i].is_zero() ? 0.0 : 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = cosine_similarity(vectors[i], vectors[j]);
            w[i * n + j] = s;
            w[j * n + i] = s;
        }
    }
    return SimilarityGraph(n, std::move(w));
}

EmbeddingVector hashed_bow_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
    if (dim < 8) throw std::invalid_argument("hashed_bow_embed: dim must be at least 8");
    std::vector<double> counts(dim, 0.0);
    std::string token;
    auto flush = [&] {
        // Strip edge hyphens/apostrophes.
        std::size_t b = 0;
        std::size_t e = token.size();
        while (b < e && (token[b] == '\'' || token[b] == '-')) ++b;
        while (e > b && (token[e - 1] == '\'' || token[e - 1] == '-')) --e;
        if (e > b) counts[seeded_fnv1a(std::string_view(token).substr(b, e - b), seed) % dim] += 1.0;
        token.clear();
    };
    for (char c : text) {
        if (is_word_char(static_cast<unsigned char>(c))) {
            token.push_back(lower_ascii(c));
        } else if (!token.empty()) {
            flush();
        }
    }
    if (!token.empty()) flush();

    double sum = 0.0;
    for (double x : counts) sum += x * x;
    if (sum > 0.0) {
        const double inv = 1.0 / std::sqrt(sum);
        for (double& x : counts) x *= inv;
    }
    return EmbeddingVector(std::move(counts));
}

}  // namespace semcomp
