#pragma once

#include "semcomp/chunking.hpp"
#include "semcomp/embedder.hpp"
#include "semcomp/segmentation.hpp"
#include "semcomp/similarity.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semcomp {

enum class CompressorKind { external_abstractive, extractive_fallback, identity };

std::string to_string(CompressorKind kind);
/// Accepts "external", "abstractive", "external_abstractive", "fallback",
/// "extractive", "extractive_fallback" and "identity".
CompressorKind parse_compressor_kind(std::string_view name);

struct CompressorSpec {
    CompressorKind kind = CompressorKind::extractive_fallback;
    std::size_t min_input = 60;    // gamma1
    std::size_t max_input = 600;   // gamma2
    std::size_t summary_cap = 150; // s_max
    double dedup_threshold = 0.95;

    void validate() const;
};

/// What a backend sees of a chunk. Sentences are the chunk's sentences in
/// document order; embeddings, when non-empty, are aligned with them.
/// Otherwise `embedder` is used to compute them on demand.
struct ChunkContext {
    std::span<const Sentence> sentences;
    std::span<const EmbeddingVector> embeddings;
    Embedder* embedder = nullptr;
    LengthCounter counter = count_length;

    std::vector<EmbeddingVector> sentence_embeddings() const;
};

class Compressor {
public:
    virtual ~Compressor() = default;
    /// Returns the compressed text for the chunk, aiming for at most
    /// `budget` length units. May throw on backend failure.
    virtual std::string compress(const TopicChunk& chunk, const ChunkContext& context, std::size_t budget) = 0;
    virtual CompressorKind kind() const = 0;
};

class IdentityCompressor final : public Compressor {
public:
    std::string compress(const TopicChunk& chunk, const ChunkContext&, std::size_t) override { return chunk.text; }
    CompressorKind kind() const override { return CompressorKind::identity; }
};

class ExtractiveCompressor final : public Compressor {
public:
    explicit ExtractiveCompressor(double dedup_threshold = 0.95) : dedup_threshold_(dedup_threshold) {}

    std::string compress(const TopicChunk& chunk, const ChunkContext& context, std::size_t budget) override;
    CompressorKind kind() const override { return CompressorKind::extractive_fallback; }

private:
    double dedup_threshold_;
};

/// Indices of sentences kept by a left-to-right scan that drops any sentence
/// whose similarity to an already kept one exceeds dedup_threshold.
std::vector<std::size_t> dedup_sentences(std::span<const EmbeddingVector> embeddings, double dedup_threshold);

/// Two-pass extractive compression: near-duplicate removal, then (only if
/// still over budget) centroid ranking. Output keeps document order.
std::string extractive_fallback(std::span<const Sentence> sentences, std::span<const EmbeddingVector> embeddings,
                                std::size_t budget, double dedup_threshold);

enum class SegmentAction { compressed, passthrough };

std::string to_string(SegmentAction action);

struct CompressedSegment {
    std::size_t chunk_id = 0;
    std::size_t original_length = 0;
    std::string compressed_text;
    std::size_t compressed_length = 0;
    SegmentAction action_taken = SegmentAction::passthrough;
    std::size_t min_block_index = 0;
    /// Backend that produced the text ("identity", "extractive_fallback", ...).
    std::string produced_by;
    /// Set when the configured backend failed and a lower rung was used.
    bool degraded = false;
    std::vector<std::string> warnings;
};

struct CompressedDocument {
    std::vector<CompressedSegment> segments;  // ascending min_block_index
    std::string text;
    std::size_t total_original_length = 0;
    std::size_t total_compressed_length = 0;
    double realized_ratio = 1.0;
};

/// Compresses one chunk. Passthrough chunks are returned verbatim. A failing
/// backend falls back to the extractive compressor, and if that fails too the
/// chunk passes through with a warning. Output is never longer than input.
/// `budget` defaults to spec.summary_cap.
CompressedSegment compress_chunk(const TopicChunk& chunk, const CompressorSpec& spec, Compressor& backend,
                                 const ChunkContext& context, std::optional<std::size_t> budget = std::nullopt);

/// Sorts segments into document order and joins them with `separator`.
/// Throws std::invalid_argument on a duplicate chunk id.
CompressedDocument assemble(std::vector<CompressedSegment> segments, std::string_view separator = "\n");

/// Splits a document-level target of alpha * sum(lengths) across chunks.
/// Each chunk gets min(demand_i, s_max, lambda * length_i) (rounded, at
/// least 1) with lambda >= alpha chosen so the budgets add up to the target,
/// or every chunk gets its cap when the caps cannot reach it.
std::vector<std::size_t> allocate_budgets(std::span<const std::size_t> lengths,
                                          std::span<const std::size_t> demands, double alpha, std::size_t s_max);

}  // namespace semcomp
