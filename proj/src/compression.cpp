#include "semcomp/compression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace semcomp {

namespace {

std::string join_selected(std::span<const Sentence> sentences, const std::vector<std::size_t>& indices) {
    std::string out;
    for (std::size_t i : indices) {
        if (!out.empty()) out.push_back(' ');
        out += sentences[i].text;
    }
    return out;
}

}  // namespace

std::string to_string(CompressorKind kind) {
    switch (kind) {
        case CompressorKind::external_abstractive: return "external_abstractive";
        case CompressorKind::extractive_fallback: return "extractive_fallback";
        case CompressorKind::identity: return "identity";
    }
    return "unknown";
}

CompressorKind parse_compressor_kind(std::string_view name) {
    if (name == "external" || name == "abstractive" || name == "external_abstractive") {
        return CompressorKind::external_abstractive;
    }
    if (name == "fallback" || name == "extractive" || name == "extractive_fallback") {
        return CompressorKind::extractive_fallback;
    }
    if (name == "identity") return CompressorKind::identity;
    throw std::invalid_argument("unknown compressor '" + std::string(name) + "'");
}

std::string to_string(SegmentAction action) {
    return action == SegmentAction::compressed ? "compressed" : "passthrough";
}

void CompressorSpec::validate() const {
    if (min_input >= max_input) throw std::invalid_argument("compressor spec: gamma1 must be below gamma2");
    if (summary_cap == 0 || summary_cap > max_input) {
        throw std::invalid_argument("compressor spec: s_max must be in [1, gamma2]");
    }
    if (!(dedup_threshold > 0.0 && dedup_threshold <= 1.0)) {
        throw std::invalid_argument("compressor spec: dedup threshold must be in (0, 1]");
    }
}

std::vector<EmbeddingVector> ChunkContext::sentence_embeddings() const {
    if (!embeddings.empty()) {
        if (embeddings.size() != sentences.size()) {
            throw std::invalid_argument("chunk context: embeddings not aligned with sentences");
        }
        return {embeddings.begin(), embeddings.end()};
    }
    if (embedder == nullptr) throw std::runtime_error("chunk context: no sentence embeddings available");
    std::vector<std::string> texts;
    texts.reserve(sentences.size());
    for (const auto& s : sentences) texts.push_back(s.text);
    auto out = embedder->embed(texts);
    if (out.size() != sentences.size()) throw std::runtime_error("embedder returned the wrong number of vectors");
    return out;
}

std::vector<std::size_t> dedup_sentences(std::span<const EmbeddingVector> embeddings, double dedup_threshold) {
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](std::size_t j) {
            return cosine_similarity(embeddings[i], embeddings[j]) > dedup_threshold;
        });
        if (!duplicate) kept.push_back(i);
    }
    return kept;
}

std::string extractive_fallback(std::span<const Sentence> sentences, std::span<const EmbeddingVector> embeddings,
                                std::size_t budget, double dedup_threshold) {
    if (budget == 0) throw std::invalid_argument("extractive_fallback: budget must be at least 1");
    if (sentences.size() != embeddings.size()) {
        throw std::invalid_argument("extractive_fallback: embeddings not aligned with sentences");
    }
    std::vector<std::size_t> kept = dedup_sentences(embeddings, dedup_threshold);

    std::size_t total = 0;
    for (std::size_t i : kept) total += sentences[i].length;
    if (total <= budget) return join_selected(sentences, kept);

    const std::size_t dim = embeddings[kept.front()].dim();
    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i : kept) {
        for (std::size_t d = 0; d < dim; ++d) centroid[d] += embeddings[i][d];
    }
    for (double& c : centroid) c /= static_cast<double>(kept.size());
    const EmbeddingVector centroid_vec(std::move(centroid));

    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(kept.size());
    for (std::size_t i : kept) ranked.emplace_back(cosine_similarity(embeddings[i], centroid_vec), i);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    std::vector<std::size_t> selected;
    std::size_t used = 0;
    for (const auto& [score, i] : ranked) {
        if (used + sentences[i].length <= budget) {
            selected.push_back(i);
            used += sentences[i].length;
        }
    }
    // Nothing fits: the best sentence alone.
    if (selected.empty()) selected.push_back(ranked.front().second);
    std::sort(selected.begin(), selected.end());
    return join_selected(sentences, selected);
}

std::string ExtractiveCompressor::compress(const TopicChunk&, const ChunkContext& context, std::size_t budget) {
    if (context.sentences.empty()) return {};
    const auto embeddings = context.sentence_embeddings();
    return extractive_fallback(context.sentences, embeddings, budget, dedup_threshold_);
}

CompressedSegment compress_chunk(const TopicChunk& chunk, const CompressorSpec& spec, Compressor& backend,
                                 const ChunkContext& context, std::optional<std::size_t> budget) {
    CompressedSegment seg;
    seg.chunk_id = chunk.chunk_id;
    seg.original_length = chunk.length;
    seg.min_block_index = chunk.min_block_index();

    auto passthrough = [&] {
        seg.compressed_text = chunk.text;
        seg.compressed_length = chunk.length;
        seg.action_taken = SegmentAction::passthrough;
    };

    if (chunk.action == ChunkAction::passthrough || chunk.length < spec.min_input) {
        passthrough();
        seg.produced_by = "passthrough";
        return seg;
    }
    const std::size_t limit = std::max<std::size_t>(1, budget.value_or(spec.summary_cap));

    std::optional<std::string> text;
    try {
        text = backend.compress(chunk, context, limit);
        seg.produced_by = to_string(backend.kind());
    } catch (const std::exception& e) {
        seg.degraded = true;
        seg.warnings.push_back(to_string(backend.kind()) + " backend failed: " + e.what());
    }
    if (!text && backend.kind() != CompressorKind::extractive_fallback) {
        try {
            ExtractiveCompressor fallback(spec.dedup_threshold);
            text = fallback.compress(chunk, context, limit);
            seg.produced_by = to_string(CompressorKind::extractive_fallback);
        } catch (const std::exception& e) {
            seg.warnings.push_back(std::string("extractive fallback failed: ") + e.what());
        }
    }
    if (!text) {
        passthrough();
        seg.produced_by = "passthrough";
        seg.warnings.push_back("chunk " + std::to_string(chunk.chunk_id) + " kept verbatim");
        return seg;
    }

    const std::size_t len = context.counter(*text);
    if (len > chunk.length) {
        seg.warnings.push_back("backend output longer than input; original kept");
        seg.compressed_text = chunk.text;
        seg.compressed_length = chunk.length;
    } else {
        seg.compressed_text = std::move(*text);
        seg.compressed_length = len;
    }
    seg.action_taken = SegmentAction::compressed;
    return seg;
}

CompressedDocument assemble(std::vector<CompressedSegment> segments, std::string_view separator) {
    std::set<std::size_t> ids;
    for (const auto& s : segments) {
        if (!ids.insert(s.chunk_id).second) {
            throw std::invalid_argument("assemble: duplicate chunk id " + std::to_string(s.chunk_id));
        }
    }
    std::stable_sort(segments.begin(), segments.end(),
                     [](const auto& a, const auto& b) { return a.min_block_index < b.min_block_index; });

    CompressedDocument doc;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        if (i > 0) doc.text += separator;
        doc.text += s.compressed_text;
        doc.total_original_length += s.original_length;
        doc.total_compressed_length += s.compressed_length;
    }
    doc.realized_ratio = doc.total_original_length == 0
                             ? 1.0
                             : static_cast<double>(doc.total_compressed_length) /
                                   static_cast<double>(doc.total_original_length);
    doc.segments = std::move(segments);
    return doc;
}

std::vector<std::size_t> allocate_budgets(std::span<const std::size_t> lengths, std::span<const std::size_t> demands,
                                          double alpha, std::size_t s_max) {
    if (lengths.size() != demands.size()) throw std::invalid_argument("allocate_budgets: size mismatch");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("allocate_budgets: alpha must be in (0, 1]");
    const std::size_t n = lengths.size();
    std::vector<double> caps(n);
    double total_len = 0.0;
    double total_cap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        caps[i] = static_cast<double>(std::min({demands[i], s_max, lengths[i]}));
        total_len += static_cast<double>(lengths[i]);
        total_cap += caps[i];
    }
    const double target = alpha * total_len;

    auto filled = [&](double lambda) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += std::min(caps[i], lambda * static_cast<double>(lengths[i]));
        return sum;
    };

    double lambda = 1.0;
    if (total_cap > target) {
        double lo = alpha;
        double hi = 1.0;
        for (int iter = 0; iter < 100; ++iter) {
            const double mid = 0.5 * (lo + hi);
            (filled(mid) < target ? lo : hi) = mid;
        }
        lambda = hi;
    }

    std::vector<std::size_t> budgets(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double share = std::min(caps[i], lambda * static_cast<double>(lengths[i]));
        budgets[i] = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(share)));
    }
    return budgets;
}

}  // namespace semcomp
