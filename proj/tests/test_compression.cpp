#include "semcomp/compression.hpp"
#include "semcomp/embedder.hpp"

#include <doctest.h>

#include <random>
#include <stdexcept>

using namespace semcomp;

namespace {

struct Fixture {
    std::vector<Sentence> sentences;
    std::vector<EmbeddingVector> embeddings;
    TopicChunk chunk;

    explicit Fixture(const std::string& text, std::size_t dim = 256) {
        sentences = split_sentences(text);
        StubEmbedder e(dim, 0);
        std::vector<std::string> texts;
        for (const auto& s : sentences) texts.push_back(s.text);
        embeddings = e.embed(texts);
        chunk.chunk_id = 3;
        chunk.block_indices = {5};
        chunk.text = join_sentences(sentences);
        chunk.length = count_length(chunk.text);
    }

    ChunkContext context() const { return ChunkContext{sentences, embeddings, nullptr, count_length}; }
};

class ThrowingCompressor final : public Compressor {
public:
    std::string compress(const TopicChunk&, const ChunkContext&, std::size_t) override {
        throw std::runtime_error("backend down");
    }
    CompressorKind kind() const override { return CompressorKind::external_abstractive; }
};

class ExpandingCompressor final : public Compressor {
public:
    std::string compress(const TopicChunk& chunk, const ChunkContext&, std::size_t) override {
        return chunk.text + " and then some more words";
    }
    CompressorKind kind() const override { return CompressorKind::external_abstractive; }
};

std::string repeat(const std::string& s, int n) {
    std::string out;
    for (int i = 0; i < n; ++i) out += (i ? " " : "") + s;
    return out;
}

const CompressorSpec kSpec{CompressorKind::extractive_fallback, 5, 600, 150, 0.95};

}  // namespace

TEST_CASE("compressor kind names") {
    CHECK(parse_compressor_kind("fallback") == CompressorKind::extractive_fallback);
    CHECK(parse_compressor_kind("external") == CompressorKind::external_abstractive);
    CHECK(parse_compressor_kind("identity") == CompressorKind::identity);
    CHECK_THROWS_AS(parse_compressor_kind("magic"), std::invalid_argument);
    CHECK_THROWS_AS((CompressorSpec{CompressorKind::identity, 600, 600, 150, 0.95}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((CompressorSpec{CompressorKind::identity, 60, 600, 700, 0.95}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((CompressorSpec{CompressorKind::identity, 60, 600, 150, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("extractive_fallback keeps one copy of identical sentences") {
    Fixture f(repeat("The grass is green.", 5));
    CHECK(extractive_fallback(f.sentences, f.embeddings, 4, 0.95) == "The grass is green.");
}

TEST_CASE("extractive_fallback is the identity on short duplicate-free input") {
    Fixture f("Ships sail at dawn. Markets close at noon. Rain falls in spring.");
    CHECK(extractive_fallback(f.sentences, f.embeddings, 100, 0.95) == f.chunk.text);
}

TEST_CASE("extractive_fallback keeps a unique passkey among repeated filler") {
    // Dedup leaves the filler once (9 words) plus the passkey sentence
    // (7 words) = 16 <= 20, so pass 2 never runs.
    Fixture f(repeat("The grass is green and the sky is blue.", 25) + " The pass key is 48213 remember it. " +
              repeat("The grass is green and the sky is blue.", 25));
    const auto out = extractive_fallback(f.sentences, f.embeddings, 20, 0.95);
    CHECK(out == "The grass is green and the sky is blue. The pass key is 48213 remember it.");
}

TEST_CASE("extractive_fallback ranks by centroid when over budget") {
    // Two near-identical harbor sentences dominate the centroid; the odd one out
    // is dropped first.
    Fixture f("Harbor ships dock at the pier. Zebra quantum violin. Harbor ships dock near the pier today.");
    const auto out = extractive_fallback(f.sentences, f.embeddings, 7, 0.99);
    CHECK(out.find("Zebra") == std::string::npos);
    CHECK(count_length(out) <= 7);
    CHECK_THROWS_AS(extractive_fallback(f.sentences, f.embeddings, 0, 0.95), std::invalid_argument);
    CHECK_THROWS_AS(extractive_fallback(f.sentences, std::span<const EmbeddingVector>(f.embeddings).first(1), 5, 0.95),
                    std::invalid_argument);
}

TEST_CASE("extractive_fallback keeps the best sentence when nothing fits") {
    Fixture f("One two three four five six. Seven eight nine ten eleven twelve.");
    const auto out = extractive_fallback(f.sentences, f.embeddings, 2, 0.95);
    CHECK(count_length(out) == 6);
}

TEST_CASE("extractive_fallback properties") {
    static const char* vocab[] = {"harbor", "ship", "rain", "market", "violin", "engine", "river", "stone",
                                  "cloud",  "bread", "lamp", "forest", "signal", "copper", "garden"};
    std::mt19937_64 rng(5);
    StubEmbedder embedder(128, 0);
    for (int trial = 0; trial < 200; ++trial) {
        std::string text;
        const std::size_t n = 1 + rng() % 15;
        std::vector<std::string> pool;
        for (std::size_t i = 0; i < n; ++i) {
            std::string s;
            const std::size_t len = 1 + rng() % 8;
            for (std::size_t w = 0; w < len; ++w) s += (w ? " " : "") + std::string(vocab[rng() % 15]);
            pool.push_back(s + ".");
        }
        for (std::size_t i = 0; i < n + rng() % 10; ++i) text += pool[rng() % pool.size()] + " ";
        Fixture f(text, 128);
        const std::size_t budget = 1 + rng() % 30;
        const double tau = 0.8 + 0.2 * static_cast<double>(rng() % 100) / 100.0;
        const auto out = extractive_fallback(f.sentences, f.embeddings, budget, tau);

        // determinism
        CHECK(out == extractive_fallback(f.sentences, f.embeddings, budget, tau));

        // budget respect
        const auto kept = split_sentences(out);
        std::size_t longest = 0;
        for (const auto& s : kept) longest = std::max(longest, s.length);
        CHECK(count_length(out) <= std::max(budget, longest));

        // idempotence
        Fixture again(out, 128);
        CHECK(extractive_fallback(again.sentences, again.embeddings, budget, tau) == out);
    }
}

TEST_CASE("compress_chunk passthrough and identity") {
    Fixture f("Short chunk here.");
    SUBCASE("below gamma1 passes through") {
        CompressorSpec spec = kSpec;
        spec.min_input = 10;
        IdentityCompressor identity;
        const auto seg = compress_chunk(f.chunk, spec, identity, f.context());
        CHECK(seg.action_taken == SegmentAction::passthrough);
        CHECK(seg.compressed_text == f.chunk.text);
    }
    SUBCASE("explicit passthrough action") {
        f.chunk.action = ChunkAction::passthrough;
        ExtractiveCompressor extractive;
        const auto seg = compress_chunk(f.chunk, CompressorSpec{CompressorKind::extractive_fallback, 1, 600, 150, 0.95},
                                        extractive, f.context());
        CHECK(seg.action_taken == SegmentAction::passthrough);
        CHECK(seg.compressed_text == f.chunk.text);
    }
    SUBCASE("identity backend") {
        Fixture big("Ships sail at dawn. Markets close at noon. Rain falls in spring.");
        IdentityCompressor identity;
        const auto seg = compress_chunk(big.chunk, kSpec, identity, big.context());
        CHECK(seg.action_taken == SegmentAction::compressed);
        CHECK(seg.compressed_text == big.chunk.text);
        CHECK(seg.compressed_length == seg.original_length);
        CHECK(seg.chunk_id == 3);
        CHECK(seg.min_block_index == 5);
    }
}

TEST_CASE("compress_chunk never expands") {
    Fixture f("Ships sail at dawn. Markets close at noon. Rain falls in spring.");
    ExpandingCompressor expanding;
    const auto seg = compress_chunk(f.chunk, kSpec, expanding, f.context());
    CHECK(seg.compressed_text == f.chunk.text);
    CHECK(seg.compressed_length <= seg.original_length);
    CHECK(!seg.warnings.empty());
}

TEST_CASE("compress_chunk failure ladder") {
    Fixture f(repeat("Ships sail at dawn.", 6) + " Markets close at noon.");
    ThrowingCompressor broken;
    SUBCASE("external failure falls back to extractive") {
        const auto seg = compress_chunk(f.chunk, kSpec, broken, f.context(), 10);
        CHECK(seg.degraded);
        CHECK(seg.produced_by == "extractive_fallback");
        CHECK(seg.compressed_text == "Ships sail at dawn. Markets close at noon.");
    }
    SUBCASE("both failing pass the chunk through with a warning") {
        ChunkContext no_embeddings{f.sentences, {}, nullptr, count_length};
        const auto seg = compress_chunk(f.chunk, kSpec, broken, no_embeddings, 10);
        CHECK(seg.degraded);
        CHECK(seg.action_taken == SegmentAction::passthrough);
        CHECK(seg.compressed_text == f.chunk.text);
        CHECK(seg.warnings.size() >= 2);
    }
    SUBCASE("context can embed on demand") {
        StubEmbedder embedder(256, 0);
        ChunkContext lazy{f.sentences, {}, &embedder, count_length};
        ExtractiveCompressor extractive;
        const auto seg = compress_chunk(f.chunk, kSpec, extractive, lazy, 10);
        CHECK_FALSE(seg.degraded);
        CHECK(seg.compressed_length == 8);
    }
}

TEST_CASE("assemble orders segments and totals lengths") {
    CompressedSegment a{0, 10, "late", 1, SegmentAction::compressed, 3, "x", false, {}};
    CompressedSegment b{1, 20, "early text", 2, SegmentAction::compressed, 0, "x", false, {}};
    const auto doc = assemble({a, b});
    CHECK(doc.segments[0].min_block_index == 0);
    CHECK(doc.segments[1].min_block_index == 3);
    CHECK(doc.text == "early text\nlate");
    CHECK(doc.total_original_length == 30);
    CHECK(doc.total_compressed_length == 3);
    CHECK(doc.realized_ratio == doctest::Approx(0.1));

    CompressedSegment only{0, 4, "a b c d", 4, SegmentAction::passthrough, 0, "passthrough", false, {}};
    const auto single = assemble({only});
    CHECK(single.text == "a b c d");
    CHECK(single.realized_ratio == 1.0);

    CompressedSegment p2{1, 2, "e f", 2, SegmentAction::passthrough, 1, "passthrough", false, {}};
    CHECK(assemble({p2, only}, " | ").text == "a b c d | e f");
    CHECK(assemble({p2, only}).realized_ratio == 1.0);

    CompressedSegment dup = a;
    CHECK_THROWS_AS(assemble({a, dup}), std::invalid_argument);
}

TEST_CASE("allocate_budgets") {
    SUBCASE("plain alpha share when nothing is capped") {
        const std::vector<std::size_t> lengths{400, 500};
        const auto b = allocate_budgets(lengths, lengths, 0.1, 150);
        CHECK(b == std::vector<std::size_t>{40, 50});
    }
    SUBCASE("unused share flows to chunks that need it") {
        const std::vector<std::size_t> lengths{500, 500};
        const std::vector<std::size_t> demands{10, 500};
        const auto b = allocate_budgets(lengths, demands, 0.1, 150);
        CHECK(b[0] == 10);
        CHECK(b[1] == 90);
    }
    SUBCASE("s_max caps every chunk") {
        const std::vector<std::size_t> lengths{1000, 1000};
        const auto b = allocate_budgets(lengths, lengths, 0.5, 150);
        CHECK(b == std::vector<std::size_t>{150, 150});
    }
    SUBCASE("budgets are at least one") {
        const std::vector<std::size_t> lengths{3};
        CHECK(allocate_budgets(lengths, lengths, 0.01, 150) == std::vector<std::size_t>{1});
    }
    const std::vector<std::size_t> two{1, 2};
    const std::vector<std::size_t> one{1};
    CHECK_THROWS_AS(allocate_budgets(two, one, 0.1, 10), std::invalid_argument);
    CHECK_THROWS_AS(allocate_budgets(one, one, 0.0, 10), std::invalid_argument);
}
