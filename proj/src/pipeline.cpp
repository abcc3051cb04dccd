#include "semcomp/pipeline.hpp"

#include "semcomp/gateway.hpp"

#include <algorithm>
#include <chrono>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace semcomp {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;
__extension__ typedef unsigned __int128 u128;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Uses the configured embedder until it fails once, then the stub for the
// rest of the job.
class FailoverEmbedder final : public Embedder {
public:
    FailoverEmbedder(Embedder& primary, std::size_t dim, std::uint64_t seed) : primary_(primary), stub_(dim, seed) {}

    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
        {
            std::lock_guard lock(mutex_);
            if (failed_) return stub_.embed(texts);
        }
        try {
            return primary_.embed(texts);
        } catch (const std::exception& e) {
            std::lock_guard lock(mutex_);
            if (!failed_) {
                failed_ = true;
                warning_ = "embedder " + primary_.name() + " failed (" + e.what() + "); using " + stub_.name();
            }
            return stub_.embed(texts);
        }
    }
    std::string name() const override { return primary_.name(); }

    bool failed() const {
        std::lock_guard lock(mutex_);
        return failed_;
    }
    std::string warning() const {
        std::lock_guard lock(mutex_);
        return warning_;
    }

private:
    Embedder& primary_;
    StubEmbedder stub_;
    mutable std::mutex mutex_;
    bool failed_ = false;
    std::string warning_;
};

std::vector<Sentence> chunk_sentences(const TopicChunk& chunk, std::span<const SentenceBlock> blocks,
                                      std::span<const Sentence> sentences) {
    std::vector<Sentence> out;
    for (std::size_t b : chunk.block_indices) {
        const auto span = blocks[b].sentence_span;
        for (std::size_t i = span.begin; i < span.end; ++i) out.push_back(sentences[i]);
    }
    return out;
}

template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : threads) t.join();
}

}  // namespace

void PipelineConfig::validate() const {
    if (target_block_len == 0) throw std::invalid_argument("target_block_len must be at least 1");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
    if (gamma1 >= gamma2) throw std::invalid_argument("gamma1 must be below gamma2");
    if (s_max == 0 || s_max > gamma2) throw std::invalid_argument("s_max must be in [1, gamma2]");
    if (max_depth == 0) throw std::invalid_argument("max_depth must be at least 1");
    if (k && *k == 0) throw std::invalid_argument("k must be at least 1");
    if (embedder != "stub" && embedder != "gateway") {
        throw std::invalid_argument("unknown embedder '" + embedder + "' (expected stub or gateway)");
    }
    if (embed_dim < 8) throw std::invalid_argument("embed_dim must be at least 8");
    parse_compressor_kind(compressor);
    if (!(dedup_threshold > 0.0 && dedup_threshold <= 1.0)) {
        throw std::invalid_argument("dedup_threshold must be in (0, 1]");
    }
    find_length_counter(length_unit);
    if (gateway_timeout_ms <= 0) throw std::invalid_argument("gateway_timeout_ms must be positive");
}

CompressorSpec PipelineConfig::compressor_spec() const {
    return CompressorSpec{parse_compressor_kind(compressor), gamma1, gamma2, s_max, dedup_threshold};
}

PlanConfig PipelineConfig::plan_config(std::size_t cluster_count) const {
    return PlanConfig{gamma1, gamma2, max_depth, cluster_count, contiguous_chunks};
}

PipelineConfig config_from_json(const json& object, PipelineConfig base) {
    if (!object.is_object()) throw std::invalid_argument("config must be a flat JSON object");
    for (const auto& [key, value] : object.items()) {
        try {
            if (key == "target_block_len") base.target_block_len = value.get<std::size_t>();
            else if (key == "gamma1") base.gamma1 = value.get<std::size_t>();
            else if (key == "gamma2") base.gamma2 = value.get<std::size_t>();
            else if (key == "alpha") base.alpha = value.get<double>();
            else if (key == "s_max") base.s_max = value.get<std::size_t>();
            else if (key == "max_depth") base.max_depth = value.get<std::size_t>();
            else if (key == "contiguous_chunks") base.contiguous_chunks = value.get<bool>();
            else if (key == "k") base.k = value.is_null() ? std::nullopt : std::optional(value.get<std::size_t>());
            else if (key == "embedder") base.embedder = value.get<std::string>();
            else if (key == "embed_dim") base.embed_dim = value.get<std::size_t>();
            else if (key == "compressor") base.compressor = value.get<std::string>();
            else if (key == "dedup_threshold") base.dedup_threshold = value.get<double>();
            else if (key == "seed") base.seed = value.get<std::uint64_t>();
            else if (key == "passthrough_threshold") base.passthrough_threshold = value.get<std::size_t>();
            else if (key == "separator") base.separator = value.get<std::string>();
            else if (key == "length_unit") base.length_unit = value.get<std::string>();
            else if (key == "workers") base.workers = value.get<std::size_t>();
            else if (key == "record_timings") base.record_timings = value.get<bool>();
            else if (key == "gateway_url") base.gateway_url = value.get<std::string>();
            else if (key == "gateway_timeout_ms") base.gateway_timeout_ms = value.get<int>();
            else throw std::invalid_argument("unknown config key '" + key + "'");
        } catch (const json::exception& e) {
            throw std::invalid_argument("config key '" + key + "' has the wrong type: " + e.what());
        }
    }
    return base;
}

json to_json(const PipelineConfig& c) {
    return json{{"target_block_len", c.target_block_len},
                {"gamma1", c.gamma1},
                {"gamma2", c.gamma2},
                {"alpha", c.alpha},
                {"s_max", c.s_max},
                {"max_depth", c.max_depth},
                {"contiguous_chunks", c.contiguous_chunks},
                {"k", c.k ? json(*c.k) : json(nullptr)},
                {"embedder", c.embedder},
                {"embed_dim", c.embed_dim},
                {"compressor", c.compressor},
                {"dedup_threshold", c.dedup_threshold},
                {"seed", c.seed},
                {"passthrough_threshold", c.passthrough_threshold},
                {"separator", c.separator},
                {"length_unit", c.length_unit}};
}

CostReport complexity_report(std::span<const std::size_t> chunk_lengths, double alpha, std::size_t gamma1,
                             std::size_t gamma2) {
    if (chunk_lengths.empty()) throw std::invalid_argument("complexity_report: no chunk lengths");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("complexity_report: alpha must be in (0, 1]");
    if (gamma1 == 0) throw std::invalid_argument("complexity_report: gamma1 must be positive");

    CostReport r;
    r.chunk_lengths.assign(chunk_lengths.begin(), chunk_lengths.end());
    r.alpha = alpha;
    r.gamma1 = gamma1;
    r.gamma2 = gamma2;
    r.lengths_within_bounds = true;
    u128 sum_sq = 0;
    for (std::size_t l : chunk_lengths) {
        if (l == 0) throw std::invalid_argument("complexity_report: chunk lengths must be positive");
        r.total_length += l;
        sum_sq += static_cast<u128>(l) * l;
        if (l < gamma1 || l > gamma2) r.lengths_within_bounds = false;
    }
    const double L = static_cast<double>(r.total_length);
    const double g1 = static_cast<double>(gamma1);
    const double g2 = static_cast<double>(gamma2);
    r.sum_sq = static_cast<double>(sum_sq);
    r.compress_bound = g2 * g2 / g1 * L;
    r.inference_cost = alpha * alpha * L * L;
    r.total_bound = r.compress_bound + r.inference_cost;
    // sum_sq <= gamma2^2 / gamma1 * L  <=>  sum_sq * gamma1 <= gamma2^2 * L, in integers.
    const u128 lhs = sum_sq * gamma1;
    const u128 rhs = static_cast<u128>(gamma2) * gamma2 * r.total_length;
    r.bound_satisfied = lhs <= rhs;
    return r;
}

json to_json(const CostReport& r) {
    return json{{"L", r.total_length},
                {"chunk_lengths", r.chunk_lengths},
                {"alpha", r.alpha},
                {"gamma1", r.gamma1},
                {"gamma2", r.gamma2},
                {"sum_sq", r.sum_sq},
                {"compress_bound", r.compress_bound},
                {"inference_cost", r.inference_cost},
                {"total_bound", r.total_bound},
                {"bound_satisfied", r.bound_satisfied},
                {"lengths_within_bounds", r.lengths_within_bounds},
                {"units", "model cost units"}};
}

BackendSet make_backends(const PipelineConfig& config) {
    config.validate();
    GatewayOptions gw;
    gw.url = config.gateway_url;
    gw.timeout_ms = config.gateway_timeout_ms;

    BackendSet set;
    if (config.embedder == "gateway") {
        set.embedder = std::make_unique<GatewayEmbedder>(gw);
    } else {
        set.embedder = std::make_unique<StubEmbedder>(config.embed_dim, config.seed);
    }
    switch (parse_compressor_kind(config.compressor)) {
        case CompressorKind::external_abstractive:
            set.compressor = std::make_unique<GatewayCompressor>(gw);
            break;
        case CompressorKind::extractive_fallback:
            set.compressor = std::make_unique<ExtractiveCompressor>(config.dedup_threshold);
            break;
        case CompressorKind::identity:
            set.compressor = std::make_unique<IdentityCompressor>();
            break;
    }
    return set;
}

PipelineResult compress_document(std::string_view text, const PipelineConfig& config, const Backends& backends) {
    config.validate();
    if (backends.embedder == nullptr || backends.compressor == nullptr) {
        throw std::invalid_argument("compress_document: missing backend");
    }
    if (normalize_whitespace(text).empty()) throw std::invalid_argument("compress_document: empty input");

    const auto started = Clock::now();
    const LengthCounter counter = find_length_counter(config.length_unit);
    const CompressorSpec spec = config.compressor_spec();

    PipelineResult result;
    result.input_length = counter(text);

    if (result.input_length <= config.passthrough_threshold) {
        CompressedSegment seg;
        seg.original_length = result.input_length;
        seg.compressed_text = std::string(text);
        seg.compressed_length = result.input_length;
        seg.action_taken = SegmentAction::passthrough;
        seg.produced_by = "passthrough";
        result.document = assemble({seg}, config.separator);
        result.chunks.push_back(ChunkRecord{0, {}, result.input_length, ChunkAction::passthrough, 0, 0,
                                            result.input_length});
        const std::size_t lengths[] = {result.input_length};
        result.cost = complexity_report(lengths, config.alpha, config.gamma1, config.gamma2);
        result.output_length = result.document.total_compressed_length;
        result.ratio = result.document.realized_ratio;
        if (config.record_timings) result.timings_ms["total"] = elapsed_ms(started);
        return result;
    }

    FailoverEmbedder embedder(*backends.embedder, config.embed_dim, config.seed);

    auto stage = Clock::now();
    const auto sentences = split_sentences(text, counter);
    const auto blocks = build_blocks(sentences, config.target_block_len);
    result.block_count = blocks.size();
    if (config.record_timings) result.timings_ms["segment"] = elapsed_ms(stage);

    stage = Clock::now();
    std::vector<std::string> block_texts;
    block_texts.reserve(blocks.size());
    for (const auto& b : blocks) block_texts.push_back(b.text);
    const auto block_vectors = embedder.embed(block_texts);
    if (block_vectors.size() != blocks.size()) throw std::runtime_error("embedder returned the wrong number of vectors");
    const SimilarityGraph graph = build_graph(block_vectors);
    if (config.record_timings) result.timings_ms["embed"] = elapsed_ms(stage);

    stage = Clock::now();
    const std::size_t k = config.k ? std::min(*config.k, blocks.size())
                                   : choose_cluster_count(result.input_length, config.alpha, config.s_max,
                                                          blocks.size());
    result.cluster_count = k;
    const ChunkPlan plan = plan_chunks(blocks, graph, config.plan_config(k));
    result.plan_depth = plan.depth();
    const auto leaves = flatten(plan);
    if (config.record_timings) result.timings_ms["plan"] = elapsed_ms(stage);

    stage = Clock::now();
    std::vector<std::vector<Sentence>> leaf_sentences(leaves.size());
    for (std::size_t i = 0; i < leaves.size(); ++i) leaf_sentences[i] = chunk_sentences(leaves[i], blocks, sentences);

    // Sentence embeddings for the extractive compressor, in one batch.
    std::vector<std::vector<EmbeddingVector>> leaf_embeddings(leaves.size());
    const bool extractive = backends.compressor->kind() == CompressorKind::extractive_fallback;
    if (extractive) {
        std::vector<std::string> texts;
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            if (leaves[i].action != ChunkAction::compress) continue;
            for (const auto& s : leaf_sentences[i]) texts.push_back(s.text);
        }
        auto vectors = embedder.embed(texts);
        if (vectors.size() != texts.size()) throw std::runtime_error("embedder returned the wrong number of vectors");
        std::size_t next = 0;
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            if (leaves[i].action != ChunkAction::compress) continue;
            for (std::size_t s = 0; s < leaf_sentences[i].size(); ++s) {
                leaf_embeddings[i].push_back(std::move(vectors[next++]));
            }
        }
    }

    std::vector<std::size_t> compress_idx;
    std::vector<std::size_t> lengths;
    std::vector<std::size_t> demands;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (leaves[i].action != ChunkAction::compress) continue;
        compress_idx.push_back(i);
        lengths.push_back(leaves[i].length);
        if (extractive) {
            std::size_t demand = 0;
            for (std::size_t s : dedup_sentences(leaf_embeddings[i], config.dedup_threshold)) {
                demand += leaf_sentences[i][s].length;
            }
            demands.push_back(demand);
        } else {
            demands.push_back(leaves[i].length);
        }
    }
    std::vector<std::size_t> budgets(leaves.size(), 0);
    if (!compress_idx.empty()) {
        const auto allocated = allocate_budgets(lengths, demands, config.alpha, config.s_max);
        for (std::size_t j = 0; j < compress_idx.size(); ++j) budgets[compress_idx[j]] = allocated[j];
    }

    std::vector<CompressedSegment> segments(leaves.size());
    parallel_for(leaves.size(), config.workers, [&](std::size_t i) {
        ChunkContext ctx{leaf_sentences[i], leaf_embeddings[i], &embedder, counter};
        segments[i] = compress_chunk(leaves[i], spec, *backends.compressor, ctx,
                                     budgets[i] == 0 ? std::nullopt : std::optional(budgets[i]));
    });
    if (config.record_timings) result.timings_ms["compress"] = elapsed_ms(stage);

    std::vector<std::size_t> leaf_lengths;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        const auto& leaf = leaves[i];
        const auto& seg = segments[i];
        result.chunks.push_back(ChunkRecord{leaf.chunk_id, leaf.block_indices, leaf.length, leaf.action, leaf.depth,
                                            budgets[i], seg.compressed_length});
        leaf_lengths.push_back(leaf.length);
        if (seg.degraded) result.degraded = true;
        for (const auto& w : seg.warnings) result.warnings.push_back(w);
    }
    if (embedder.failed()) {
        result.degraded = true;
        result.warnings.insert(result.warnings.begin(), embedder.warning());
    }

    result.document = assemble(std::move(segments), config.separator);
    result.cost = complexity_report(leaf_lengths, config.alpha, config.gamma1, config.gamma2);
    result.output_length = result.document.total_compressed_length;
    result.ratio = result.document.realized_ratio;
    if (config.record_timings) result.timings_ms["total"] = elapsed_ms(started);
    return result;
}

json run_report(const PipelineResult& r) {
    json chunks = json::array();
    for (const auto& c : r.chunks) {
        chunks.push_back(json{{"id", c.id},
                              {"blocks", c.blocks},
                              {"length", c.length},
                              {"action", to_string(c.action)},
                              {"depth", c.depth},
                              {"budget", c.budget},
                              {"compressed_length", c.compressed_length}});
    }
    json timings = json::object();
    for (const auto& [name, ms] : r.timings_ms) timings[name] = ms;
    const auto& cost = r.cost;
    return json{{"input_length", r.input_length},
                {"output_length", r.output_length},
                {"ratio", r.ratio},
                {"block_count", r.block_count},
                {"cluster_count", r.cluster_count},
                {"plan_depth", r.plan_depth},
                {"chunks", std::move(chunks)},
                {"cost",
                 {{"L", cost.total_length},
                  {"sum_sq", cost.sum_sq},
                  {"compress_bound", cost.compress_bound},
                  {"inference_cost", cost.inference_cost},
                  {"total_bound", cost.total_bound},
                  {"bound_satisfied", cost.bound_satisfied},
                  {"lengths_within_bounds", cost.lengths_within_bounds},
                  {"units", "model cost units"}}},
                {"degraded", r.degraded},
                {"warnings", r.warnings},
                {"timings_ms", std::move(timings)}};
}

}  // namespace semcomp
