#pragma once

// Client side of the model-gateway wire protocol:
//   POST /embed      {"texts": [...]}                       -> {"vectors": [[...]], "dim": n}
//   POST /summarize  {"text": s, "max_len": m, "min_len": n} -> {"summary", "input_len", "output_len"}
//   GET  /health                                            -> {"status", "models": {...}, "dim"}

#include "semcomp/compression.hpp"
#include "semcomp/embedder.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semcomp {

class GatewayError : public std::runtime_error {
public:
    /// status 0 means the request never got an HTTP response.
    GatewayError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

struct GatewayOptions {
    std::string url = "http://127.0.0.1:8080";
    int timeout_ms = 30000;
    std::size_t batch_cap = 256;
};

/// Applies SEMCOMP_GATEWAY_URL and SEMCOMP_GATEWAY_TIMEOUT_MS on top of `base`.
GatewayOptions gateway_options_from_env(GatewayOptions base = {});

struct EmbedResponse {
    std::vector<EmbeddingVector> vectors;
    std::size_t dim = 0;
};

struct SummarizeResponse {
    std::string summary;
    std::size_t input_len = 0;
    std::size_t output_len = 0;
};

struct HealthResponse {
    std::string status;
    std::string embedder;
    std::string summarizer;
    std::size_t dim = 0;
};

class GatewayClient {
public:
    explicit GatewayClient(GatewayOptions options) : options_(std::move(options)) {}

    const GatewayOptions& options() const { return options_; }

    /// One POST /embed with exactly these texts.
    EmbedResponse embed_batch(std::span<const std::string> texts) const;
    /// Splits into batches of at most batch_cap, sends them concurrently and
    /// returns vectors in input order.
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const;
    SummarizeResponse summarize(std::string_view text, std::size_t max_len, std::size_t min_len) const;
    HealthResponse health() const;

private:
    GatewayOptions options_;
};

class GatewayEmbedder final : public Embedder {
public:
    explicit GatewayEmbedder(GatewayOptions options) : client_(std::move(options)) {}
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override { return client_.embed(texts); }
    std::string name() const override { return "gateway:" + client_.options().url; }

private:
    GatewayClient client_;
};

/// Abstractive compression through POST /summarize. Summaries are truncated
/// to the word budget on receipt.
class GatewayCompressor final : public Compressor {
public:
    explicit GatewayCompressor(GatewayOptions options) : client_(std::move(options)) {}
    std::string compress(const TopicChunk& chunk, const ChunkContext& context, std::size_t budget) override;
    CompressorKind kind() const override { return CompressorKind::external_abstractive; }

private:
    GatewayClient client_;
};

/// Keeps the longest prefix of whole sentences within `budget` words, or the
/// first `budget` words when even the first sentence is too long.
std::string truncate_to_budget(std::string_view text, std::size_t budget);

struct ConformanceCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Protocol conformance suite against a live gateway: health identities,
/// order preservation, unit norms, empty-text rule, batch cap, summary cap,
/// deterministic decoding and the min_len > max_len rejection.
std::vector<ConformanceCheck> run_conformance(const GatewayClient& client);

}  // namespace semcomp
