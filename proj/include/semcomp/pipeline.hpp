#pragma once

#include "semcomp/chunking.hpp"
#include "semcomp/compression.hpp"
#include "semcomp/embedder.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semcomp {

struct PipelineConfig {
    std::size_t target_block_len = 64;
    std::size_t gamma1 = 60;
    std::size_t gamma2 = 600;
    double alpha = 0.15;
    std::size_t s_max = 150;
    std::size_t max_depth = 3;
    bool contiguous_chunks = false;
    /// Fixed root cluster count; chosen from alpha and s_max when unset.
    std::optional<std::size_t> k;
    std::string embedder = "stub";    // "stub" or "gateway"
    std::size_t embed_dim = 512;      // stub embedder only
    std::string compressor = "fallback";
    double dedup_threshold = 0.95;
    std::uint64_t seed = 0;
    /// Inputs no longer than this are returned unchanged.
    std::size_t passthrough_threshold = 4096;
    std::string separator = "\n";
    std::string length_unit = "words";
    std::size_t workers = 1;
    bool record_timings = false;
    std::string gateway_url = "http://127.0.0.1:8080";
    int gateway_timeout_ms = 30000;

    void validate() const;
    CompressorSpec compressor_spec() const;
    PlanConfig plan_config(std::size_t k) const;
};

/// Reads keys named exactly like the PipelineConfig fields from a flat JSON
/// object on top of `base`. Unknown keys and wrong types throw.
PipelineConfig config_from_json(const nlohmann::json& object, PipelineConfig base = {});
nlohmann::json to_json(const PipelineConfig& config);

/// Model-cost accounting for a divide-and-conquer run. All costs are in
/// "model cost units", not seconds.
struct CostReport {
    std::size_t total_length = 0;  // L = sum of chunk lengths
    std::vector<std::size_t> chunk_lengths;
    double alpha = 0.0;
    std::size_t gamma1 = 0;
    std::size_t gamma2 = 0;
    double sum_sq = 0.0;          // sum l_i^2
    double compress_bound = 0.0;  // gamma2^2 / gamma1 * L
    double inference_cost = 0.0;  // alpha^2 L^2
    double total_bound = 0.0;     // compress_bound + inference_cost
    bool bound_satisfied = false; // sum_sq <= compress_bound, compared exactly
    bool lengths_within_bounds = false;
};

CostReport complexity_report(std::span<const std::size_t> chunk_lengths, double alpha, std::size_t gamma1,
                             std::size_t gamma2);
nlohmann::json to_json(const CostReport& report);

struct Backends {
    Embedder* embedder = nullptr;
    Compressor* compressor = nullptr;
};

/// Owns the backends named by a config.
struct BackendSet {
    std::unique_ptr<Embedder> embedder;
    std::unique_ptr<Compressor> compressor;

    Backends view() const { return {embedder.get(), compressor.get()}; }
};

BackendSet make_backends(const PipelineConfig& config);

struct ChunkRecord {
    std::size_t id = 0;
    std::vector<std::size_t> blocks;
    std::size_t length = 0;
    ChunkAction action = ChunkAction::compress;
    std::size_t depth = 0;
    std::size_t budget = 0;
    std::size_t compressed_length = 0;
};

struct PipelineResult {
    CompressedDocument document;
    CostReport cost;
    std::vector<ChunkRecord> chunks;
    std::size_t input_length = 0;
    std::size_t output_length = 0;
    double ratio = 1.0;
    std::size_t block_count = 0;
    std::size_t cluster_count = 0;
    std::size_t plan_depth = 0;
    bool degraded = false;
    std::vector<std::string> warnings;
    std::map<std::string, double> timings_ms;
};

/// text -> sentences -> blocks -> similarity graph -> chunk plan ->
/// per-chunk compression -> assembly. Inputs at or below the passthrough
/// threshold come back unchanged. Backend failures degrade the affected
/// chunks and are listed in the result instead of aborting.
PipelineResult compress_document(std::string_view text, const PipelineConfig& config, const Backends& backends);

/// The machine-readable run report.
nlohmann::json run_report(const PipelineResult& result);

}  // namespace semcomp
