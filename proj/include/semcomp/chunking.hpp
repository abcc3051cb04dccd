#pragma once

#include "semcomp/segmentation.hpp"
#include "semcomp/similarity.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace semcomp {

struct ClusterAssignment {
    /// One label per block, in [0, k). Labels are numbered in order of each
    /// cluster's smallest member index.
    std::vector<std::size_t> labels;
    std::size_t k = 0;
};

/// Agglomerative clustering with average linkage over d = 1 - weight, merging
/// until k clusters remain. Among equally distant pairs the one with the
/// lexicographically smallest (min member, min member) wins.
ClusterAssignment cluster_blocks(const SimilarityGraph& graph, std::size_t k);

enum class ChunkAction { compress, passthrough };

std::string to_string(ChunkAction action);

struct TopicChunk {
    std::size_t chunk_id = 0;
    std::vector<std::size_t> block_indices;  // strictly ascending
    std::string text;
    std::size_t length = 0;
    std::size_t depth = 0;
    ChunkAction action = ChunkAction::compress;

    std::size_t min_block_index() const { return block_indices.front(); }
};

/// One chunk per cluster, ordered by smallest block index. Chunk ids are the
/// positions in that order. Throws std::invalid_argument when the assignment
/// does not match the blocks or does not use exactly k labels.
std::vector<TopicChunk> form_chunks(const ClusterAssignment& assignment,
                                    std::span<const SentenceBlock> blocks);

struct ChunkNode {
    TopicChunk chunk;
    std::vector<ChunkNode> children;

    bool is_leaf() const { return children.empty(); }
};

struct PlanConfig {
    std::size_t gamma1 = 60;
    std::size_t gamma2 = 600;
    std::size_t max_depth = 3;
    std::size_t k = 1;
    bool contiguous_chunks = false;

    void validate() const;
};

struct ChunkPlan {
    std::vector<ChunkNode> roots;  // ordered by smallest block index
    std::size_t gamma1 = 0;
    std::size_t gamma2 = 0;
    std::size_t max_depth = 0;

    /// Number of tree levels (1 when no chunk was re-clustered).
    std::size_t depth() const;
};

/// Clusters the blocks into k topic chunks, re-clustering any chunk longer
/// than gamma2 with k' = ceil(length / gamma2) on its induced sub-graph. At the
/// deepest allowed level an oversize chunk is replaced by greedy block-boundary
/// pieces of length <= gamma2. Leaves shorter than gamma1 are passthrough.
ChunkPlan plan_chunks(std::span<const SentenceBlock> blocks, const SimilarityGraph& graph,
                      const PlanConfig& config);

/// Leaves in original document order.
std::vector<TopicChunk> flatten(const ChunkPlan& plan);

/// clamp(ceil(alpha * total_len / s_max), 1, n_blocks).
std::size_t choose_cluster_count(std::size_t total_len, double alpha, std::size_t s_max,
                                 std::size_t n_blocks);

}  // namespace semcomp
