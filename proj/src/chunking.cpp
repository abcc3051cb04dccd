#include "semcomp/chunking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace semcomp {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Chunk over the given (ascending) global block indices.
TopicChunk make_chunk(std::vector<std::size_t> block_indices, std::span<const SentenceBlock> blocks,
                      std::size_t depth) {
    TopicChunk chunk;
    chunk.block_indices = std::move(block_indices);
    chunk.depth = depth;
    for (std::size_t b : chunk.block_indices) {
        if (!chunk.text.empty()) chunk.text.push_back(' ');
        chunk.text += blocks[b].text;
        chunk.length += blocks[b].length;
    }
    return chunk;
}

std::vector<std::vector<std::size_t>> split_into_runs(const std::vector<std::size_t>& indices) {
    std::vector<std::vector<std::size_t>> runs;
    for (std::size_t b : indices) {
        if (runs.empty() || runs.back().back() + 1 != b) runs.emplace_back();
        runs.back().push_back(b);
    }
    return runs;
}

std::vector<TopicChunk> greedy_split(const TopicChunk& chunk, std::span<const SentenceBlock> blocks,
                                     std::size_t gamma2) {
    std::vector<std::vector<std::size_t>> pieces;
    std::size_t current_len = 0;
    for (std::size_t b : chunk.block_indices) {
        if (pieces.empty() || current_len + blocks[b].length > gamma2) {
            pieces.emplace_back();
            current_len = 0;
        }
        pieces.back().push_back(b);
        current_len += blocks[b].length;
    }
    std::vector<TopicChunk> out;
    out.reserve(pieces.size());
    for (auto& p : pieces) out.push_back(make_chunk(std::move(p), blocks, chunk.depth));
    return out;
}

struct Planner {
    std::span<const SentenceBlock> blocks;
    const SimilarityGraph& graph;
    const PlanConfig& config;

    std::vector<ChunkNode> build_level(const std::vector<std::size_t>& nodes, std::size_t k,
                                       std::size_t depth) const {
        const SimilarityGraph sub = graph.induced(nodes);
        const ClusterAssignment assignment = cluster_blocks(sub, std::min(k, nodes.size()));

        std::vector<std::vector<std::size_t>> groups(assignment.k);
        for (std::size_t local = 0; local < nodes.size(); ++local) {
            groups[assignment.labels[local]].push_back(nodes[local]);
        }
        if (config.contiguous_chunks) {
            std::vector<std::vector<std::size_t>> runs;
            for (const auto& g : groups) {
                for (auto& r : split_into_runs(g)) runs.push_back(std::move(r));
            }
            groups = std::move(runs);
        }
        std::sort(groups.begin(), groups.end(),
                  [](const auto& a, const auto& b) { return a.front() < b.front(); });

        std::vector<ChunkNode> level;
        for (auto& g : groups) {
            ChunkNode node{make_chunk(std::move(g), blocks, depth), {}};
            const bool oversize = node.chunk.length > config.gamma2 && node.chunk.block_indices.size() > 1;
            if (!oversize) {
                level.push_back(std::move(node));
            } else if (depth + 1 < config.max_depth) {
                const std::size_t sub_k = (node.chunk.length + config.gamma2 - 1) / config.gamma2;
                node.children = build_level(node.chunk.block_indices, sub_k, depth + 1);
                level.push_back(std::move(node));
            } else {
                for (auto& piece : greedy_split(node.chunk, blocks, config.gamma2)) {
                    level.push_back(ChunkNode{std::move(piece), {}});
                }
            }
        }
        return level;
    }
};

void finalize(std::vector<ChunkNode>& nodes, std::size_t gamma1, std::size_t& next_id) {
    for (auto& node : nodes) {
        node.chunk.chunk_id = next_id++;
        node.chunk.action = node.chunk.length < gamma1 ? ChunkAction::passthrough : ChunkAction::compress;
        finalize(node.children, gamma1, next_id);
    }
}

std::size_t depth_of(const std::vector<ChunkNode>& nodes) {
    std::size_t d = 0;
    for (const auto& n : nodes) d = std::max(d, 1 + depth_of(n.children));
    return d;
}

void collect_leaves(const std::vector<ChunkNode>& nodes, std::vector<TopicChunk>& out) {
    for (const auto& n : nodes) {
        if (n.is_leaf()) {
            out.push_back(n.chunk);
        } else {
            collect_leaves(n.children, out);
        }
    }
}

}  // namespace

std::string to_string(ChunkAction action) {
    return action == ChunkAction::compress ? "compress" : "passthrough";
}

ClusterAssignment cluster_blocks(const SimilarityGraph& graph, std::size_t k) {
    const std::size_t n = graph.size();
    if (k == 0) throw std::invalid_argument("cluster_blocks: k must be at least 1");
    if (k > n) {
        throw std::invalid_argument("cluster_blocks: k=" + std::to_string(k) + " exceeds node count " +
                                    std::to_string(n));
    }

    // Each cluster lives in the slot of its smallest member; dist_sum holds the
    // summed pairwise distances between clusters.
    std::vector<double> dist_sum(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) dist_sum[i * n + j] = 1.0 - graph.weight(i, j);
    }
    std::vector<std::size_t> cluster_size(n, 1);
    std::vector<bool> active(n, true);
    std::vector<std::size_t> slot_of(n);
    std::iota(slot_of.begin(), slot_of.end(), std::size_t{0});

    auto average = [&](std::size_t a, std::size_t b) {
        return dist_sum[a * n + b] / (static_cast<double>(cluster_size[a]) * static_cast<double>(cluster_size[b]));
    };

    // Nearest partner of each slot among active slots with a larger index.
    std::vector<std::size_t> best(n, kNone);
    std::vector<double> best_dist(n, 0.0);
    auto refresh = [&](std::size_t i) {
        best[i] = kNone;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!active[j]) continue;
            const double d = average(i, j);
            if (best[i] == kNone || d < best_dist[i]) {
                best[i] = j;
                best_dist[i] = d;
            }
        }
    };
    for (std::size_t i = 0; i < n; ++i) refresh(i);

    for (std::size_t clusters = n; clusters > k; --clusters) {
        std::size_t a = kNone;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i] || best[i] == kNone) continue;
            if (a == kNone || best_dist[i] < best_dist[a]) a = i;
        }
        const std::size_t b = best[a];

        for (std::size_t x = 0; x < n; ++x) {
            if (!active[x] || x == a || x == b) continue;
            const double merged = dist_sum[a * n + x] + dist_sum[b * n + x];
            dist_sum[a * n + x] = merged;
            dist_sum[x * n + a] = merged;
        }
        cluster_size[a] += cluster_size[b];
        active[b] = false;
        for (std::size_t m = 0; m < n; ++m) {
            if (slot_of[m] == b) slot_of[m] = a;
        }

        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            if (i == a || best[i] == a || best[i] == b) {
                refresh(i);
            } else if (i < a) {
                const double d = average(i, a);
                if (d < best_dist[i] || (d == best_dist[i] && a < best[i])) {
                    best[i] = a;
                    best_dist[i] = d;
                }
            }
        }
    }

    std::vector<std::size_t> label_of_slot(n, kNone);
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (active[i]) label_of_slot[i] = next++;
    }
    ClusterAssignment out;
    out.k = k;
    out.labels.resize(n);
    for (std::size_t m = 0; m < n; ++m) out.labels[m] = label_of_slot[slot_of[m]];
    return out;
}

std::vector<TopicChunk> form_chunks(const ClusterAssignment& assignment, std::span<const SentenceBlock> blocks) {
    if (assignment.labels.size() != blocks.size()) {
        throw std::invalid_argument("form_chunks: " + std::to_string(assignment.labels.size()) + " labels for " +
                                    std::to_string(blocks.size()) + " blocks");
    }
    std::vector<std::vector<std::size_t>> groups(assignment.k);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const std::size_t label = assignment.labels[b];
        if (label >= assignment.k) throw std::invalid_argument("form_chunks: label out of range");
        groups[label].push_back(b);
    }
    for (const auto& g : groups) {
        if (g.empty()) throw std::invalid_argument("form_chunks: assignment does not use all k labels");
    }
    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });

    std::vector<TopicChunk> chunks;
    chunks.reserve(groups.size());
    for (auto& g : groups) {
        TopicChunk c = make_chunk(std::move(g), blocks, 0);
        c.chunk_id = chunks.size();
        chunks.push_back(std::move(c));
    }
    return chunks;
}

void PlanConfig::validate() const {
    if (gamma1 >= gamma2) {
        throw std::invalid_argument("invalid chunk bounds: gamma1 (" + std::to_string(gamma1) +
                                    ") must be below gamma2 (" + std::to_string(gamma2) + ")");
    }
    if (max_depth < 1) throw std::invalid_argument("max_depth must be at least 1");
    if (k < 1) throw std::invalid_argument("cluster count must be at least 1");
}

std::size_t ChunkPlan::depth() const { return depth_of(roots); }

ChunkPlan plan_chunks(std::span<const SentenceBlock> blocks, const SimilarityGraph& graph, const PlanConfig& config) {
    config.validate();
    if (blocks.empty()) throw std::invalid_argument("plan_chunks: no blocks");
    if (graph.size() != blocks.size()) throw std::invalid_argument("plan_chunks: graph size does not match blocks");

    std::vector<std::size_t> all(blocks.size());
    std::iota(all.begin(), all.end(), std::size_t{0});

    ChunkPlan plan;
    plan.gamma1 = config.gamma1;
    plan.gamma2 = config.gamma2;
    plan.max_depth = config.max_depth;
    plan.roots = Planner{blocks, graph, config}.build_level(all, config.k, 0);
    std::size_t next_id = 0;
    finalize(plan.roots, config.gamma1, next_id);
    return plan;
}

std::vector<TopicChunk> flatten(const ChunkPlan& plan) {
    std::vector<TopicChunk> leaves;
    collect_leaves(plan.roots, leaves);
    std::stable_sort(leaves.begin(), leaves.end(),
                     [](const TopicChunk& a, const TopicChunk& b) { return a.min_block_index() < b.min_block_index(); });
    return leaves;
}

std::size_t choose_cluster_count(std::size_t total_len, double alpha, std::size_t s_max, std::size_t n_blocks) {
    if (total_len == 0) throw std::invalid_argument("choose_cluster_count: total length must be positive");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("choose_cluster_count: alpha must be in (0, 1]");
    if (s_max == 0) throw std::invalid_argument("choose_cluster_count: s_max must be positive");
    if (n_blocks == 0) throw std::invalid_argument("choose_cluster_count: no blocks");
    const double raw = alpha * static_cast<double>(total_len) / static_cast<double>(s_max);
    const auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    return std::clamp<std::size_t>(k, 1, n_blocks);
}

}  // namespace semcomp
