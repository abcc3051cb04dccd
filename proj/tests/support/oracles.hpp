#pragma once

// Reference implementations used only by tests. They deliberately share no
// code with the library paths they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

namespace semcomp::testing {

/// Average-linkage agglomeration straight from the definition: every step
/// recomputes every inter-cluster average from raw distances and merges the
/// closest pair, ties to the smallest (min member, min member).
inline std::vector<std::vector<std::size_t>> brute_force_average_linkage(const std::vector<std::vector<double>>& weights,
                                                                       std::size_t k) {
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < weights.size(); ++i) clusters.push_back({i});
    while (clusters.size() > k) {
        std::size_t best_p = 0, best_q = 0;
        double best = 0.0;
        bool have = false;
        for (std::size_t p = 0; p < clusters.size(); ++p) {
            for (std::size_t q = p + 1; q < clusters.size(); ++q) {
                double sum = 0.0;
                for (std::size_t a : clusters[p]) {
                    for (std::size_t b : clusters[q]) sum += 1.0 - weights[a][b];
                }
                const double avg = sum / static_cast<double>(clusters[p].size() * clusters[q].size());
                // clusters stay sorted by min member, so (p, q) order is the tie order
                if (!have || avg < best) {
                    have = true;
                    best = avg;
                    best_p = p;
                    best_q = q;
                }
            }
        }
        clusters[best_p].insert(clusters[best_p].end(), clusters[best_q].begin(), clusters[best_q].end());
        std::sort(clusters[best_p].begin(), clusters[best_p].end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_q));
        std::sort(clusters.begin(), clusters.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
    }
    return clusters;
}

/// Partition as sorted member lists, ordered by smallest member.
inline std::vector<std::vector<std::size_t>> partition_from_labels(const std::vector<std::size_t>& labels) {
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [label, members] : groups) out.push_back(members);
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
    return out;
}

inline double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    const double n = static_cast<double>(a.size());
    std::map<std::pair<std::size_t, std::size_t>, double> table;
    std::map<std::size_t, double> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[{a[i], b[i]}] += 1;
        rows[a[i]] += 1;
        cols[b[i]] += 1;
    }
    auto c2 = [](double x) { return x * (x - 1) / 2; };
    double index = 0, sum_rows = 0, sum_cols = 0;
    for (const auto& [key, v] : table) index += c2(v);
    for (const auto& [key, v] : rows) sum_rows += c2(v);
    for (const auto& [key, v] : cols) sum_cols += c2(v);
    const double expected = sum_rows * sum_cols / c2(n);
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

}  // namespace semcomp::testing
