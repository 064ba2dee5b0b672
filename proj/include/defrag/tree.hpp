/*
 * Copyright 2026 The defrag Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
 * with the License. You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under the License is distributed
 * on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the License for
 * the specific language governing permissions and limitations under the License.
 */

#ifndef DEFRAG_TREE_HPP
#define DEFRAG_TREE_HPP

#include <cstdint>
#include <fstream>
#include <future>
#include <istream>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "defrag/split.hpp"

namespace defrag {

enum class SplitKind { KMeans, NDCG };

inline const char* to_string(SplitKind k) { return k == SplitKind::KMeans ? "kmeans" : "ndcg"; }

/// A K-partition of the feature set [d]. Clusters are disjoint, nonempty and
/// cover [d]; `cluster_of(j)` is the id of the cluster holding feature j.
class FeaturePartition {
public:
    FeaturePartition() = default;

    FeaturePartition(std::size_t d, std::vector<std::vector<index_t>> clusters, std::size_t d0 = 0,
                     std::uint64_t seed = 0)
        : d_(d), d0_(d0), seed_(seed), clusters_(std::move(clusters)), cluster_of_(d, kUnassigned) {
        for (std::size_t k = 0; k < clusters_.size(); ++k) {
            if (clusters_[k].empty()) throw InvariantError("partition cluster " + std::to_string(k) + " is empty");
            for (index_t j : clusters_[k]) {
                if (j >= d) throw InvariantError("partition feature " + std::to_string(j) + " out of range");
                if (cluster_of_[j] != kUnassigned)
                    throw InvariantError("feature " + std::to_string(j) + " appears in two clusters");
                cluster_of_[j] = static_cast<index_t>(k);
            }
        }
        for (std::size_t j = 0; j < d; ++j)
            if (cluster_of_[j] == kUnassigned)
                throw InvariantError("feature " + std::to_string(j) + " is not covered by the partition");
    }

    static FeaturePartition identity(std::size_t d) {
        std::vector<std::vector<index_t>> cl(d);
        for (std::size_t j = 0; j < d; ++j) cl[j] = {static_cast<index_t>(j)};
        return FeaturePartition(d, std::move(cl), 1, 0);
    }

    std::size_t d() const noexcept { return d_; }
    std::size_t K() const noexcept { return clusters_.size(); }
    std::size_t d0() const noexcept { return d0_; }
    std::uint64_t seed() const noexcept { return seed_; }
    index_t cluster_of(index_t j) const { return cluster_of_.at(j); }
    std::span<const index_t> assignment() const noexcept { return cluster_of_; }
    const std::vector<std::vector<index_t>>& clusters() const noexcept { return clusters_; }
    const std::vector<index_t>& cluster(std::size_t k) const { return clusters_.at(k); }

    std::vector<std::size_t> sizes() const {
        std::vector<std::size_t> s;
        s.reserve(clusters_.size());
        for (const auto& c : clusters_) s.push_back(c.size());
        return s;
    }

    friend bool operator==(const FeaturePartition& a, const FeaturePartition& b) {
        return a.d_ == b.d_ && a.clusters_ == b.clusters_;
    }

private:
    static constexpr index_t kUnassigned = ~index_t{0};
    std::size_t d_ = 0;
    std::size_t d0_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<std::vector<index_t>> clusters_;
    std::vector<index_t> cluster_of_;
};

struct TreeNode {
    std::vector<index_t> features;  // leaves only
    std::unique_ptr<TreeNode> left;
    std::unique_ptr<TreeNode> right;
    int split_iterations = 0;
    bool split_converged = true;

    bool is_leaf() const noexcept { return !left; }
};

struct ClusterTree {
    std::unique_ptr<TreeNode> root;
    std::size_t d = 0;
    std::size_t d0 = 0;
    SplitKind split_kind = SplitKind::KMeans;
    std::uint64_t seed = 0;
};

struct TreeOptions {
    std::size_t d0 = 8;
    SplitKind split_kind = SplitKind::KMeans;
    std::uint64_t seed = 0;
    SplitOptions split{};
    /// Worker threads for sibling subtrees; 0 means hardware concurrency.
    unsigned threads = 1;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Seeds depend only on the root seed and the bit-path to the node.
inline std::uint64_t root_seed(std::uint64_t seed) { return splitmix64(seed); }
inline std::uint64_t child_seed(std::uint64_t parent, unsigned bit) {
    return splitmix64(parent ^ (0xD6E8FEB86659FD93ull * (bit + 1)));
}

struct TreeBuilder {
    const ReprSet& rs;
    const TreeOptions& opts;

    std::unique_ptr<TreeNode> build(std::vector<index_t> S, std::uint64_t node_seed, unsigned parallel_depth,
                                    SplitWorkspace& ws) const {
        auto node = std::make_unique<TreeNode>();
        if (S.size() <= opts.d0) {
            node->features = std::move(S);
            return node;
        }
        Rng rng(node_seed);
        SplitResult r = opts.split_kind == SplitKind::KMeans ? kmeans_split(S, rs, rng, ws, opts.split)
                                                             : ndcg_split(S, rs, rng, ws, opts.split);
        node->split_iterations = r.iterations;
        node->split_converged = r.converged;
        S.clear();
        S.shrink_to_fit();
        if (parallel_depth > 0) {
            auto right = std::async(std::launch::async, [&, minus = std::move(r.s_minus)]() mutable {
                SplitWorkspace own(rs.ambient_dim);
                return build(std::move(minus), child_seed(node_seed, 1), parallel_depth - 1, own);
            });
            node->left = build(std::move(r.s_plus), child_seed(node_seed, 0), parallel_depth - 1, ws);
            node->right = right.get();
        } else {
            node->left = build(std::move(r.s_plus), child_seed(node_seed, 0), 0, ws);
            node->right = build(std::move(r.s_minus), child_seed(node_seed, 1), 0, ws);
        }
        return node;
    }
};

}  // namespace detail

/// Recursive balanced hierarchy over all features of `rs`: a node with more
/// than d0 features is split in two balanced halves, otherwise it is a leaf.
/// The output is independent of `threads`.
inline ClusterTree make_tree(const ReprSet& rs, const TreeOptions& opts) {
    if (opts.d0 < 1) throw InvalidArgument("make_tree: d0 must be at least 1");
    if (rs.size() < 1) throw InvalidArgument("make_tree: no features");
    unsigned threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.threads;
    unsigned depth = 0;
    while ((1u << depth) < threads && depth < 16) ++depth;

    std::vector<index_t> all(rs.size());
    std::iota(all.begin(), all.end(), index_t{0});
    SplitWorkspace ws(rs.ambient_dim);
    detail::TreeBuilder builder{rs, opts};

    ClusterTree t;
    t.d = rs.size();
    t.d0 = opts.d0;
    t.split_kind = opts.split_kind;
    t.seed = opts.seed;
    t.root = builder.build(std::move(all), detail::root_seed(opts.seed), depth, ws);
    return t;
}

/// Left-to-right leaf enumeration; cluster ids follow leaf order.
inline FeaturePartition leaves(const ClusterTree& t) {
    std::vector<std::vector<index_t>> clusters;
    std::vector<const TreeNode*> stack;
    if (t.root) stack.push_back(t.root.get());
    while (!stack.empty()) {
        const TreeNode* n = stack.back();
        stack.pop_back();
        if (n->is_leaf()) {
            clusters.push_back(n->features);
        } else {
            stack.push_back(n->right.get());
            stack.push_back(n->left.get());
        }
    }
    return FeaturePartition(t.d, std::move(clusters), t.d0, t.seed);
}

/// m independent realizations with seeds base_seed, ..., base_seed + m - 1.
inline std::vector<FeaturePartition> ensemble(const ReprSet& rs, std::size_t m, TreeOptions opts) {
    if (m < 1) throw InvalidArgument("ensemble: m must be at least 1");
    std::vector<FeaturePartition> out;
    out.reserve(m);
    const std::uint64_t base = opts.seed;
    for (std::size_t r = 0; r < m; ++r) {
        opts.seed = base + r;
        out.push_back(leaves(make_tree(rs, opts)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Partition files.

inline nlohmann::json to_json(const FeaturePartition& p) {
    return nlohmann::json{{"d", p.d()}, {"K", p.K()}, {"d0", p.d0()}, {"seed", p.seed()}, {"clusters", p.clusters()}};
}

inline FeaturePartition partition_from_json(const nlohmann::json& j) {
    try {
        auto d = j.at("d").get<std::size_t>();
        auto clusters = j.at("clusters").get<std::vector<std::vector<index_t>>>();
        if (j.contains("K") && j.at("K").get<std::size_t>() != clusters.size())
            throw DataError("partition K does not match the number of clusters");
        return FeaturePartition(d, std::move(clusters), j.value("d0", std::size_t{0}),
                                j.value("seed", std::uint64_t{0}));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed partition JSON: ") + e.what());
    } catch (const InvariantError& e) {
        throw DataError(std::string("invalid partition: ") + e.what());
    }
}

/// Two-column text form, one "feature_id cluster_id" line per feature.
inline void write_partition_text(std::ostream& out, const FeaturePartition& p) {
    for (std::size_t j = 0; j < p.d(); ++j) out << j << ' ' << p.cluster_of(static_cast<index_t>(j)) << '\n';
}

inline FeaturePartition read_partition_text(std::istream& in) {
    std::vector<std::pair<std::size_t, std::size_t>> rows;
    std::size_t feature = 0, cluster = 0, max_f = 0, max_c = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        std::istringstream ls(line);
        if (!(ls >> feature >> cluster)) throw ParseError(lineno, "expected 'feature_id cluster_id'");
        rows.emplace_back(feature, cluster);
        max_f = std::max(max_f, feature);
        max_c = std::max(max_c, cluster);
    }
    if (rows.empty()) return FeaturePartition(0, {});
    std::vector<std::vector<index_t>> clusters(max_c + 1);
    for (auto [f, c] : rows) clusters[c].push_back(static_cast<index_t>(f));
    for (auto& c : clusters) std::sort(c.begin(), c.end());
    try {
        return FeaturePartition(max_f + 1, std::move(clusters));
    } catch (const InvariantError& e) {
        throw DataError(std::string("invalid partition: ") + e.what());
    }
}

inline FeaturePartition load_partition(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(std::string("malformed partition JSON: ") + e.what());
        }
        return partition_from_json(j);
    }
    std::istringstream tin(text);
    return read_partition_text(tin);
}

}  // namespace defrag

#endif  // DEFRAG_TREE_HPP
