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

#ifndef DEFRAG_FIAT_HPP
#define DEFRAG_FIAT_HPP

#include <algorithm>
#include <cmath>
#include <iterator>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "defrag/dataset.hpp"
#include "defrag/split.hpp"
#include "defrag/tree.hpp"

namespace defrag {

/// Block-diagonal pseudo co-occurrence matrix: for each cluster F_k a dense
/// symmetric d_k x d_k block equal to sum_i x_{F_k} x_{F_k}^T.
class PseudoCooc {
public:
    PseudoCooc() = default;

    explicit PseudoCooc(FeaturePartition part) : part_(std::move(part)), offset_(part_.d(), 0) {
        blocks_.reserve(part_.K());
        for (std::size_t k = 0; k < part_.K(); ++k) {
            const auto& members = part_.cluster(k);
            for (std::size_t a = 0; a < members.size(); ++a) offset_[members[a]] = static_cast<index_t>(a);
            blocks_.emplace_back(members.size() * members.size(), 0.0);
        }
    }

    const FeaturePartition& partition() const noexcept { return part_; }
    std::size_t d() const noexcept { return part_.d(); }

    /// Position of feature j inside its cluster's block.
    index_t offset(index_t j) const { return offset_.at(j); }

    /// Row-major d_k x d_k block of cluster k.
    std::span<const double> block(std::size_t k) const { return blocks_.at(k); }
    std::span<double> block(std::size_t k) { return blocks_.at(k); }

    double at(index_t a, index_t b) const {
        const index_t k = part_.cluster_of(a);
        if (part_.cluster_of(b) != k) return 0.0;
        const std::size_t dk = part_.cluster(k).size();
        return blocks_[k][offset_[a] * dk + offset_[b]];
    }

    std::size_t stored_entries() const noexcept {
        std::size_t s = 0;
        for (const auto& b : blocks_) s += b.size();
        return s;
    }

private:
    FeaturePartition part_;
    std::vector<index_t> offset_;
    std::vector<std::vector<double>> blocks_;
};

inline PseudoCooc build_cooc(const Dataset& ds, const FeaturePartition& part) {
    if (ds.d() != part.d())
        throw InvalidArgument("build_cooc: dataset has " + std::to_string(ds.d()) + " features, partition covers " +
                              std::to_string(part.d()));
    PseudoCooc c(part);
    struct Local {
        index_t cluster;
        index_t offset;
        double value;
    };
    std::vector<Local> local;
    for (const SparseVec& x : ds.features().row_data()) {
        local.clear();
        for (const Entry& e : x) local.push_back({part.cluster_of(e.index), c.offset(e.index), e.value});
        std::sort(local.begin(), local.end(), [](const Local& a, const Local& b) { return a.cluster < b.cluster; });
        for (std::size_t s = 0; s < local.size();) {
            std::size_t t = s;
            while (t < local.size() && local[t].cluster == local[s].cluster) ++t;
            const std::size_t dk = part.cluster(local[s].cluster).size();
            auto blk = c.block(local[s].cluster);
            for (std::size_t a = s; a < t; ++a)
                for (std::size_t b = s; b < t; ++b)
                    blk[local[a].offset * dk + local[b].offset] += local[a].value * local[b].value;
            s = t;
        }
    }
    return c;
}

/// Rescales every row of every block to sum to 1 (all-zero rows untouched).
inline PseudoCooc row_normalize(PseudoCooc c) {
    for (std::size_t k = 0; k < c.partition().K(); ++k) {
        const std::size_t dk = c.partition().cluster(k).size();
        auto blk = c.block(k);
        for (std::size_t a = 0; a < dk; ++a) {
            double s = 0.0;
            for (std::size_t b = 0; b < dk; ++b) s += blk[a * dk + b];
            if (s != 0.0)
                for (std::size_t b = 0; b < dk; ++b) blk[a * dk + b] /= s;
        }
    }
    return c;
}

/// C^F x computed block by block; only clusters touched by x contribute.
inline SparseVec impute(const PseudoCooc& c, const SparseVec& x) {
    if (x.dim() != c.d())
        throw InvalidArgument("impute: vector dim " + std::to_string(x.dim()) + " != " + std::to_string(c.d()));
    const auto& part = c.partition();
    std::vector<Entry> grouped(x.begin(), x.end());
    std::stable_sort(grouped.begin(), grouped.end(), [&](const Entry& a, const Entry& b) {
        return part.cluster_of(a.index) < part.cluster_of(b.index);
    });
    std::vector<Entry> out;
    for (std::size_t s = 0; s < grouped.size();) {
        const index_t k = part.cluster_of(grouped[s].index);
        std::size_t t = s;
        while (t < grouped.size() && part.cluster_of(grouped[t].index) == k) ++t;
        const auto& members = part.cluster(k);
        const std::size_t dk = members.size();
        auto blk = c.block(k);
        for (std::size_t a = 0; a < dk; ++a) {
            double acc = 0.0;
            for (std::size_t u = s; u < t; ++u) acc += blk[a * dk + c.offset(grouped[u].index)] * grouped[u].value;
            out.push_back({members[a], acc});
        }
        s = t;
    }
    return SparseVec::from_pairs(c.d(), std::move(out));
}

/// Blend used before classification: lambda x + (1 - lambda) C^F x / scale,
/// where scale matches the L1 mass of the imputed vector to that of x.
inline SparseVec impute_blend(const PseudoCooc& c, const SparseVec& x, double lambda = 0.0) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("impute_blend: lambda must lie in [0, 1]");
    SparseVec imp = impute(c, x);
    const double mass = norm1(imp);
    if (mass == 0.0 || lambda == 1.0) return x;
    const double s = (1.0 - lambda) * norm1(x) / mass;
    std::vector<Entry> out;
    out.reserve(x.nnz() + imp.nnz());
    for (const Entry& e : x) out.push_back({e.index, lambda * e.value});
    std::vector<Entry> merged;
    merged.reserve(out.size() + imp.nnz());
    auto ix = out.begin();
    auto ii = imp.begin();
    while (ix != out.end() || ii != imp.end()) {
        if (ii == imp.end() || (ix != out.end() && ix->index < ii->index)) {
            merged.push_back(*ix++);
        } else if (ix == out.end() || ii->index < ix->index) {
            merged.push_back({ii->index, s * ii->value});
            ++ii;
        } else {
            merged.push_back({ix->index, ix->value + s * ii->value});
            ++ix;
            ++ii;
        }
    }
    return SparseVec::from_sorted(x.dim(), std::move(merged));
}

/// Removes round(fraction * nnz) stored entries chosen uniformly at random.
inline SparseVec erase(const SparseVec& x, double fraction, Rng& rng) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw InvalidArgument("erase: fraction must lie in [0, 1]");
    const auto removed = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(x.nnz())));
    const std::size_t keep = x.nnz() - std::min(removed, x.nnz());
    std::vector<Entry> kept;
    kept.reserve(keep);
    std::sample(x.begin(), x.end(), std::back_inserter(kept), keep, rng);
    return SparseVec::from_sorted(x.dim(), std::move(kept));
}

inline Dataset erase(const Dataset& ds, double fraction, Rng& rng) {
    std::vector<SparseVec> rows;
    rows.reserve(ds.n());
    for (const SparseVec& x : ds.features().row_data()) rows.push_back(erase(x, fraction, rng));
    return Dataset(SparseMatrix(ds.d(), std::move(rows)), ds.labels());
}

// ---------------------------------------------------------------------------
// Persistence: {"d", "K", "clusters": [[...]], "blocks": [[row-major values]]}.

inline nlohmann::json to_json(const PseudoCooc& c) {
    nlohmann::json blocks = nlohmann::json::array();
    for (std::size_t k = 0; k < c.partition().K(); ++k) {
        auto b = c.block(k);
        blocks.push_back(std::vector<double>(b.begin(), b.end()));
    }
    return nlohmann::json{{"d", c.d()},
                          {"K", c.partition().K()},
                          {"clusters", c.partition().clusters()},
                          {"blocks", std::move(blocks)}};
}

inline PseudoCooc cooc_from_json(const nlohmann::json& j) {
    try {
        PseudoCooc c(partition_from_json(j));
        const auto& blocks = j.at("blocks");
        if (blocks.size() != c.partition().K()) throw DataError("cooc JSON: one block per cluster required");
        for (std::size_t k = 0; k < blocks.size(); ++k) {
            auto vals = blocks[k].get<std::vector<double>>();
            auto dst = c.block(k);
            if (vals.size() != dst.size()) throw DataError("cooc JSON: block " + std::to_string(k) + " has wrong size");
            std::copy(vals.begin(), vals.end(), dst.begin());
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed cooc JSON: ") + e.what());
    }
}

}  // namespace defrag

#endif  // DEFRAG_FIAT_HPP
