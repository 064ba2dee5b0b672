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

#ifndef DEFRAG_AGGLOMERATE_HPP
#define DEFRAG_AGGLOMERATE_HPP

#include <algorithm>
#include <vector>

#include "defrag/dataset.hpp"
#include "defrag/tree.hpp"

namespace defrag {

enum class AgglomerationMode { Sum, Average };

/// Collapses x onto one coordinate per cluster: the sum of the member values,
/// or that sum divided by the cluster size.
inline SparseVec agglomerate(const SparseVec& x, const FeaturePartition& part,
                             AgglomerationMode mode = AgglomerationMode::Sum) {
    if (x.dim() != part.d())
        throw InvalidArgument("agglomerate: vector dim " + std::to_string(x.dim()) + " != partition d " +
                              std::to_string(part.d()));
    std::vector<Entry> mapped;
    mapped.reserve(x.nnz());
    for (const Entry& e : x) mapped.push_back({part.cluster_of(e.index), e.value});
    std::stable_sort(mapped.begin(), mapped.end(), [](const Entry& a, const Entry& b) { return a.index < b.index; });

    std::vector<Entry> out;
    out.reserve(mapped.size());
    for (const Entry& e : mapped) {
        if (!out.empty() && out.back().index == e.index)
            out.back().value += e.value;
        else
            out.push_back(e);
    }
    if (mode == AgglomerationMode::Average)
        for (Entry& e : out) e.value /= static_cast<double>(part.cluster(e.index).size());
    return SparseVec::from_sorted(part.K(), std::move(out));
}

inline Dataset agglomerate(const Dataset& ds, const FeaturePartition& part,
                           AgglomerationMode mode = AgglomerationMode::Sum) {
    std::vector<SparseVec> rows;
    rows.reserve(ds.n());
    for (const SparseVec& x : ds.features().row_data()) rows.push_back(agglomerate(x, part, mode));
    return Dataset(SparseMatrix(part.K(), std::move(rows)), ds.labels());
}

}  // namespace defrag

#endif  // DEFRAG_AGGLOMERATE_HPP
