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

#ifndef DEFRAG_REFRAG_HPP
#define DEFRAG_REFRAG_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "defrag/fiat.hpp"
#include "defrag/xc_metrics.hpp"

namespace defrag {

/// One prototype xi^l per label, the columns of C^F X Y^T.
struct PrototypeSet {
    std::vector<SparseVec> prototypes;
    double gamma = 1.0;
    bool normalized = true;

    std::size_t L() const noexcept { return prototypes.size(); }
    std::size_t d() const noexcept { return prototypes.empty() ? 0 : prototypes.front().dim(); }
};

inline SparseVec unit(const SparseVec& v) {
    const double n = norm2(v);
    return n > 0.0 ? v.scaled(1.0 / n) : v;
}

inline PrototypeSet build_prototypes(const PseudoCooc& c, const Dataset& ds, bool normalize = true,
                                     double gamma = 1.0) {
    if (ds.d() != c.d())
        throw InvalidArgument("build_prototypes: dataset has " + std::to_string(ds.d()) + " features, cooc has " +
                              std::to_string(c.d()));
    if (!(gamma > 0.0)) throw InvalidArgument("build_prototypes: gamma must be positive");
    PrototypeSet ps;
    ps.gamma = gamma;
    ps.normalized = normalize;
    ps.prototypes.reserve(ds.L());
    const SparseMatrix Yt = ds.labels().transposed();
    detail::Accumulator acc(ds.d());
    for (std::size_t l = 0; l < ds.L(); ++l) {
        for (const Entry& e : Yt.row(l)) acc.add(e.value, ds.features().row(e.index));
        SparseVec xi = impute(c, acc.to_sparse());
        acc.clear();
        ps.prototypes.push_back(normalize ? unit(xi) : std::move(xi));
    }
    return ps;
}

/// exp(-gamma/2 ||x - xi^l||^2), with x used as given.
inline double affinity(const SparseVec& x, const PrototypeSet& ps, index_t l) {
    const SparseVec& xi = ps.prototypes.at(l);
    if (x.dim() != xi.dim())
        throw InvalidArgument("affinity: vector dim " + std::to_string(x.dim()) + " != " + std::to_string(xi.dim()));
    const double dist2 = std::max(0.0, squared_norm(x) + squared_norm(xi) - 2.0 * dot(x, xi));
    return std::exp(-0.5 * ps.gamma * dist2);
}

/// c_l = alpha ln b_l + (1 - alpha) ln a_l over labels with b_l > 0, sorted by
/// c descending and then label id.
inline RankedLabels rerank(std::span<const ScoredLabel> base, std::span<const double> affinities, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("rerank: alpha must lie in [0, 1]");
    if (base.size() != affinities.size()) throw InvalidArgument("rerank: one affinity per shortlisted label required");
    RankedLabels out;
    out.reserve(base.size());
    for (std::size_t t = 0; t < base.size(); ++t) {
        if (!(base[t].score > 0.0)) continue;
        const double a = affinities[t];
        double c = alpha * std::log(base[t].score);
        if (alpha < 1.0) c += (1.0 - alpha) * std::log(a);
        out.push_back({base[t].label, c});
    }
    std::sort(out.begin(), out.end(), [](const ScoredLabel& a, const ScoredLabel& b) {
        return a.score != b.score ? a.score > b.score : a.label < b.label;
    });
    return out;
}

/// Reranks the top `shortlist` labels of one base ranking against x.
inline RankedLabels rerank_point(const RankedLabels& base, const SparseVec& x, const PrototypeSet& ps, double alpha,
                                 std::size_t shortlist = 100) {
    const std::size_t B = std::min(shortlist, base.size());
    const SparseVec q = ps.normalized ? unit(x) : x;
    std::vector<double> a(B);
    for (std::size_t t = 0; t < B; ++t) a[t] = affinity(q, ps, base[t].label);
    return rerank(std::span<const ScoredLabel>(base.data(), B), a, alpha);
}

inline Predictions rerank_all(const Predictions& base, const SparseMatrix& X, const PrototypeSet& ps, double alpha,
                              std::size_t shortlist = 100) {
    if (base.size() != X.rows()) throw InvalidArgument("rerank: one base ranking per test point required");
    Predictions out;
    out.reserve(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) out.push_back(rerank_point(base[i], X.row(i), ps, alpha, shortlist));
    return out;
}

}  // namespace defrag

#endif  // DEFRAG_REFRAG_HPP
