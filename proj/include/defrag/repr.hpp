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

#ifndef DEFRAG_REPR_HPP
#define DEFRAG_REPR_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "defrag/dataset.hpp"

namespace defrag {

enum class ReprKind { X, XY };

/// One representative vector per original feature, all of dimension
/// `ambient_dim`. X-mode vectors hold a feature's values across the selected
/// points; XY-mode vectors aggregate the label vectors of points where the
/// feature fires.
struct ReprSet {
    std::size_t ambient_dim = 0;
    std::vector<SparseVec> reprs;
    ReprKind kind = ReprKind::X;
    bool normalized = false;

    std::size_t size() const noexcept { return reprs.size(); }
    const SparseVec& operator[](std::size_t j) const { return reprs[j]; }
};

namespace detail {

inline std::size_t fraction_count(double fraction, std::size_t total) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("fraction must lie in (0, 1]");
    // The epsilon keeps e.g. (2/3)*3 from rounding up to 3.
    auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total) - 1e-9));
    return std::clamp<std::size_t>(k, total == 0 ? 0 : 1, total);
}

}  // namespace detail

/// Points ordered by decreasing L1 feature volume (ties by index), truncated
/// to ceil(doc_fraction * n).
inline std::vector<index_t> select_voluminous_points(const Dataset& ds, double doc_fraction) {
    const std::size_t keep = detail::fraction_count(doc_fraction, ds.n());
    std::vector<double> volume(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) volume[i] = norm1(ds.features().row(i));
    std::vector<index_t> order(ds.n());
    std::iota(order.begin(), order.end(), index_t{0});
    std::stable_sort(order.begin(), order.end(), [&](index_t a, index_t b) { return volume[a] > volume[b]; });
    order.resize(keep);
    return order;
}

/// The ceil(label_fraction * L) most frequent labels (ties by id), returned
/// in ascending label id order.
inline std::vector<index_t> select_popular_labels(const Dataset& ds, double label_fraction) {
    const std::size_t keep = detail::fraction_count(label_fraction, ds.L());
    std::vector<std::size_t> freq(ds.L(), 0);
    for (std::size_t i = 0; i < ds.n(); ++i)
        for (const Entry& e : ds.labels().row(i)) ++freq[e.index];
    std::vector<index_t> order(ds.L());
    std::iota(order.begin(), order.end(), index_t{0});
    std::stable_sort(order.begin(), order.end(), [&](index_t a, index_t b) { return freq[a] > freq[b]; });
    order.resize(keep);
    std::sort(order.begin(), order.end());
    return order;
}

inline ReprSet build_repr_x(const Dataset& ds, double doc_fraction = 0.25) {
    if (ds.n() == 0) throw InvalidArgument("build_repr_x: empty dataset");
    const auto selected = select_voluminous_points(ds, doc_fraction);
    std::vector<std::vector<Entry>> cols(ds.d());
    for (std::size_t pos = 0; pos < selected.size(); ++pos)
        for (const Entry& e : ds.features().row(selected[pos]))
            cols[e.index].push_back({static_cast<index_t>(pos), e.value});

    ReprSet rs;
    rs.ambient_dim = selected.size();
    rs.kind = ReprKind::X;
    rs.reprs.reserve(ds.d());
    for (auto& c : cols) rs.reprs.push_back(SparseVec::from_sorted(rs.ambient_dim, std::move(c)));
    return rs;
}

inline ReprSet build_repr_xy(const Dataset& ds, double doc_fraction = 0.25, double label_fraction = 0.05) {
    if (ds.n() == 0) throw InvalidArgument("build_repr_xy: empty dataset");
    if (ds.L() == 0) throw InvalidArgument("build_repr_xy: dataset has no labels");
    const auto points = select_voluminous_points(ds, doc_fraction);
    const auto labels = select_popular_labels(ds, label_fraction);

    constexpr index_t kDropped = ~index_t{0};
    std::vector<index_t> label_slot(ds.L(), kDropped);
    for (std::size_t s = 0; s < labels.size(); ++s) label_slot[labels[s]] = static_cast<index_t>(s);

    // Feature-major view of the selected points: feature -> (point, value).
    std::vector<std::vector<Entry>> cols(ds.d());
    for (index_t i : points)
        for (const Entry& e : ds.features().row(i)) cols[e.index].push_back({i, e.value});

    ReprSet rs;
    rs.ambient_dim = labels.size();
    rs.kind = ReprKind::XY;
    rs.reprs.reserve(ds.d());
    detail::Accumulator acc(rs.ambient_dim);
    for (const auto& col : cols) {
        for (const Entry& pe : col)
            for (const Entry& le : ds.labels().row(pe.index))
                if (label_slot[le.index] != kDropped) acc.add(label_slot[le.index], pe.value);
        rs.reprs.push_back(acc.to_sparse());
        acc.clear();
    }
    return rs;
}

/// Scales every nonzero representative to unit L2 norm.
inline ReprSet normalize(ReprSet rs) {
    for (auto& v : rs.reprs) {
        const double nrm = norm2(v);
        if (nrm > 0.0 && nrm != 1.0) v = v.scaled(1.0 / nrm);
    }
    rs.normalized = true;
    return rs;
}

}  // namespace defrag

#endif  // DEFRAG_REPR_HPP
