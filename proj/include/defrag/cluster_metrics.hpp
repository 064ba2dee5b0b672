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

#ifndef DEFRAG_CLUSTER_METRICS_HPP
#define DEFRAG_CLUSTER_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "defrag/agglomerate.hpp"

namespace defrag {

/// Mutual information between features Z (n x p, nonnegative) and labels Y
/// (n x L), through the joint matrix Pi = Z^T Y / sum(Z^T Y). Marginals are
/// the row and column sums of Pi; 0 ln 0 is taken as 0.
inline double mutual_information(const SparseMatrix& Z, const SparseMatrix& Y) {
    if (Z.rows() != Y.rows()) throw InvalidArgument("mutual_information: Z and Y must have the same rows");
    const std::size_t n = Z.rows();

    std::vector<double> volume(n, 0.0), label_count(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (const Entry& e : Z.row(i)) {
            if (e.value < 0.0) throw InvalidArgument("mutual_information: negative feature value");
            volume[i] += e.value;
        }
        label_count[i] = static_cast<double>(Y.row(i).nnz());
    }

    // Unnormalized joint R = Z^T Y, its row sums, column sums and total.
    std::vector<double> col(Y.cols(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (const Entry& e : Y.row(i)) col[e.index] += volume[i] * e.value;
        total += volume[i] * label_count[i];
    }
    if (!(total > 0.0)) throw InvalidArgument("mutual_information: joint feature-label matrix is all zero");

    const SparseMatrix Zt = Z.transposed();
    detail::Accumulator joint(Y.cols());
    double acc = 0.0;
    for (std::size_t j = 0; j < Zt.rows(); ++j) {
        double row = 0.0;
        for (const Entry& pe : Zt.row(j)) {
            for (const Entry& le : Y.row(pe.index)) joint.add(le.index, pe.value * le.value);
            row += pe.value * label_count[pe.index];
        }
        for (index_t l : joint.touched()) {
            const double r = joint[l];
            if (r > 0.0) acc += r * (std::log(r) + std::log(total) - std::log(row) - std::log(col[l]));
        }
        joint.clear();
    }
    return std::max(0.0, acc / total);
}

/// Fraction of label-feature mutual information lost by agglomeration.
inline double lmi(const SparseMatrix& X, const SparseMatrix& X_agg, const SparseMatrix& Y) {
    const double full = mutual_information(X, Y);
    if (!(full > 0.0)) throw InvalidArgument("lmi: I(Y;X) is zero");
    return (full - mutual_information(X_agg, Y)) / full;
}

/// max/min cluster size; +infinity when any cluster is empty.
inline double balance_factor(std::span<const std::size_t> sizes) {
    if (sizes.empty()) return std::numeric_limits<double>::infinity();
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    if (*lo == 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(*hi) / static_cast<double>(*lo);
}

inline double balance_factor(const FeaturePartition& part) {
    const auto s = part.sizes();
    return balance_factor(std::span<const std::size_t>(s));
}

/// Shannon entropy of the cluster-size distribution divided by ln d.
inline double normalized_entropy(std::span<const std::size_t> sizes) {
    std::size_t d = 0;
    for (std::size_t s : sizes) d += s;
    if (d < 2) throw InvalidArgument("normalized_entropy: need d >= 2");
    double h = 0.0;
    for (std::size_t s : sizes) {
        if (s == 0) continue;
        const double p = static_cast<double>(s) / static_cast<double>(d);
        h -= p * std::log(p);
    }
    return h / std::log(static_cast<double>(d));
}

inline double normalized_entropy(const FeaturePartition& part) {
    const auto s = part.sizes();
    return normalized_entropy(std::span<const std::size_t>(s));
}

/// Adjusted Rand index between two labelings of the same items.
inline double adjusted_rand_index(std::span<const index_t> a, std::span<const index_t> b) {
    if (a.size() != b.size()) throw InvalidArgument("adjusted_rand_index: labelings differ in length");
    const std::size_t n = a.size();
    auto pairs = [](double c) { return c * (c - 1.0) / 2.0; };
    std::map<std::pair<index_t, index_t>, double> joint;
    std::map<index_t, double> ra, rb;
    for (std::size_t i = 0; i < n; ++i) {
        joint[{a[i], b[i]}] += 1.0;
        ra[a[i]] += 1.0;
        rb[b[i]] += 1.0;
    }
    double sum_joint = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [k, c] : joint) sum_joint += pairs(c);
    for (const auto& [k, c] : ra) sum_a += pairs(c);
    for (const auto& [k, c] : rb) sum_b += pairs(c);
    const double total = pairs(static_cast<double>(n));
    const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;
    return (sum_joint - expected) / (max_index - expected);
}

inline double adjusted_rand_index(const FeaturePartition& a, const FeaturePartition& b) {
    if (a.d() != b.d()) throw InvalidArgument("adjusted_rand_index: partitions cover different d");
    return adjusted_rand_index(a.assignment(), b.assignment());
}

struct ClusterQualityReport {
    double lmi = 0.0;
    double balance = 1.0;
    double normalized_entropy = 0.0;
    std::optional<double> clustering_seconds;
};

/// Quality of `part` judged on the full dataset (SUM agglomeration).
inline ClusterQualityReport evaluate_clustering(const Dataset& ds, const FeaturePartition& part,
                                                std::optional<double> clustering_seconds = std::nullopt) {
    ClusterQualityReport r;
    const Dataset agg = agglomerate(ds, part, AgglomerationMode::Sum);
    r.lmi = lmi(ds.features(), agg.features(), ds.labels());
    r.balance = balance_factor(part);
    r.normalized_entropy = part.d() >= 2 ? normalized_entropy(part) : 0.0;
    r.clustering_seconds = clustering_seconds;
    return r;
}

}  // namespace defrag

#endif  // DEFRAG_CLUSTER_METRICS_HPP
