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

#ifndef DEFRAG_SYNTHETIC_HPP
#define DEFRAG_SYNTHETIC_HPP

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <random>
#include <vector>

#include "defrag/tree.hpp"

namespace defrag {

// Duplicated-feature data: `groups` latent features, each copied `copies`
// times under a random feature id permutation. Labels are the top scores of a
// random linear teacher over the latent activations.
struct GroupedSpec {
    std::size_t n_train = 2000;
    std::size_t n_test = 1000;
    std::size_t groups = 64;
    std::size_t copies = 8;
    std::size_t L = 32;
    std::size_t active = 6;
    std::size_t labels_per_point = 2;
    std::uint64_t seed = 0;
};

struct GroupedData {
    Dataset train;
    Dataset test;
    FeaturePartition groups;  // ground-truth copies of each latent feature
};

inline GroupedData make_grouped(const GroupedSpec& spec) {
    if (spec.groups < 1 || spec.copies < 1 || spec.active < 1 || spec.active > spec.groups)
        throw InvalidArgument("make_grouped: need 1 <= active <= groups and copies >= 1");
    if (spec.labels_per_point < 1 || spec.labels_per_point > spec.L)
        throw InvalidArgument("make_grouped: need 1 <= labels_per_point <= L");
    Rng rng(detail::root_seed(spec.seed));
    const std::size_t d = spec.groups * spec.copies;
    std::vector<index_t> perm(d);
    std::iota(perm.begin(), perm.end(), index_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<index_t>> members(spec.groups);
    for (std::size_t g = 0; g < spec.groups; ++g) {
        for (std::size_t c = 0; c < spec.copies; ++c) members[g].push_back(perm[g * spec.copies + c]);
        std::sort(members[g].begin(), members[g].end());
    }

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> teacher(spec.L * spec.groups);
    for (double& t : teacher) t = gauss(rng);

    std::uniform_real_distribution<double> value(0.2, 1.0);
    std::vector<index_t> latent(spec.groups);
    std::iota(latent.begin(), latent.end(), index_t{0});
    auto draw = [&](std::size_t n) {
        std::vector<SparseVec> X, Y;
        X.reserve(n);
        Y.reserve(n);
        std::vector<double> score(spec.L);
        std::vector<index_t> order(spec.L);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<index_t> on;
            std::sample(latent.begin(), latent.end(), std::back_inserter(on), spec.active, rng);
            std::vector<Entry> x;
            std::fill(score.begin(), score.end(), 0.0);
            for (index_t g : on) {
                const double v = value(rng);
                for (index_t j : members[g]) x.push_back({j, v});
                for (std::size_t l = 0; l < spec.L; ++l) score[l] += teacher[l * spec.groups + g] * v;
            }
            X.push_back(SparseVec::from_pairs(d, std::move(x)));
            std::iota(order.begin(), order.end(), index_t{0});
            std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(spec.labels_per_point),
                              order.end(), [&](index_t a, index_t b) {
                                  return score[a] != score[b] ? score[a] > score[b] : a < b;
                              });
            Y.push_back(label_vector(spec.L, std::vector<index_t>(order.begin(),
                                                                  order.begin() + static_cast<std::ptrdiff_t>(
                                                                                      spec.labels_per_point))));
        }
        return Dataset(SparseMatrix(d, std::move(X)), SparseMatrix(spec.L, std::move(Y)));
    };
    Dataset train = draw(spec.n_train);
    Dataset test = draw(spec.n_test);
    return {std::move(train), std::move(test), FeaturePartition(d, std::move(members))};
}

// Power-law label data: label l is drawn with probability proportional to
// (l + 1)^-exponent, so low ids are head labels. Each label owns a random
// signature of features; a point shows part of its labels' signatures plus
// background noise.
struct ZipfSpec {
    std::size_t n_train = 5000;
    std::size_t n_test = 2000;
    std::size_t L = 500;
    std::size_t d = 2000;
    double exponent = 1.0;
    std::size_t max_labels_per_point = 2;
    std::size_t signature = 10;
    double keep = 0.6;
    std::size_t noise = 6;
    std::uint64_t seed = 0;
};

struct SplitData {
    Dataset train;
    Dataset test;
};

inline SplitData make_zipf(const ZipfSpec& spec) {
    if (spec.L < 1 || spec.d < spec.signature || spec.max_labels_per_point < 1)
        throw InvalidArgument("make_zipf: inconsistent spec");
    Rng rng(detail::root_seed(spec.seed));
    std::vector<double> weight(spec.L);
    for (std::size_t l = 0; l < spec.L; ++l) weight[l] = std::pow(static_cast<double>(l + 1), -spec.exponent);
    std::discrete_distribution<index_t> pick_label(weight.begin(), weight.end());

    std::vector<index_t> all(spec.d);
    std::iota(all.begin(), all.end(), index_t{0});
    std::vector<std::vector<index_t>> signature(spec.L);
    for (auto& s : signature) std::sample(all.begin(), all.end(), std::back_inserter(s), spec.signature, rng);

    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> count(1, spec.max_labels_per_point);
    std::uniform_int_distribution<index_t> any_feature(0, static_cast<index_t>(spec.d - 1));
    auto draw = [&](std::size_t n) {
        std::vector<SparseVec> X, Y;
        detail::Accumulator acc(spec.d);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<index_t> labels;
            const std::size_t m = count(rng);
            while (labels.size() < m) {
                const index_t l = pick_label(rng);
                if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
            }
            for (index_t l : labels)
                for (index_t j : signature[l])
                    if (u(rng) < spec.keep) acc.add(j, 0.5 + u(rng));
            for (std::size_t t = 0; t < spec.noise; ++t) acc.add(any_feature(rng), 0.1 + 0.4 * u(rng));
            X.push_back(acc.to_sparse());
            acc.clear();
            Y.push_back(label_vector(spec.L, std::move(labels)));
        }
        return Dataset(SparseMatrix(spec.d, std::move(X)), SparseMatrix(spec.L, std::move(Y)));
    };
    Dataset train = draw(spec.n_train);
    Dataset test = draw(spec.n_test);
    return {std::move(train), std::move(test)};
}

/// Uniformly sparse data with exactly `nnz_per_row` features per point and
/// one random label per point.
inline Dataset make_uniform_sparse(std::size_t n, std::size_t d, std::size_t nnz_per_row, std::size_t L,
                                   std::uint64_t seed) {
    if (nnz_per_row > d) throw InvalidArgument("make_uniform_sparse: nnz_per_row exceeds d");
    if (L < 1) throw InvalidArgument("make_uniform_sparse: need L >= 1");
    Rng rng(detail::root_seed(seed));
    std::uniform_real_distribution<double> value(0.1, 1.0);
    std::uniform_int_distribution<index_t> feature(0, static_cast<index_t>(d - 1));
    std::uniform_int_distribution<index_t> label(0, static_cast<index_t>(L - 1));
    std::vector<SparseVec> X, Y;
    X.reserve(n);
    Y.reserve(n);
    std::vector<index_t> cols;
    for (std::size_t i = 0; i < n; ++i) {
        cols.clear();
        while (cols.size() < nnz_per_row) {
            const index_t j = feature(rng);
            if (std::find(cols.begin(), cols.end(), j) == cols.end()) cols.push_back(j);
        }
        std::vector<Entry> x;
        x.reserve(cols.size());
        for (index_t j : cols) x.push_back({j, value(rng)});
        X.push_back(SparseVec::from_pairs(d, std::move(x)));
        Y.push_back(label_vector(L, {label(rng)}));
    }
    return Dataset(SparseMatrix(d, std::move(X)), SparseMatrix(L, std::move(Y)));
}

}  // namespace defrag

#endif  // DEFRAG_SYNTHETIC_HPP
