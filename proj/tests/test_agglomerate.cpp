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


#include <gtest/gtest.h>

#include <random>

#include "defrag/agglomerate.hpp"

using namespace defrag;

namespace {

SparseVec sv(std::size_t dim, std::vector<Entry> e) { return SparseVec::from_pairs(dim, std::move(e)); }

}  // namespace

TEST(Agglomerate, SumAndAverage) {
    const FeaturePartition p(4, {{0, 1}, {2, 3}});
    const auto x = SparseVec::from_dense(std::vector<double>{1, 0, 2, 3});
    EXPECT_EQ(agglomerate(x, p), SparseVec::from_dense(std::vector<double>{1, 5}));
    EXPECT_EQ(agglomerate(x, p, AgglomerationMode::Average), SparseVec::from_dense(std::vector<double>{0.5, 2.5}));
}

TEST(Agglomerate, IdentityPartitionIsIdentity) {
    const auto x = sv(6, {{1, 0.25}, {4, 3.0}, {5, 1e-7}});
    EXPECT_EQ(agglomerate(x, FeaturePartition::identity(6)), x);
    EXPECT_EQ(agglomerate(x, FeaturePartition::identity(6), AgglomerationMode::Average), x);
}

TEST(Agglomerate, CancellationStripsEntry) {
    const FeaturePartition p(3, {{0, 1}, {2}});
    EXPECT_EQ(agglomerate(sv(3, {{0, 1.5}, {1, -1.5}, {2, 2}}), p), sv(2, {{1, 2.0}}));
}

TEST(Agglomerate, DimensionMismatch) {
    EXPECT_THROW(agglomerate(sv(3, {}), FeaturePartition::identity(4)), InvalidArgument);
}

TEST(Agglomerate, DatasetKeepsLabels) {
    Dataset ds(SparseMatrix(3, {sv(3, {{0, 1}, {2, 2}}), sv(3, {{1, 4}})}),
               SparseMatrix(2, {label_vector(2, {1}), label_vector(2, {0, 1})}));
    const FeaturePartition p(3, {{0, 1}, {2}});
    const Dataset out = agglomerate(ds, p);
    EXPECT_EQ(out.d(), 2u);
    EXPECT_EQ(out.labels(), ds.labels());
    EXPECT_EQ(out.features().row(0), sv(2, {{0, 1.0}, {1, 2.0}}));
    EXPECT_EQ(out.features().row(1), sv(2, {{0, 4.0}}));
}

TEST(Agglomerate, RandomPropertiesAgainstDenseSum) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 500; ++t) {
        const std::size_t d = 1 + rng() % 60;
        std::vector<index_t> perm(d);
        std::iota(perm.begin(), perm.end(), index_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        const std::size_t K = 1 + rng() % d;
        std::vector<std::vector<index_t>> clusters(K);
        for (std::size_t j = 0; j < d; ++j) clusters[j < K ? j : rng() % K].push_back(perm[j]);
        const FeaturePartition p(d, clusters);

        std::vector<double> dense(d, 0.0);
        for (double& v : dense)
            if (u(rng) < 0.4) v = static_cast<double>(1 + rng() % 9);
        const auto x = SparseVec::from_dense(dense);
        const auto s = agglomerate(x, p);
        const auto a = agglomerate(x, p, AgglomerationMode::Average);
        EXPECT_LE(s.nnz(), x.nnz());
        EXPECT_EQ(sum(s), sum(x));
        for (std::size_t k = 0; k < K; ++k) {
            double ref = 0.0;
            for (index_t j : p.cluster(k)) ref += dense[j];
            EXPECT_EQ(s[static_cast<index_t>(k)], ref);
            EXPECT_DOUBLE_EQ(a[static_cast<index_t>(k)], ref / static_cast<double>(p.cluster(k).size()));
        }
    }
}
