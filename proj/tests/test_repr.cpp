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

#include <cmath>
#include <random>

#include "defrag/repr.hpp"

using namespace defrag;

namespace {

SparseVec sv(std::size_t dim, std::vector<Entry> e) { return SparseVec::from_pairs(dim, std::move(e)); }

Dataset random_dataset(std::uint64_t seed, std::size_t n, std::size_t d, std::size_t L) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<SparseVec> X, Y;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Entry> x, y;
        for (std::size_t j = 0; j < d; ++j)
            if (u(rng) < 0.3) x.push_back({static_cast<index_t>(j), std::floor(1.0 + 4.0 * u(rng))});
        for (std::size_t l = 0; l < L; ++l)
            if (u(rng) < 0.4) y.push_back({static_cast<index_t>(l), 1.0});
        X.push_back(sv(d, x));
        Y.push_back(sv(L, y));
    }
    return Dataset(SparseMatrix(d, std::move(X)), SparseMatrix(L, std::move(Y)));
}

}  // namespace

TEST(ReprX, FullFractionReadsColumns) {
    // feature 0 takes values (1, 0, 2) over three points
    Dataset ds(SparseMatrix(2, {sv(2, {{0, 1}}), sv(2, {{1, 5}}), sv(2, {{0, 2}})}),
               SparseMatrix(1, {sv(1, {}), sv(1, {}), sv(1, {})}));
    // volumes (1, 5, 2): full selection reorders points as (1, 2, 0)
    const auto rs = build_repr_x(ds, 1.0);
    EXPECT_EQ(rs.ambient_dim, 3u);
    EXPECT_EQ(rs.kind, ReprKind::X);
    EXPECT_EQ(rs[0], sv(3, {{1, 2.0}, {2, 1.0}}));
    EXPECT_EQ(rs[1], sv(3, {{0, 5.0}}));
}

TEST(ReprX, VolumeRankingSelectsPoints) {
    Dataset ds(SparseMatrix(3, {sv(3, {{0, 5}}), sv(3, {{1, 4}, {2, 5}}), sv(3, {{2, 1}})}),
               SparseMatrix(1, {sv(1, {}), sv(1, {}), sv(1, {})}));
    EXPECT_EQ(select_voluminous_points(ds, 2.0 / 3.0), (std::vector<index_t>{1, 0}));
    const auto rs = build_repr_x(ds, 2.0 / 3.0);
    ASSERT_EQ(rs.ambient_dim, 2u);
    EXPECT_EQ(rs[0], sv(2, {{1, 5.0}}));
    EXPECT_EQ(rs[1], sv(2, {{0, 4.0}}));
    EXPECT_EQ(rs[2], sv(2, {{0, 5.0}}));
}

TEST(ReprX, QuarterFractionUsesCeiling) {
    const Dataset ds = random_dataset(3, 10, 4, 2);
    EXPECT_EQ(build_repr_x(ds, 0.25).ambient_dim, 3u);
    EXPECT_EQ(build_repr_x(ds).ambient_dim, 3u);
}

TEST(ReprX, FullFractionIsTranspose) {
    const Dataset ds = random_dataset(7, 30, 12, 3);
    const auto rs = build_repr_x(ds, 1.0);
    const auto order = select_voluminous_points(ds, 1.0);
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        for (std::size_t j = 0; j < ds.d(); ++j)
            EXPECT_EQ(rs[j][static_cast<index_t>(pos)], ds.features().row(order[pos])[static_cast<index_t>(j)]);
}

TEST(ReprX, SelectionIsMonotoneInFraction) {
    const Dataset ds = random_dataset(11, 40, 8, 2);
    std::vector<index_t> prev;
    for (double f : {0.1, 0.25, 0.5, 0.8, 1.0}) {
        auto cur = select_voluminous_points(ds, f);
        ASSERT_GE(cur.size(), prev.size());
        EXPECT_TRUE(std::equal(prev.begin(), prev.end(), cur.begin()));
        prev = std::move(cur);
    }
}

TEST(ReprX, RejectsBadInput) {
    const Dataset ds = random_dataset(1, 5, 3, 2);
    EXPECT_THROW(build_repr_x(ds, 0.0), InvalidArgument);
    EXPECT_THROW(build_repr_x(ds, 1.5), InvalidArgument);
    EXPECT_THROW(build_repr_x(Dataset(SparseMatrix(3), SparseMatrix(2)), 1.0), InvalidArgument);
}

TEST(ReprXY, SinglePoint) {
    Dataset ds(SparseMatrix(2, {sv(2, {{1, 2}})}), SparseMatrix(4, {label_vector(4, {0, 3})}));
    const auto rs = build_repr_xy(ds, 1.0, 1.0);
    EXPECT_EQ(rs.ambient_dim, 4u);
    EXPECT_EQ(rs[1], sv(4, {{0, 2.0}, {3, 2.0}}));
    EXPECT_TRUE(rs[0].empty());
}

TEST(ReprXY, TwoPointSum) {
    Dataset ds(SparseMatrix(1, {sv(1, {{0, 1}}), sv(1, {{0, 3}})}),
               SparseMatrix(2, {label_vector(2, {0}), label_vector(2, {0, 1})}));
    EXPECT_EQ(build_repr_xy(ds, 1.0, 1.0)[0], sv(2, {{0, 4.0}, {1, 3.0}}));
}

TEST(ReprXY, MatchesDirectSummation) {
    const Dataset ds = random_dataset(5, 25, 9, 6);
    const auto rs = build_repr_xy(ds, 1.0, 1.0);
    for (std::size_t j = 0; j < ds.d(); ++j) {
        std::vector<double> q(ds.L(), 0.0);
        for (std::size_t i = 0; i < ds.n(); ++i)
            for (const Entry& e : ds.labels().row(i)) q[e.index] += ds.features().row(i)[static_cast<index_t>(j)];
        for (std::size_t l = 0; l < ds.L(); ++l) EXPECT_DOUBLE_EQ(rs[j][static_cast<index_t>(l)], q[l]);
    }
}

TEST(ReprXY, AllOnesLabelsGiveColumnSums) {
    const Dataset base = random_dataset(9, 20, 7, 1);
    std::vector<SparseVec> Y(base.n(), label_vector(5, {0, 1, 2, 3, 4}));
    const Dataset ds(base.features(), SparseMatrix(5, std::move(Y)));
    const auto rs = build_repr_xy(ds, 1.0, 1.0);
    for (std::size_t j = 0; j < ds.d(); ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < ds.n(); ++i) col += ds.features().row(i)[static_cast<index_t>(j)];
        for (index_t l = 0; l < 5; ++l) EXPECT_DOUBLE_EQ(rs[j][l], col);
    }
}

TEST(ReprXY, KeepsMostPopularLabels) {
    // label 2 occurs three times, label 0 twice, label 1 once
    Dataset ds(SparseMatrix(1, {sv(1, {{0, 1}}), sv(1, {{0, 1}}), sv(1, {{0, 1}})}),
               SparseMatrix(3, {label_vector(3, {0, 2}), label_vector(3, {2}), label_vector(3, {0, 1, 2})}));
    EXPECT_EQ(select_popular_labels(ds, 0.5), (std::vector<index_t>{0, 2}));
    const auto rs = build_repr_xy(ds, 1.0, 0.5);
    EXPECT_EQ(rs.ambient_dim, 2u);
    EXPECT_EQ(rs[0], sv(2, {{0, 2.0}, {1, 3.0}}));
}

TEST(Normalize, Examples) {
    ReprSet rs;
    rs.ambient_dim = 2;
    rs.reprs = {sv(2, {{0, 3}, {1, 4}}), sv(2, {}), sv(2, {{1, 1}})};
    const auto n = normalize(rs);
    EXPECT_TRUE(n.normalized);
    EXPECT_DOUBLE_EQ(n[0][0], 0.6);
    EXPECT_DOUBLE_EQ(n[0][1], 0.8);
    EXPECT_TRUE(n[1].empty());
    EXPECT_EQ(n[2], rs[2]);
    const auto twice = normalize(n);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(twice[j], n[j]);
}

TEST(Normalize, UnitNormsOnRandomData) {
    const auto rs = normalize(build_repr_x(random_dataset(13, 50, 20, 2), 1.0));
    for (const auto& v : rs.reprs)
        if (!v.empty()) EXPECT_NEAR(norm2(v), 1.0, 1e-12);
}
