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

#include "defrag/fiat.hpp"

using namespace defrag;

namespace {

SparseVec sv(std::size_t dim, std::vector<Entry> e) { return SparseVec::from_pairs(dim, std::move(e)); }

using Dense = std::vector<std::vector<double>>;

Dataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t d) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<SparseVec> X, Y;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(d, 0.0);
        for (double& v : x)
            if (u(rng) < 0.25) v = u(rng);
        X.push_back(SparseVec::from_dense(x));
        Y.push_back(label_vector(2, {static_cast<index_t>(i % 2)}));
    }
    return Dataset(SparseMatrix(d, std::move(X)), SparseMatrix(2, std::move(Y)));
}

FeaturePartition random_partition(std::mt19937_64& rng, std::size_t d, std::size_t d0) {
    std::vector<index_t> perm(d);
    std::iota(perm.begin(), perm.end(), index_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<index_t>> clusters;
    for (std::size_t s = 0; s < d;) {
        const std::size_t len = std::min(d - s, 1 + rng() % d0);
        clusters.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(s),
                              perm.begin() + static_cast<std::ptrdiff_t>(s + len));
        std::sort(clusters.back().begin(), clusters.back().end());
        s += len;
    }
    return FeaturePartition(d, std::move(clusters));
}

// Sum over points of outer products, masked to same-cluster pairs.
Dense dense_cooc(const Dataset& ds, const FeaturePartition& part) {
    const std::size_t d = ds.d();
    Dense C(d, std::vector<double>(d, 0.0));
    for (const auto& row : ds.features().row_data()) {
        const auto x = row.to_dense();
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
                if (part.cluster_of(static_cast<index_t>(a)) == part.cluster_of(static_cast<index_t>(b)))
                    C[a][b] += x[a] * x[b];
    }
    return C;
}

std::vector<double> matvec(const Dense& C, const std::vector<double>& x) {
    std::vector<double> y(C.size(), 0.0);
    for (std::size_t a = 0; a < C.size(); ++a)
        for (std::size_t b = 0; b < x.size(); ++b) y[a] += C[a][b] * x[b];
    return y;
}

}  // namespace

TEST(BuildCooc, HandExample) {
    Dataset ds(SparseMatrix(3, {sv(3, {{0, 1}, {1, 2}}), sv(3, {{1, 1}, {2, 3}})}),
               SparseMatrix(1, {label_vector(1, {}), label_vector(1, {})}));
    const FeaturePartition part(3, {{0, 1}, {2}});
    const auto c = build_cooc(ds, part);
    const std::vector<double> b0{1, 2, 2, 5}, b1{9};
    EXPECT_TRUE(std::equal(b0.begin(), b0.end(), c.block(0).begin(), c.block(0).end()));
    EXPECT_TRUE(std::equal(b1.begin(), b1.end(), c.block(1).begin(), c.block(1).end()));
    EXPECT_EQ(c.at(0, 2), 0.0);
    EXPECT_EQ(impute(c, sv(3, {{1, 1}})), sv(3, {{0, 2}, {1, 5}}));
    EXPECT_TRUE(impute(c, sv(3, {})).empty());
}

TEST(BuildCooc, EmptyDatasetAndIdentityPartition) {
    const auto empty = build_cooc(Dataset(SparseMatrix(4), SparseMatrix(1)), FeaturePartition(4, {{0, 1}, {2, 3}}));
    for (std::size_t k = 0; k < empty.partition().K(); ++k)
        for (double v : empty.block(k)) EXPECT_EQ(v, 0.0);

    std::mt19937_64 rng(3);
    const Dataset ds = random_dataset(rng, 20, 6);
    const auto c = build_cooc(ds, FeaturePartition::identity(6));
    for (index_t j = 0; j < 6; ++j) {
        double sq = 0.0;
        for (const auto& r : ds.features().row_data()) sq += r[j] * r[j];
        EXPECT_NEAR(c.block(j)[0], sq, 1e-12);
    }
}

TEST(BuildCooc, DimensionMismatch) {
    Dataset ds(SparseMatrix(3, {sv(3, {{0, 1}})}), SparseMatrix(1, {label_vector(1, {})}));
    EXPECT_THROW(build_cooc(ds, FeaturePartition::identity(4)), InvalidArgument);
    const auto c = build_cooc(ds, FeaturePartition::identity(3));
    EXPECT_THROW(impute(c, sv(4, {})), InvalidArgument);
}

TEST(BuildCooc, MatchesDenseOracle) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 30; ++t) {
        const std::size_t d = 2 + rng() % 63, d0 = 1 + rng() % 12;
        const Dataset ds = random_dataset(rng, 1 + rng() % 40, d);
        const auto part = random_partition(rng, d, d0);
        const auto c = build_cooc(ds, part);
        const Dense C = dense_cooc(ds, part);
        for (index_t a = 0; a < d; ++a)
            for (index_t b = 0; b < d; ++b) {
                EXPECT_NEAR(c.at(a, b), C[a][b], 1e-9);
                EXPECT_EQ(c.at(a, b), c.at(b, a));
            }
        EXPECT_LE(c.stored_entries(), d * d0);

        std::vector<double> x(d, 0.0);
        for (double& v : x)
            if (rng() % 3 == 0) v = static_cast<double>(rng() % 100) / 10.0;
        const auto got = impute(c, SparseVec::from_dense(x)).to_dense();
        const auto want = matvec(C, x);
        for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(got[j], want[j], 1e-9);
    }
}

TEST(Impute, LinearAndBlockLocal) {
    std::mt19937_64 rng(9);
    const Dataset ds = random_dataset(rng, 30, 24);
    const auto part = random_partition(rng, 24, 5);
    const auto c = build_cooc(ds, part);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> x(24), y(24);
        for (double& v : x) v = rng() % 2 ? u(rng) : 0.0;
        for (double& v : y) v = rng() % 2 ? u(rng) : 0.0;
        const double a = u(rng), b = u(rng);
        std::vector<double> mix(24);
        for (std::size_t j = 0; j < 24; ++j) mix[j] = a * x[j] + b * y[j];
        const auto lhs = impute(c, SparseVec::from_dense(mix)).to_dense();
        const auto ix = impute(c, SparseVec::from_dense(x)).to_dense();
        const auto iy = impute(c, SparseVec::from_dense(y)).to_dense();
        for (std::size_t j = 0; j < 24; ++j) EXPECT_NEAR(lhs[j], a * ix[j] + b * iy[j], 1e-9);
    }
    const auto& members = part.cluster(0);
    const auto out = impute(c, sv(24, {{members[0], 1.0}}));
    for (const Entry& e : out) EXPECT_EQ(part.cluster_of(e.index), 0u);
}

TEST(RowNormalize, RowsSumToOne) {
    std::mt19937_64 rng(10);
    const Dataset ds = random_dataset(rng, 25, 16);
    const auto c = row_normalize(build_cooc(ds, random_partition(rng, 16, 4)));
    for (std::size_t k = 0; k < c.partition().K(); ++k) {
        const std::size_t dk = c.partition().cluster(k).size();
        for (std::size_t a = 0; a < dk; ++a) {
            double s = 0.0;
            for (std::size_t b = 0; b < dk; ++b) s += c.block(k)[a * dk + b];
            if (s != 0.0) EXPECT_NEAR(s, 1.0, 1e-12);
        }
    }
}

TEST(ImputeBlend, MassAndEndpoints) {
    Dataset ds(SparseMatrix(3, {sv(3, {{0, 1}, {1, 2}}), sv(3, {{1, 1}, {2, 3}})}),
               SparseMatrix(1, {label_vector(1, {}), label_vector(1, {})}));
    const auto c = build_cooc(ds, FeaturePartition(3, {{0, 1}, {2}}));
    const auto x = sv(3, {{1, 1}});
    EXPECT_EQ(impute_blend(c, x, 1.0), x);
    const auto pure = impute_blend(c, x, 0.0);
    EXPECT_NEAR(pure[0], 2.0 / 7.0, 1e-15);
    EXPECT_NEAR(pure[1], 5.0 / 7.0, 1e-15);
    const auto half = impute_blend(c, x, 0.5);
    EXPECT_NEAR(half[0], 1.0 / 7.0, 1e-15);
    EXPECT_NEAR(half[1], 0.5 + 2.5 / 7.0, 1e-15);
    EXPECT_NEAR(norm1(half), norm1(x), 1e-15);
    EXPECT_THROW(impute_blend(c, x, 1.5), InvalidArgument);
}

TEST(Erase, Counts) {
    Rng rng(4);
    const auto x = sv(10, {{0, 1}, {3, 2}, {5, 3}, {9, 4}});
    EXPECT_EQ(erase(x, 0.0, rng), x);
    EXPECT_TRUE(erase(x, 1.0, rng).empty());
    for (int t = 0; t < 20; ++t) {
        const auto half = erase(x, 0.5, rng);
        EXPECT_EQ(half.nnz(), 2u);
        for (const Entry& e : half) EXPECT_EQ(x[e.index], e.value);
    }
    EXPECT_EQ(erase(x, 0.25, rng).nnz(), 3u);
    EXPECT_THROW(erase(x, -0.1, rng), InvalidArgument);
}

TEST(Erase, UniformOverEntries) {
    Rng rng(8);
    const auto x = sv(4, {{0, 1}, {1, 1}, {2, 1}, {3, 1}});
    std::vector<int> kept(4, 0);
    for (int t = 0; t < 4000; ++t)
        for (const Entry& e : erase(x, 0.5, rng)) ++kept[e.index];
    for (int k : kept) EXPECT_NEAR(k / 4000.0, 0.5, 0.05);
}

TEST(CoocIo, JsonRoundTrip) {
    std::mt19937_64 rng(12);
    const Dataset ds = random_dataset(rng, 15, 9);
    const auto c = build_cooc(ds, random_partition(rng, 9, 3));
    const auto back = cooc_from_json(nlohmann::json::parse(to_json(c).dump()));
    EXPECT_EQ(back.partition(), c.partition());
    for (index_t a = 0; a < 9; ++a)
        for (index_t b = 0; b < 9; ++b) EXPECT_EQ(back.at(a, b), c.at(a, b));
    auto j = to_json(c);
    j["blocks"][0].push_back(1.0);
    EXPECT_THROW(cooc_from_json(j), DataError);
}
