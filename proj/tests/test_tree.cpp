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
#include <sstream>

#include "defrag/cluster_metrics.hpp"
#include "defrag/repr.hpp"
#include "defrag/tree.hpp"

using namespace defrag;

namespace {

ReprSet random_reprs(std::uint64_t seed, std::size_t d, std::size_t p, double density) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ReprSet rs;
    rs.ambient_dim = p;
    for (std::size_t j = 0; j < d; ++j) {
        std::vector<Entry> e;
        for (std::size_t t = 0; t < p; ++t)
            if (u(rng) < density) e.push_back({static_cast<index_t>(t), u(rng)});
        rs.reprs.push_back(SparseVec::from_sorted(p, std::move(e)));
    }
    return normalize(std::move(rs));
}

void halving_sizes(std::size_t n, std::size_t d0, std::vector<std::size_t>& out) {
    if (n <= d0) {
        out.push_back(n);
        return;
    }
    halving_sizes((n + 1) / 2, d0, out);
    halving_sizes(n / 2, d0, out);
}

void expect_valid(const FeaturePartition& p, std::size_t d, std::size_t d0) {
    std::vector<int> seen(d, 0);
    for (const auto& c : p.clusters()) {
        EXPECT_GE(c.size(), 1u);
        EXPECT_LE(c.size(), d0);
        if (d > d0) EXPECT_GE(c.size(), (d0 + 1) / 2);
        for (index_t j : c) ++seen[j];
    }
    for (int s : seen) EXPECT_EQ(s, 1);
}

}  // namespace

TEST(MakeTree, SingleLeafAtThreshold) {
    const auto rs = random_reprs(1, 8, 5, 0.5);
    const auto p = leaves(make_tree(rs, {}));
    EXPECT_EQ(p.K(), 1u);
    EXPECT_EQ(p.cluster(0).size(), 8u);
}

TEST(MakeTree, NineFeaturesSplitFiveFour) {
    const auto rs = random_reprs(2, 9, 5, 0.5);
    const auto p = leaves(make_tree(rs, {}));
    ASSERT_EQ(p.K(), 2u);
    EXPECT_EQ(p.cluster(0).size(), 5u);
    EXPECT_EQ(p.cluster(1).size(), 4u);
    EXPECT_LE(balance_factor(p), 2.0);
}

TEST(MakeTree, LeafSizesFollowHalvingRecurrence) {
    const auto rs = random_reprs(3, 5000, 16, 0.3);
    TreeOptions opts;
    opts.seed = 9;
    const auto p = leaves(make_tree(rs, opts));
    std::vector<std::size_t> expected;
    halving_sizes(5000, 8, expected);
    EXPECT_EQ(p.sizes(), expected);
    expect_valid(p, 5000, 8);
    double h = 0.0;
    for (std::size_t k : expected) h -= (k / 5000.0) * std::log(k / 5000.0);
    EXPECT_NEAR(normalized_entropy(p), h / std::log(5000.0), 1e-12);
    EXPECT_LE(balance_factor(p), 2.0);
}

TEST(MakeTree, InvariantsAcrossShapes) {
    std::mt19937_64 gen(77);
    for (int t = 0; t < 40; ++t) {
        const std::size_t d = std::uniform_int_distribution<std::size_t>(1, 700)(gen);
        const std::size_t d0 = std::uniform_int_distribution<std::size_t>(1, 20)(gen);
        const auto rs = random_reprs(gen(), d, 8, 0.4);
        TreeOptions opts;
        opts.d0 = d0;
        opts.seed = gen();
        opts.split_kind = t % 2 ? SplitKind::NDCG : SplitKind::KMeans;
        expect_valid(leaves(make_tree(rs, opts)), d, d0);
    }
}

TEST(MakeTree, IndependentOfThreadCount) {
    const auto rs = random_reprs(4, 900, 12, 0.3);
    for (SplitKind kind : {SplitKind::KMeans, SplitKind::NDCG}) {
        TreeOptions one;
        one.seed = 5;
        one.split_kind = kind;
        TreeOptions many = one;
        many.threads = 4;
        EXPECT_EQ(leaves(make_tree(rs, one)), leaves(make_tree(rs, many)));
    }
}

TEST(MakeTree, SeedChangesPartition) {
    const auto rs = random_reprs(5, 300, 12, 0.3);
    TreeOptions a, b;
    a.seed = 1;
    b.seed = 2;
    EXPECT_FALSE(leaves(make_tree(rs, a)) == leaves(make_tree(rs, b)));
}

TEST(MakeTree, IdenticalReprsStillValid) {
    ReprSet rs;
    rs.ambient_dim = 3;
    rs.reprs.assign(50, SparseVec::from_pairs(3, {{0, 1.0}}));
    TreeOptions opts;
    opts.d0 = 4;
    expect_valid(leaves(make_tree(rs, opts)), 50, 4);
}

TEST(MakeTree, RejectsZeroLeafSize) {
    TreeOptions opts;
    opts.d0 = 0;
    EXPECT_THROW(make_tree(random_reprs(1, 4, 2, 0.5), opts), InvalidArgument);
}

TEST(Ensemble, SeedsAndInvariants) {
    const auto rs = random_reprs(6, 200, 10, 0.3);
    TreeOptions opts;
    opts.seed = 11;
    const auto one = ensemble(rs, 1, opts);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0], leaves(make_tree(rs, opts)));
    const auto three = ensemble(rs, 3, opts);
    ASSERT_EQ(three.size(), 3u);
    for (std::size_t r = 0; r < 3; ++r) {
        expect_valid(three[r], 200, 8);
        opts.seed = 11 + r;
        EXPECT_EQ(three[r], leaves(make_tree(rs, opts)));
    }
    EXPECT_THROW(ensemble(rs, 0, opts), InvalidArgument);
}

TEST(PartitionIo, JsonRoundTrip) {
    const FeaturePartition p(5, {{0, 3}, {1, 2, 4}}, 8, 42);
    const auto j = to_json(p);
    EXPECT_EQ(j.at("K").get<int>(), 2);
    EXPECT_EQ(j.at("seed").get<int>(), 42);
    const auto back = partition_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(back, p);
    EXPECT_EQ(back.d0(), 8u);
}

TEST(PartitionIo, TextRoundTrip) {
    const FeaturePartition p(5, {{0, 3}, {1, 2, 4}});
    std::ostringstream out;
    write_partition_text(out, p);
    EXPECT_EQ(out.str(), "0 0\n1 1\n2 1\n3 0\n4 1\n");
    std::istringstream in(out.str());
    EXPECT_EQ(read_partition_text(in), p);
}

TEST(PartitionIo, RejectsBrokenFiles) {
    EXPECT_THROW(partition_from_json(nlohmann::json::parse(R"({"d":3,"clusters":[[0,1]]})")), DataError);
    EXPECT_THROW(partition_from_json(nlohmann::json::parse(R"({"d":2,"K":3,"clusters":[[0],[1]]})")), DataError);
    std::istringstream bad("0 0\n1 x\n");
    EXPECT_THROW(read_partition_text(bad), ParseError);
    std::istringstream gap("0 0\n1 2\n");
    EXPECT_THROW(read_partition_text(gap), DataError);
}

TEST(FeaturePartition, RejectsOverlapAndGaps) {
    EXPECT_THROW(FeaturePartition(3, {{0, 1}, {1, 2}}), InvariantError);
    EXPECT_THROW(FeaturePartition(3, {{0, 1}}), InvariantError);
    EXPECT_THROW(FeaturePartition(3, {{0, 1, 2}, {}}), InvariantError);
    const auto id = FeaturePartition::identity(4);
    EXPECT_EQ(id.K(), 4u);
    EXPECT_EQ(id.cluster_of(3), 3u);
}
