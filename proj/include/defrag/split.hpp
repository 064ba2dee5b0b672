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

#ifndef DEFRAG_SPLIT_HPP
#define DEFRAG_SPLIT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "defrag/repr.hpp"

namespace defrag {

using Rng = std::mt19937_64;

/// Outcome of one balanced node split. `s_plus` holds ceil(|S|/2) features,
/// `s_minus` the rest; both are sorted by feature id.
struct SplitResult {
    std::vector<index_t> s_plus;
    std::vector<index_t> s_minus;
    int iterations = 0;
    bool converged = false;
    /// k-means only: sum of member-to-own-centroid dot products after each
    /// centroid update. Non-decreasing until the partition repeats.
    std::vector<double> objective;
};

struct SplitOptions {
    int max_iters = 20;
    int init_redraws = 5;
    /// Base of the logarithm in DCG discounts. Cancels in every nDCG value.
    double log_base = std::numbers::e;
};

/// Top ceil(|S|/2) members by score go to s_plus, ties by ascending feature
/// id; s_minus keeps the remainder in the same (score-descending) order.
inline SplitResult balanced_halves(std::span<const double> scores, std::span<const index_t> S) {
    if (S.empty()) throw InvalidArgument("balanced_halves: empty feature set");
    if (scores.size() != S.size()) throw InvalidArgument("balanced_halves: one score per feature required");
    std::vector<std::size_t> order(S.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return S[a] < S[b];
    });
    const std::size_t half = (S.size() + 1) / 2;
    SplitResult r;
    r.s_plus.reserve(half);
    r.s_minus.reserve(S.size() - half);
    for (std::size_t t = 0; t < order.size(); ++t) (t < half ? r.s_plus : r.s_minus).push_back(S[order[t]]);
    return r;
}

// ---------------------------------------------------------------------------
// Rankings and DCG over dense nonnegative vectors.

/// A permutation of [0, p): coordinates in decreasing value order.
struct Ranking {
    std::vector<index_t> order;
};

/// Coordinates by decreasing value, ties by ascending coordinate index.
inline Ranking rank(std::span<const double> v) {
    Ranking r;
    r.order.resize(v.size());
    std::iota(r.order.begin(), r.order.end(), index_t{0});
    std::stable_sort(r.order.begin(), r.order.end(), [&](index_t a, index_t b) { return v[a] > v[b]; });
    return r;
}

namespace detail {

// 1 / log_b(1 + j) for 1-based rank position j.
inline double discount(std::size_t j, double log_base) {
    return std::log(log_base) / std::log(1.0 + static_cast<double>(j));
}

inline bool is_permutation_of(const Ranking& r, std::size_t p) {
    if (r.order.size() != p) return false;
    std::vector<unsigned char> seen(p, 0);
    for (index_t c : r.order) {
        if (c >= p || seen[c]) return false;
        seen[c] = 1;
    }
    return true;
}

}  // namespace detail

inline double dcg(const Ranking& r, std::span<const double> v, double log_base = std::numbers::e) {
    if (!detail::is_permutation_of(r, v.size())) throw InvalidArgument("dcg: ranking is not a permutation of v");
    double acc = 0.0;
    for (std::size_t j = 0; j < r.order.size(); ++j) {
        const double x = v[r.order[j]];
        if (x < 0.0) throw InvalidArgument("dcg: negative value");
        if (x != 0.0) acc += x * detail::discount(j + 1, log_base);
    }
    return acc;
}

/// 1 / DCG(rank(v), v); defined as 0 for the all-zero vector.
inline double ideal_inverse(std::span<const double> v, double log_base = std::numbers::e) {
    const double best = dcg(rank(v), v, log_base);
    return best > 0.0 ? 1.0 / best : 0.0;
}

inline double ndcg(const Ranking& r, std::span<const double> v, double log_base = std::numbers::e) {
    const double inv = ideal_inverse(v, log_base);
    return inv == 0.0 ? 0.0 : inv * dcg(r, v, log_base);
}

// ---------------------------------------------------------------------------
// Splitting routines.

/// Reusable scratch buffers sized to the representative dimension.
class SplitWorkspace {
public:
    explicit SplitWorkspace(std::size_t dim)
        : plus_(dim), minus_(dim), pos_plus_(dim, -1), pos_minus_(dim, -1) {}

    std::size_t dim() const noexcept { return plus_.dim(); }

private:
    friend struct SplitAccess;
    detail::Accumulator plus_;
    detail::Accumulator minus_;
    std::vector<std::int64_t> pos_plus_;
    std::vector<std::int64_t> pos_minus_;
};

struct SplitAccess {
    static detail::Accumulator& plus(SplitWorkspace& w) { return w.plus_; }
    static detail::Accumulator& minus(SplitWorkspace& w) { return w.minus_; }
    static std::vector<std::int64_t>& pos_plus(SplitWorkspace& w) { return w.pos_plus_; }
    static std::vector<std::int64_t>& pos_minus(SplitWorkspace& w) { return w.pos_minus_; }
};

namespace detail {

inline bool same_partition(std::vector<index_t> a, const std::vector<index_t>& sorted_b) {
    std::sort(a.begin(), a.end());
    return a == sorted_b;
}

inline void finalize(SplitResult& r) {
    std::sort(r.s_plus.begin(), r.s_plus.end());
    std::sort(r.s_minus.begin(), r.s_minus.end());
}

// Draws two positions in S whose representatives differ. Returns false when
// every attempt hit identical vectors.
inline bool draw_distinct_pair(std::span<const index_t> S, const ReprSet& rs, Rng& rng, int redraws,
                               std::size_t& a, std::size_t& b) {
    const std::size_t m = S.size();
    for (int attempt = 0; attempt <= redraws; ++attempt) {
        std::uniform_int_distribution<std::size_t> first(0, m - 1);
        std::uniform_int_distribution<std::size_t> second(0, m - 2);
        a = first(rng);
        b = second(rng);
        if (b >= a) ++b;
        if (!(rs[S[a]] == rs[S[b]])) return true;
    }
    return false;
}

inline SplitResult index_order_split(std::span<const index_t> S) {
    std::vector<double> zeros(S.size(), 0.0);
    return balanced_halves(zeros, S);
}

inline void check_split_input(std::span<const index_t> S, const ReprSet& rs, const SplitWorkspace& ws) {
    if (S.size() < 2) throw InvalidArgument("split: need at least two features");
    if (ws.dim() != rs.ambient_dim) throw InvalidArgument("split: workspace dimension mismatch");
    for (index_t j : S)
        if (j >= rs.size()) throw InvalidArgument("split: feature id out of range");
}

}  // namespace detail

/// Balanced spherical 2-means: scores (c+ - c-)^T z, balanced assignment,
/// centroid means (not re-normalized), until the partition repeats.
inline SplitResult kmeans_split(std::span<const index_t> S, const ReprSet& rs, Rng& rng, SplitWorkspace& ws,
                                const SplitOptions& opts = {}) {
    detail::check_split_input(S, rs, ws);
    auto& cp = SplitAccess::plus(ws);
    auto& cm = SplitAccess::minus(ws);
    cp.clear();
    cm.clear();

    auto set_centroids = [&](const SplitResult& part) {
        cp.clear();
        cm.clear();
        const double wp = 1.0 / static_cast<double>(part.s_plus.size());
        const double wm = 1.0 / static_cast<double>(part.s_minus.size());
        for (index_t j : part.s_plus) cp.add(wp, rs[j]);
        for (index_t j : part.s_minus) cm.add(wm, rs[j]);
    };
    auto squared = [](const detail::Accumulator& acc) {
        double s = 0.0;
        for (index_t j : acc.touched()) s += acc[j] * acc[j];
        return s;
    };

    SplitResult result;
    std::vector<index_t> prev_plus;
    bool have_prev = false;
    std::size_t a = 0, b = 0;
    if (detail::draw_distinct_pair(S, rs, rng, opts.init_redraws, a, b)) {
        cp.add(1.0, rs[S[a]]);
        cm.add(1.0, rs[S[b]]);
    } else {
        auto start = detail::index_order_split(S);
        set_centroids(start);
        prev_plus = start.s_plus;
        std::sort(prev_plus.begin(), prev_plus.end());
        have_prev = true;
    }

    std::vector<double> scores(S.size());
    SplitResult halves;
    for (int it = 1; it <= std::max(1, opts.max_iters); ++it) {
        for (std::size_t t = 0; t < S.size(); ++t) {
            double s = 0.0;
            for (const Entry& e : rs[S[t]]) s += (cp[e.index] - cm[e.index]) * e.value;
            scores[t] = s;
        }
        halves = balanced_halves(scores, S);
        result.iterations = it;
        if (have_prev && detail::same_partition(halves.s_plus, prev_plus)) {
            result.converged = true;
            break;
        }
        prev_plus = halves.s_plus;
        std::sort(prev_plus.begin(), prev_plus.end());
        have_prev = true;
        set_centroids(halves);
        result.objective.push_back(static_cast<double>(halves.s_plus.size()) * squared(cp) +
                                   static_cast<double>(halves.s_minus.size()) * squared(cm));
    }
    cp.clear();
    cm.clear();
    result.s_plus = std::move(halves.s_plus);
    result.s_minus = std::move(halves.s_minus);
    detail::finalize(result);
    return result;
}

inline SplitResult kmeans_split(std::span<const index_t> S, const ReprSet& rs, Rng& rng,
                                const SplitOptions& opts = {}) {
    SplitWorkspace ws(rs.ambient_dim);
    return kmeans_split(S, rs, rng, ws, opts);
}

namespace detail {

// A ranking over [0, p) in which the support of a nonnegative sparse vector
// comes first (by decreasing value) and all remaining coordinates follow in
// ascending index order. Positions are materialized only for the support.
class SparseRanking {
public:
    void assign(const SparseVec& v, std::vector<std::int64_t>& pos) {
        release();
        pos_ = &pos;
        std::vector<Entry> es(v.begin(), v.end());
        std::stable_sort(es.begin(), es.end(), [](const Entry& x, const Entry& y) { return x.value > y.value; });
        support_.clear();
        for (std::size_t t = 0; t < es.size(); ++t) {
            pos[es[t].index] = static_cast<std::int64_t>(t);
            support_.push_back(es[t].index);
        }
        std::sort(support_.begin(), support_.end());
    }

    // 0-based rank position of coordinate c.
    std::size_t position(index_t c) const {
        const std::int64_t p = (*pos_)[c];
        if (p >= 0) return static_cast<std::size_t>(p);
        const auto below = std::lower_bound(support_.begin(), support_.end(), c) - support_.begin();
        return support_.size() + c - static_cast<std::size_t>(below);
    }

    void release() {
        if (pos_ != nullptr)
            for (index_t c : support_) (*pos_)[c] = -1;
        support_.clear();
    }

private:
    std::vector<std::int64_t>* pos_ = nullptr;
    std::vector<index_t> support_;
};

inline double sparse_dcg(const SparseRanking& r, const SparseVec& v, double log_base) {
    double acc = 0.0;
    for (const Entry& e : v) acc += e.value * discount(r.position(e.index) + 1, log_base);
    return acc;
}

inline double sparse_ideal_inverse(const SparseVec& v, double log_base) {
    std::vector<double> vals;
    vals.reserve(v.nnz());
    for (const Entry& e : v) vals.push_back(e.value);
    std::sort(vals.begin(), vals.end(), std::greater<>());
    double best = 0.0;
    for (std::size_t t = 0; t < vals.size(); ++t) best += vals[t] * discount(t + 1, log_base);
    return best > 0.0 ? 1.0 / best : 0.0;
}

}  // namespace detail

/// Balanced nDCG split: scores nDCG(r+, z) - nDCG(r-, z), centroid rankings
/// rank(sum of I(z) z) over each half, until the partition repeats.
inline SplitResult ndcg_split(std::span<const index_t> S, const ReprSet& rs, Rng& rng, SplitWorkspace& ws,
                              const SplitOptions& opts = {}) {
    detail::check_split_input(S, rs, ws);
    for (index_t j : S)
        for (const Entry& e : rs[j])
            if (e.value < 0.0) throw InvalidArgument("ndcg_split: representative vectors must be nonnegative");

    std::vector<double> inv(S.size());
    for (std::size_t t = 0; t < S.size(); ++t) inv[t] = detail::sparse_ideal_inverse(rs[S[t]], opts.log_base);

    detail::SparseRanking rp, rm;
    auto& acc = SplitAccess::plus(ws);
    std::vector<std::pair<index_t, double>> inv_by_id(S.size());
    for (std::size_t t = 0; t < S.size(); ++t) inv_by_id[t] = {S[t], inv[t]};
    std::sort(inv_by_id.begin(), inv_by_id.end());
    auto weight_of = [&](index_t j) {
        auto it = std::lower_bound(inv_by_id.begin(), inv_by_id.end(), std::pair<index_t, double>{j, -1.0});
        return it->second;
    };

    auto set_centroids = [&](const SplitResult& part) {
        acc.clear();
        for (index_t j : part.s_plus) acc.add(weight_of(j), rs[j]);
        rp.assign(acc.to_sparse(), SplitAccess::pos_plus(ws));
        acc.clear();
        for (index_t j : part.s_minus) acc.add(weight_of(j), rs[j]);
        rm.assign(acc.to_sparse(), SplitAccess::pos_minus(ws));
        acc.clear();
    };

    SplitResult result;
    std::vector<index_t> prev_plus;
    bool have_prev = false;
    std::size_t a = 0, b = 0;
    if (detail::draw_distinct_pair(S, rs, rng, opts.init_redraws, a, b)) {
        rp.assign(rs[S[a]], SplitAccess::pos_plus(ws));
        rm.assign(rs[S[b]], SplitAccess::pos_minus(ws));
    } else {
        auto start = detail::index_order_split(S);
        set_centroids(start);
        prev_plus = start.s_plus;
        std::sort(prev_plus.begin(), prev_plus.end());
        have_prev = true;
    }

    std::vector<double> scores(S.size());
    SplitResult halves;
    for (int it = 1; it <= std::max(1, opts.max_iters); ++it) {
        for (std::size_t t = 0; t < S.size(); ++t) {
            const SparseVec& z = rs[S[t]];
            scores[t] = inv[t] * (detail::sparse_dcg(rp, z, opts.log_base) - detail::sparse_dcg(rm, z, opts.log_base));
        }
        halves = balanced_halves(scores, S);
        result.iterations = it;
        if (have_prev && detail::same_partition(halves.s_plus, prev_plus)) {
            result.converged = true;
            break;
        }
        prev_plus = halves.s_plus;
        std::sort(prev_plus.begin(), prev_plus.end());
        have_prev = true;
        set_centroids(halves);
    }
    rp.release();
    rm.release();
    result.s_plus = std::move(halves.s_plus);
    result.s_minus = std::move(halves.s_minus);
    detail::finalize(result);
    return result;
}

inline SplitResult ndcg_split(std::span<const index_t> S, const ReprSet& rs, Rng& rng,
                              const SplitOptions& opts = {}) {
    SplitWorkspace ws(rs.ambient_dim);
    return ndcg_split(S, rs, rng, ws, opts);
}

}  // namespace defrag

#endif  // DEFRAG_SPLIT_HPP
