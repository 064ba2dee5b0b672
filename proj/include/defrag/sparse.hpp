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

#ifndef DEFRAG_SPARSE_HPP
#define DEFRAG_SPARSE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "defrag/error.hpp"

namespace defrag {

using index_t = std::uint32_t;

struct Entry {
    index_t index = 0;
    double value = 0.0;

    friend bool operator==(const Entry&, const Entry&) = default;
};

/// Sparse vector with an explicit ambient dimension.
///
/// Entries are kept sorted by strictly increasing index and never hold an
/// explicit zero; every construction path enforces both.
class SparseVec {
public:
    SparseVec() = default;
    explicit SparseVec(std::size_t dim) : dim_(dim) {}

    /// Entries in any order. Duplicate indices are rejected, zeros dropped.
    static SparseVec from_pairs(std::size_t dim, std::vector<Entry> entries) {
        std::sort(entries.begin(), entries.end(),
                  [](const Entry& a, const Entry& b) { return a.index < b.index; });
        return from_sorted(dim, std::move(entries));
    }

    /// Entries already sorted by strictly increasing index; zeros dropped.
    static SparseVec from_sorted(std::size_t dim, std::vector<Entry> entries) {
        SparseVec v(dim);
        std::size_t out = 0;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const Entry& e = entries[i];
            if (e.index >= dim)
                throw InvalidArgument("sparse index " + std::to_string(e.index) + " out of range for dim " +
                                      std::to_string(dim));
            if (i > 0 && entries[i - 1].index >= e.index)
                throw InvalidArgument("sparse indices must be strictly increasing (index " +
                                      std::to_string(e.index) + ")");
            if (e.value != 0.0) entries[out++] = e;
        }
        entries.resize(out);
        v.entries_ = std::move(entries);
        return v;
    }

    static SparseVec from_dense(std::span<const double> dense) {
        SparseVec v(dense.size());
        for (std::size_t j = 0; j < dense.size(); ++j)
            if (dense[j] != 0.0) v.entries_.push_back({static_cast<index_t>(j), dense[j]});
        return v;
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t nnz() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    std::span<const Entry> entries() const noexcept { return entries_; }
    auto begin() const noexcept { return entries_.begin(); }
    auto end() const noexcept { return entries_.end(); }

    double operator[](index_t j) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), j,
                                   [](const Entry& e, index_t idx) { return e.index < idx; });
        return (it != entries_.end() && it->index == j) ? it->value : 0.0;
    }

    std::vector<double> to_dense() const {
        std::vector<double> out(dim_, 0.0);
        for (const Entry& e : entries_) out[e.index] = e.value;
        return out;
    }

    SparseVec scaled(double s) const {
        std::vector<Entry> out;
        out.reserve(entries_.size());
        for (const Entry& e : entries_) out.push_back({e.index, e.value * s});
        return from_sorted(dim_, std::move(out));
    }

    friend bool operator==(const SparseVec&, const SparseVec&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<Entry> entries_;
};

/// Row-oriented sparse matrix; every row shares the column dimension.
class SparseMatrix {
public:
    SparseMatrix() = default;
    explicit SparseMatrix(std::size_t cols) : cols_(cols) {}

    SparseMatrix(std::size_t cols, std::vector<SparseVec> rows) : cols_(cols), rows_(std::move(rows)) {
        for (const SparseVec& r : rows_)
            if (r.dim() != cols_)
                throw InvalidArgument("row dimension " + std::to_string(r.dim()) + " does not match " +
                                      std::to_string(cols_) + " columns");
    }

    std::size_t rows() const noexcept { return rows_.size(); }
    std::size_t cols() const noexcept { return cols_; }
    const SparseVec& row(std::size_t i) const { return rows_.at(i); }
    std::span<const SparseVec> row_data() const noexcept { return rows_; }

    std::size_t nnz() const noexcept {
        std::size_t total = 0;
        for (const SparseVec& r : rows_) total += r.nnz();
        return total;
    }

    SparseMatrix transposed() const {
        std::vector<std::vector<Entry>> cols(cols_);
        for (std::size_t i = 0; i < rows_.size(); ++i)
            for (const Entry& e : rows_[i]) cols[e.index].push_back({static_cast<index_t>(i), e.value});
        std::vector<SparseVec> out;
        out.reserve(cols_);
        for (auto& c : cols) out.push_back(SparseVec::from_sorted(rows_.size(), std::move(c)));
        return SparseMatrix(rows_.size(), std::move(out));
    }

    friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
    std::size_t cols_ = 0;
    std::vector<SparseVec> rows_;
};

inline double dot(const SparseVec& a, const SparseVec& b) {
    if (a.dim() != b.dim())
        throw InvalidArgument("dot: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                              std::to_string(b.dim()) + ")");
    auto ia = a.begin(), ib = b.begin();
    double acc = 0.0;
    while (ia != a.end() && ib != b.end()) {
        if (ia->index < ib->index) {
            ++ia;
        } else if (ib->index < ia->index) {
            ++ib;
        } else {
            acc += ia->value * ib->value;
            ++ia;
            ++ib;
        }
    }
    return acc;
}

/// Dot product against a dense vector of the same dimension.
inline double dot(std::span<const double> dense, const SparseVec& v) {
    if (dense.size() != v.dim()) throw InvalidArgument("dot: dense/sparse dimension mismatch");
    double acc = 0.0;
    for (const Entry& e : v) acc += dense[e.index] * e.value;
    return acc;
}

inline double norm1(const SparseVec& v) {
    double acc = 0.0;
    for (const Entry& e : v) acc += std::abs(e.value);
    return acc;
}

inline double squared_norm(const SparseVec& v) {
    double acc = 0.0;
    for (const Entry& e : v) acc += e.value * e.value;
    return acc;
}

inline double norm2(const SparseVec& v) { return std::sqrt(squared_norm(v)); }

inline double norm(const SparseVec& v, int p) {
    if (p == 1) return norm1(v);
    if (p == 2) return norm2(v);
    throw InvalidArgument("norm: p must be 1 or 2");
}

inline double sum(const SparseVec& v) {
    double acc = 0.0;
    for (const Entry& e : v) acc += e.value;
    return acc;
}

/// acc[j] += s * v_j over the stored entries of v.
inline void axpy(std::span<double> acc, double s, const SparseVec& v) {
    if (acc.size() != v.dim())
        throw InvalidArgument("axpy: accumulator length " + std::to_string(acc.size()) +
                              " does not match vector dim " + std::to_string(v.dim()));
    for (const Entry& e : v) acc[e.index] += s * e.value;
}

namespace detail {

// Dense accumulator that remembers which slots were touched so it can be
// cleared in time proportional to the work done, not to its length.
class Accumulator {
public:
    explicit Accumulator(std::size_t dim = 0) : values_(dim, 0.0), seen_(dim, 0) {}

    std::size_t dim() const noexcept { return values_.size(); }

    void add(index_t j, double v) {
        if (!seen_[j]) {
            seen_[j] = 1;
            touched_.push_back(j);
        }
        values_[j] += v;
    }

    void add(double s, const SparseVec& v) {
        for (const Entry& e : v) add(e.index, s * e.value);
    }

    double operator[](index_t j) const noexcept { return values_[j]; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<const index_t> touched() const noexcept { return touched_; }

    // Touched slots in increasing index order as a sparse vector.
    SparseVec to_sparse() {
        std::sort(touched_.begin(), touched_.end());
        std::vector<Entry> out;
        out.reserve(touched_.size());
        for (index_t j : touched_) out.push_back({j, values_[j]});
        return SparseVec::from_sorted(values_.size(), std::move(out));
    }

    void clear() {
        for (index_t j : touched_) {
            values_[j] = 0.0;
            seen_[j] = 0;
        }
        touched_.clear();
    }

private:
    std::vector<double> values_;
    std::vector<unsigned char> seen_;
    std::vector<index_t> touched_;
};

}  // namespace detail
}  // namespace defrag

#endif  // DEFRAG_SPARSE_HPP
