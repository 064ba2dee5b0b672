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

#ifndef DEFRAG_XC_METRICS_HPP
#define DEFRAG_XC_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "defrag/dataset.hpp"

namespace defrag {

struct ScoredLabel {
    index_t label = 0;
    double score = 0.0;

    friend bool operator==(const ScoredLabel&, const ScoredLabel&) = default;
};

/// Per test point, labels ranked by non-increasing score.
using RankedLabels = std::vector<ScoredLabel>;
using Predictions = std::vector<RankedLabels>;

/// Throws unless every list has non-increasing scores and unique labels.
inline void validate_predictions(const Predictions& preds) {
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto& r = preds[i];
        std::vector<index_t> ids;
        ids.reserve(r.size());
        for (std::size_t t = 0; t < r.size(); ++t) {
            if (t > 0 && r[t].score > r[t - 1].score)
                throw InvalidArgument("prediction " + std::to_string(i) + ": scores must be non-increasing");
            ids.push_back(r[t].label);
        }
        std::sort(ids.begin(), ids.end());
        if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
            throw InvalidArgument("prediction " + std::to_string(i) + ": duplicate label");
    }
}

namespace detail {

inline void check_eval_input(const Predictions& preds, const SparseMatrix& truth, std::size_t k, bool need_length) {
    if (k < 1) throw InvalidArgument("k must be at least 1");
    if (preds.size() != truth.rows())
        throw InvalidArgument("predictions (" + std::to_string(preds.size()) + ") and ground truth (" +
                              std::to_string(truth.rows()) + ") differ in length");
    if (need_length)
        for (std::size_t i = 0; i < preds.size(); ++i)
            if (preds[i].size() < k)
                throw InvalidArgument("prediction " + std::to_string(i) + " ranks fewer than k=" + std::to_string(k) +
                                      " labels");
}

inline bool is_true(const SparseVec& truth_row, index_t l) { return l < truth_row.dim() && truth_row[l] != 0.0; }

}  // namespace detail

inline double precision_at_k(const Predictions& preds, const SparseMatrix& truth, std::size_t k) {
    detail::check_eval_input(preds, truth, k, true);
    if (preds.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        std::size_t hits = 0;
        for (std::size_t t = 0; t < k; ++t) hits += detail::is_true(truth.row(i), preds[i][t].label);
        acc += static_cast<double>(hits) / static_cast<double>(k);
    }
    return acc / static_cast<double>(preds.size());
}

inline double ndcg_at_k(const Predictions& preds, const SparseMatrix& truth, std::size_t k) {
    detail::check_eval_input(preds, truth, k, true);
    if (preds.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const std::size_t m = std::min(k, truth.row(i).nnz());
        if (m == 0) continue;
        double gain = 0.0, ideal = 0.0;
        for (std::size_t t = 0; t < k; ++t)
            if (detail::is_true(truth.row(i), preds[i][t].label)) gain += 1.0 / std::log(2.0 + static_cast<double>(t));
        for (std::size_t t = 0; t < m; ++t) ideal += 1.0 / std::log(2.0 + static_cast<double>(t));
        acc += gain / ideal;
    }
    return acc / static_cast<double>(preds.size());
}

struct PropensityModel {
    std::vector<double> p;
    double A = 0.55;
    double B = 1.5;
};

/// p_l = 1 / (1 + C exp(-A ln(N_l + B))), C = (ln n - 1)(B + 1)^A, with N_l
/// the training frequency of label l.
inline PropensityModel propensities(const SparseMatrix& Y_train, double A = 0.55, double B = 1.5) {
    const std::size_t n = Y_train.rows();
    if (n < 2) throw InvalidArgument("propensities: need at least two training points");
    std::vector<double> freq(Y_train.cols(), 0.0);
    for (const SparseVec& y : Y_train.row_data())
        for (const Entry& e : y) freq[e.index] += 1.0;
    const double C = (std::log(static_cast<double>(n)) - 1.0) * std::pow(B + 1.0, A);
    PropensityModel m;
    m.A = A;
    m.B = B;
    m.p.resize(freq.size());
    for (std::size_t l = 0; l < freq.size(); ++l) m.p[l] = 1.0 / (1.0 + C * std::exp(-A * std::log(freq[l] + B)));
    return m;
}

namespace detail {

inline std::vector<double> truth_weights_desc(const SparseVec& truth_row, const PropensityModel& prop) {
    std::vector<double> w;
    w.reserve(truth_row.nnz());
    for (const Entry& e : truth_row) {
        if (e.index >= prop.p.size()) throw InvalidArgument("propensity missing for a ground-truth label");
        w.push_back(1.0 / prop.p[e.index]);
    }
    std::sort(w.begin(), w.end(), std::greater<>());
    return w;
}

}  // namespace detail

/// Propensity-scored precision. Each hit gains 1/p_l; a point's score is
/// normalized by the mean of its best min(k, |truth|) gains, so the metric
/// lies in [0, 1] and equals P@k when every propensity is 1.
inline double psp_at_k(const Predictions& preds, const SparseMatrix& truth, const PropensityModel& prop,
                       std::size_t k) {
    detail::check_eval_input(preds, truth, k, true);
    if (preds.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto w = detail::truth_weights_desc(truth.row(i), prop);
        const std::size_t m = std::min(k, w.size());
        if (m == 0) continue;
        const double mean_best = std::accumulate(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(m), 0.0) /
                                 static_cast<double>(m);
        double gain = 0.0;
        for (std::size_t t = 0; t < k; ++t) {
            const index_t l = preds[i][t].label;
            if (detail::is_true(truth.row(i), l)) gain += 1.0 / prop.p[l];
        }
        acc += std::min(1.0, gain / (static_cast<double>(k) * mean_best));
    }
    return acc / static_cast<double>(preds.size());
}

/// Propensity-scored nDCG: discounted 1/p_l gains over the ideal ordering of
/// the point's own true-label gains.
inline double psndcg_at_k(const Predictions& preds, const SparseMatrix& truth, const PropensityModel& prop,
                          std::size_t k) {
    detail::check_eval_input(preds, truth, k, true);
    if (preds.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto w = detail::truth_weights_desc(truth.row(i), prop);
        const std::size_t m = std::min(k, w.size());
        if (m == 0) continue;
        double gain = 0.0, ideal = 0.0;
        for (std::size_t t = 0; t < k; ++t) {
            const index_t l = preds[i][t].label;
            if (detail::is_true(truth.row(i), l)) gain += (1.0 / prop.p[l]) / std::log(2.0 + static_cast<double>(t));
        }
        for (std::size_t t = 0; t < m; ++t) ideal += w[t] / std::log(2.0 + static_cast<double>(t));
        acc += std::min(1.0, gain / ideal);
    }
    return acc / static_cast<double>(preds.size());
}

/// Fraction of ground-truth test labels placed correctly in the top k of at
/// least one test point.
inline double coverage_at_k(const Predictions& preds, const SparseMatrix& truth, std::size_t k) {
    detail::check_eval_input(preds, truth, k, false);
    std::vector<unsigned char> present(truth.cols(), 0), covered(truth.cols(), 0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (const Entry& e : truth.row(i)) present[e.index] = 1;
        const std::size_t top = std::min(k, preds[i].size());
        for (std::size_t t = 0; t < top; ++t) {
            const index_t l = preds[i][t].label;
            if (detail::is_true(truth.row(i), l)) covered[l] = 1;
        }
    }
    const auto n_present = std::count(present.begin(), present.end(), 1);
    if (n_present == 0) return 0.0;
    return static_cast<double>(std::count(covered.begin(), covered.end(), 1)) / static_cast<double>(n_present);
}

struct BucketPrecision {
    double lo = 0.0;
    double hi = 100.0;
    std::size_t labels = 0;  // ground-truth test labels falling in the bucket
    double macro_precision = 0.0;
};

/// Percentile bucket edges from most popular (0) to least popular (100).
inline std::vector<double> default_percentile_edges() {
    return {0, 1, 2, 3, 5, 7, 10, 20, 30, 50, 70, 100};
}

/// Labels are ranked by training frequency (most popular first, ties by id);
/// label at rank r sits at percentile 100 r / L. Within each bucket
/// [lo, hi) (the last one closed) the label-wise precision@k of every
/// ground-truth test label is averaged with equal weight. A label never
/// predicted has precision 0.
inline std::vector<BucketPrecision> percentile_macro_precision(const Predictions& preds, const SparseMatrix& truth,
                                                               const SparseMatrix& Y_train, std::size_t k,
                                                               const std::vector<double>& edges) {
    detail::check_eval_input(preds, truth, k, false);
    if (edges.size() < 2 || edges.front() != 0.0 || edges.back() != 100.0 ||
        !std::is_sorted(edges.begin(), edges.end()))
        throw InvalidArgument("percentile buckets must be increasing edges from 0 to 100");
    const std::size_t L = truth.cols();
    if (Y_train.cols() != L) throw InvalidArgument("training and test label spaces differ");

    std::vector<std::size_t> freq(L, 0);
    for (const SparseVec& y : Y_train.row_data())
        for (const Entry& e : y) ++freq[e.index];
    std::vector<index_t> order(L);
    std::iota(order.begin(), order.end(), index_t{0});
    std::stable_sort(order.begin(), order.end(), [&](index_t a, index_t b) { return freq[a] > freq[b]; });

    std::vector<double> predicted(L, 0.0), correct(L, 0.0);
    std::vector<unsigned char> present(L, 0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (const Entry& e : truth.row(i)) present[e.index] = 1;
        const std::size_t top = std::min(k, preds[i].size());
        for (std::size_t t = 0; t < top; ++t) {
            const index_t l = preds[i][t].label;
            if (l >= L) throw InvalidArgument("predicted label out of range");
            predicted[l] += 1.0;
            if (detail::is_true(truth.row(i), l)) correct[l] += 1.0;
        }
    }

    std::vector<BucketPrecision> out(edges.size() - 1);
    std::vector<double> sums(out.size(), 0.0);
    for (std::size_t b = 0; b < out.size(); ++b) {
        out[b].lo = edges[b];
        out[b].hi = edges[b + 1];
    }
    for (std::size_t r = 0; r < L; ++r) {
        const index_t l = order[r];
        if (!present[l]) continue;
        const double pct = 100.0 * static_cast<double>(r) / static_cast<double>(L);
        std::size_t b = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), pct) - edges.begin());
        b = std::min(b == 0 ? 0 : b - 1, out.size() - 1);
        out[b].labels += 1;
        sums[b] += predicted[l] > 0.0 ? correct[l] / predicted[l] : 0.0;
    }
    for (std::size_t b = 0; b < out.size(); ++b)
        out[b].macro_precision = out[b].labels ? sums[b] / static_cast<double>(out[b].labels) : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Score files: one line per test point, "label:score" pairs in rank order.

inline void write_predictions(std::ostream& out, const Predictions& preds) {
    std::string line;
    for (const auto& r : preds) {
        line.clear();
        for (std::size_t t = 0; t < r.size(); ++t) {
            if (t) line += ' ';
            line += std::to_string(r[t].label);
            line += ':';
            detail::format_double(line, r[t].score);
        }
        line += '\n';
        out << line;
    }
}

inline Predictions parse_predictions(std::istream& in) {
    Predictions preds;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        RankedLabels r;
        for (std::string_view tok : detail::split_ws(line)) {
            const auto colon = tok.find(':');
            if (colon == std::string_view::npos) throw ParseError(lineno, "expected 'label:score'");
            const auto l = detail::parse_number<index_t>(tok.substr(0, colon), lineno, "label");
            const auto s = detail::parse_number<double>(tok.substr(colon + 1), lineno, "score");
            r.push_back({l, s});
        }
        preds.push_back(std::move(r));
    }
    try {
        validate_predictions(preds);
    } catch (const InvalidArgument& e) {
        throw DataError(e.what());
    }
    return preds;
}

inline Predictions load_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return parse_predictions(in);
}

}  // namespace defrag

#endif  // DEFRAG_XC_METRICS_HPP
