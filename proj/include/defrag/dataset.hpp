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

#ifndef DEFRAG_DATASET_HPP
#define DEFRAG_DATASET_HPP

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "defrag/sparse.hpp"

namespace defrag {

/// Multi-label dataset: n points with nonnegative d-dim features and binary
/// L-dim label vectors.
class Dataset {
public:
    Dataset() = default;

    Dataset(SparseMatrix features, SparseMatrix labels)
        : features_(std::move(features)), labels_(std::move(labels)) {
        if (features_.rows() != labels_.rows())
            throw DataError("feature rows (" + std::to_string(features_.rows()) + ") and label rows (" +
                            std::to_string(labels_.rows()) + ") differ");
        for (std::size_t i = 0; i < features_.rows(); ++i) {
            for (const Entry& e : features_.row(i))
                if (!(e.value >= 0.0))
                    throw DataError("negative feature value at point " + std::to_string(i) + ", feature " +
                                    std::to_string(e.index));
            for (const Entry& e : labels_.row(i))
                if (e.value != 1.0) throw DataError("label values must be exactly 1 (point " + std::to_string(i) + ")");
        }
    }

    std::size_t n() const noexcept { return features_.rows(); }
    std::size_t d() const noexcept { return features_.cols(); }
    std::size_t L() const noexcept { return labels_.cols(); }
    const SparseMatrix& features() const noexcept { return features_; }
    const SparseMatrix& labels() const noexcept { return labels_; }

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    SparseMatrix features_;
    SparseMatrix labels_;
};

struct DatasetStats {
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t L = 0;
    double avg_features = 0.0;
    double avg_labels = 0.0;
};

inline DatasetStats stats(const Dataset& ds) {
    DatasetStats s{ds.n(), ds.d(), ds.L(), 0.0, 0.0};
    if (ds.n() == 0) return s;
    double nf = 0.0, nl = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        nf += static_cast<double>(ds.features().row(i).nnz());
        nl += static_cast<double>(ds.labels().row(i).nnz());
    }
    s.avg_features = nf / static_cast<double>(ds.n());
    s.avg_labels = nl / static_cast<double>(ds.n());
    return s;
}

/// Builds a label matrix row from a list of label ids.
inline SparseVec label_vector(std::size_t L, std::vector<index_t> ids) {
    std::vector<Entry> entries;
    entries.reserve(ids.size());
    for (index_t l : ids) entries.push_back({l, 1.0});
    return SparseVec::from_pairs(L, std::move(entries));
}

struct ParseOptions {
    bool one_based = false;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view tok, std::size_t line, const char* what) {
    T value{};
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    if (!tok.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || tok.empty())
        throw ParseError(line, std::string("invalid ") + what + " '" + std::string(tok) + "'");
    return value;
}

inline index_t parse_index(std::string_view tok, std::size_t bound, bool one_based, std::size_t line,
                           const char* what) {
    auto raw = parse_number<long long>(tok, line, what);
    if (one_based) {
        if (raw < 1) throw ParseError(line, std::string(what) + " " + std::to_string(raw) + " < 1 in one-based input");
        --raw;
    }
    if (raw < 0 || static_cast<unsigned long long>(raw) >= bound)
        throw ParseError(line, std::string(what) + " " + std::string(tok) + " out of range (bound " +
                                   std::to_string(bound) + ")");
    return static_cast<index_t>(raw);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline void format_double(std::string& out, double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

}  // namespace detail

/// Reads the Extreme Classification Repository text format:
/// a header "n d L", then one line per point "l1,l2,... f1:v1 f2:v2 ...".
/// An empty label field is allowed.
inline Dataset parse_xc(std::istream& in, ParseOptions opts = {}) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw ParseError(1, "missing header");
    auto head = detail::split_ws(detail::trim(line));
    if (head.size() != 3) throw ParseError(1, "header must be 'n d L'");
    const auto n = detail::parse_number<std::size_t>(head[0], 1, "header field n");
    const auto d = detail::parse_number<std::size_t>(head[1], 1, "header field d");
    const auto L = detail::parse_number<std::size_t>(head[2], 1, "header field L");

    std::vector<SparseVec> xs;
    std::vector<SparseVec> ys;
    xs.reserve(n);
    ys.reserve(n);
    std::vector<Entry> feats;
    std::vector<Entry> labs;
    for (std::size_t i = 0; i < n; ++i) {
        ++lineno;
        if (!std::getline(in, line))
            throw ParseError(lineno, "expected " + std::to_string(n) + " data lines, found " + std::to_string(i));
        feats.clear();
        labs.clear();
        auto toks = detail::split_ws(line);
        std::size_t t = 0;
        if (!toks.empty() && toks[0].find(':') == std::string_view::npos) {
            std::string_view field = toks[0];
            std::size_t pos = 0;
            while (pos <= field.size()) {
                auto comma = field.find(',', pos);
                if (comma == std::string_view::npos) comma = field.size();
                auto tok = field.substr(pos, comma - pos);
                if (tok.empty()) throw ParseError(lineno, "empty label in label list");
                labs.push_back({detail::parse_index(tok, L, opts.one_based, lineno, "label index"), 1.0});
                pos = comma + 1;
            }
            t = 1;
        }
        for (; t < toks.size(); ++t) {
            auto tok = toks[t];
            auto colon = tok.find(':');
            if (colon == std::string_view::npos)
                throw ParseError(lineno, "feature token '" + std::string(tok) + "' is not index:value");
            auto j = detail::parse_index(tok.substr(0, colon), d, opts.one_based, lineno, "feature index");
            auto v = detail::parse_number<double>(tok.substr(colon + 1), lineno, "feature value");
            if (!(v >= 0.0)) throw ParseError(lineno, "negative feature value " + std::string(tok.substr(colon + 1)));
            feats.push_back({j, v});
        }
        auto by_index = [](const Entry& a, const Entry& b) { return a.index < b.index; };
        std::sort(feats.begin(), feats.end(), by_index);
        std::sort(labs.begin(), labs.end(), by_index);
        for (std::size_t k = 1; k < feats.size(); ++k)
            if (feats[k].index == feats[k - 1].index)
                throw ParseError(lineno, "duplicate feature index " + std::to_string(feats[k].index));
        for (std::size_t k = 1; k < labs.size(); ++k)
            if (labs[k].index == labs[k - 1].index)
                throw ParseError(lineno, "duplicate label index " + std::to_string(labs[k].index));
        xs.push_back(SparseVec::from_sorted(d, feats));
        ys.push_back(SparseVec::from_sorted(L, labs));
    }
    while (std::getline(in, line)) {
        ++lineno;
        if (!detail::trim(line).empty()) throw ParseError(lineno, "more data lines than the header declares");
    }
    return Dataset(SparseMatrix(d, std::move(xs)), SparseMatrix(L, std::move(ys)));
}

inline Dataset parse_xc(const std::string& text, ParseOptions opts = {}) {
    std::istringstream in(text);
    return parse_xc(in, opts);
}

inline Dataset load_xc(const std::string& path, ParseOptions opts = {}) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return parse_xc(in, opts);
}

/// Writes the XC text format. Values use shortest round-trip formatting, so
/// parse_xc(write_xc(ds)) reproduces ds exactly.
inline void write_xc(std::ostream& out, const Dataset& ds) {
    std::string buf;
    buf += std::to_string(ds.n()) + ' ' + std::to_string(ds.d()) + ' ' + std::to_string(ds.L()) + '\n';
    for (std::size_t i = 0; i < ds.n(); ++i) {
        bool first = true;
        for (const Entry& e : ds.labels().row(i)) {
            if (!first) buf += ',';
            buf += std::to_string(e.index);
            first = false;
        }
        for (const Entry& e : ds.features().row(i)) {
            buf += ' ';
            buf += std::to_string(e.index);
            buf += ':';
            detail::format_double(buf, e.value);
        }
        buf += '\n';
        if (buf.size() > (1u << 20)) {
            out << buf;
            buf.clear();
        }
    }
    out << buf;
}

inline std::string write_xc(const Dataset& ds) {
    std::ostringstream out;
    write_xc(out, ds);
    return out.str();
}

inline void save_xc(const std::string& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    write_xc(out, ds);
}

}  // namespace defrag

#endif  // DEFRAG_DATASET_HPP
