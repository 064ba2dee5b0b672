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

#ifndef DEFRAG_OVA_HPP
#define DEFRAG_OVA_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>
#include <optional>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "defrag/agglomerate.hpp"
#include "defrag/xc_metrics.hpp"

namespace defrag {

struct OvaConfig {
    int epochs = 10;
    double learning_rate = 0.5;
    double l2 = 1e-5;
    std::uint64_t seed = 0;
    /// Inputs are scaled to unit L2 norm before scoring, in training and prediction.
    bool normalize_input = true;
    std::size_t max_labels = 10000;
    bool allow_large = false;
    unsigned threads = 1;
};

/// Binary-relevance logistic models, one weight row and bias per label.
class OvaModel {
public:
    OvaModel() = default;
    OvaModel(std::size_t d, std::size_t L, OvaConfig cfg)
        : d_(d), L_(L), cfg_(cfg), weights_(L, std::vector<double>(d, 0.0)), bias_(L, 0.0) {}

    std::size_t d() const noexcept { return d_; }
    std::size_t L() const noexcept { return L_; }
    const OvaConfig& config() const noexcept { return cfg_; }
    std::span<const double> weights(std::size_t l) const { return weights_.at(l); }
    std::span<double> weights(std::size_t l) { return weights_.at(l); }
    double bias(std::size_t l) const { return bias_.at(l); }
    double& bias(std::size_t l) { return bias_.at(l); }

    /// w_l^T x + b_l for every label, x scaled per the config.
    std::vector<double> margins(const SparseVec& x) const {
        if (x.dim() != d_)
            throw InvalidArgument("predict: vector dim " + std::to_string(x.dim()) + " != model dim " +
                                  std::to_string(d_));
        const double n = cfg_.normalize_input ? norm2(x) : 1.0;
        const double s = n > 0.0 ? 1.0 / n : 0.0;
        std::vector<double> m(L_);
        for (std::size_t l = 0; l < L_; ++l) m[l] = s * dot(weights_[l], x) + bias_[l];
        return m;
    }

    friend bool operator==(const OvaModel& a, const OvaModel& b) {
        return a.d_ == b.d_ && a.L_ == b.L_ && a.weights_ == b.weights_ && a.bias_ == b.bias_;
    }

private:
    std::size_t d_ = 0;
    std::size_t L_ = 0;
    OvaConfig cfg_;
    std::vector<std::vector<double>> weights_;
    std::vector<double> bias_;
};

namespace detail {

inline double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// SGD on the L2-regularized logistic loss for one label. The weight vector is
// stored as scale * v so that the decay step costs O(1).
inline void train_label(const std::vector<SparseVec>& X, const std::vector<double>& inv_norm,
                        const std::vector<std::vector<index_t>>& orders, const std::vector<unsigned char>& positive,
                        const OvaConfig& cfg, std::span<double> w, double& b) {
    const std::size_t n = X.size();
    double pos = 0.0;
    for (unsigned char p : positive) pos += p;
    const double prior = (pos + 0.5) / (static_cast<double>(n) + 1.0);
    b = std::log(prior / (1.0 - prior));

    std::vector<double> v(w.size(), 0.0);
    double scale = 1.0;
    for (int e = 0; e < cfg.epochs; ++e) {
        const double eta = cfg.learning_rate / std::sqrt(1.0 + e);
        const double decay = 1.0 - eta * cfg.l2;
        for (index_t i : orders[e]) {
            const double m = scale * inv_norm[i] * dot(v, X[i]) + b;
            const double g = sigmoid(m) - (positive[i] ? 1.0 : 0.0);
            scale *= decay;
            if (scale < 1e-9) {
                for (double& t : v) t *= scale;
                scale = 1.0;
            }
            if (g != 0.0) {
                axpy(v, -eta * g * inv_norm[i] / scale, X[i]);
                b -= eta * g;
            }
        }
    }
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = scale * v[j];
}

}  // namespace detail

inline OvaModel train_ova(const Dataset& ds, OvaConfig cfg = {}) {
    if (ds.L() > cfg.max_labels && !cfg.allow_large)
        throw InvalidArgument("train_ova: " + std::to_string(ds.L()) + " labels exceeds the limit of " +
                              std::to_string(cfg.max_labels));
    if (cfg.epochs < 0) throw InvalidArgument("train_ova: epochs must be nonnegative");
    OvaModel model(ds.d(), ds.L(), cfg);
    const std::size_t n = ds.n();
    const std::vector<SparseVec> X(ds.features().row_data().begin(), ds.features().row_data().end());
    std::vector<double> inv_norm(n, 1.0);
    if (cfg.normalize_input)
        for (std::size_t i = 0; i < n; ++i) {
            const double nr = norm2(X[i]);
            inv_norm[i] = nr > 0.0 ? 1.0 / nr : 0.0;
        }

    // One visiting order per epoch, shared by all labels.
    Rng rng(detail::root_seed(cfg.seed));
    std::vector<std::vector<index_t>> orders(static_cast<std::size_t>(cfg.epochs), std::vector<index_t>(n));
    for (auto& o : orders) {
        std::iota(o.begin(), o.end(), index_t{0});
        std::shuffle(o.begin(), o.end(), rng);
    }

    const SparseMatrix Yt = ds.labels().transposed();
    auto work = [&](std::size_t lo, std::size_t hi) {
        std::vector<unsigned char> positive(n, 0);
        for (std::size_t l = lo; l < hi; ++l) {
            for (const Entry& e : Yt.row(l)) positive[e.index] = 1;
            detail::train_label(X, inv_norm, orders, positive, cfg, model.weights(l), model.bias(l));
            for (const Entry& e : Yt.row(l)) positive[e.index] = 0;
        }
    };
    const unsigned threads = std::max(1u, cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads);
    if (threads == 1 || ds.L() < 2) {
        work(0, ds.L());
    } else {
        std::vector<std::future<void>> jobs;
        const std::size_t chunk = (ds.L() + threads - 1) / threads;
        for (std::size_t lo = 0; lo < ds.L(); lo += chunk)
            jobs.push_back(std::async(std::launch::async, work, lo, std::min(ds.L(), lo + chunk)));
        for (auto& j : jobs) j.get();
    }
    return model;
}

/// Top-k labels by score, ties by label id. Scores are reported as sigmoid
/// probabilities, which leaves the margin order unchanged.
inline RankedLabels top_k(std::span<const double> scores, std::size_t k) {
    if (k < 1) throw InvalidArgument("predict: k must be at least 1");
    std::vector<index_t> ids(scores.size());
    std::iota(ids.begin(), ids.end(), index_t{0});
    const std::size_t top = std::min(k, ids.size());
    auto better = [&](index_t a, index_t b) { return scores[a] != scores[b] ? scores[a] > scores[b] : a < b; };
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(top), ids.end(), better);
    RankedLabels out;
    out.reserve(top);
    for (std::size_t t = 0; t < top; ++t) out.push_back({ids[t], scores[ids[t]]});
    return out;
}

inline RankedLabels predict(const OvaModel& model, const SparseVec& x, std::size_t k) {
    const auto m = model.margins(x);
    RankedLabels r = top_k(m, k);
    for (ScoredLabel& s : r) s.score = detail::sigmoid(s.score);
    return r;
}

inline Predictions predict(const OvaModel& model, const SparseMatrix& X, std::size_t k) {
    Predictions out;
    out.reserve(X.rows());
    for (const SparseVec& x : X.row_data()) out.push_back(predict(model, x, k));
    return out;
}

/// Models trained on differently agglomerated copies of one feature space.
/// A member with a partition agglomerates (SUM) the input before scoring.
struct OvaMember {
    std::optional<FeaturePartition> partition;
    OvaModel model;
};

struct OvaEnsemble {
    std::vector<OvaMember> members;
    std::size_t input_dim() const {
        if (members.empty()) return 0;
        const auto& m = members.front();
        return m.partition ? m.partition->d() : m.model.d();
    }
};

/// Consensus is the arithmetic mean of the members' sigmoid scores.
inline RankedLabels predict(const OvaEnsemble& ens, const SparseVec& x, std::size_t k) {
    if (ens.members.empty()) throw InvalidArgument("predict: empty ensemble");
    const std::size_t L = ens.members.front().model.L();
    std::vector<double> mean(L, 0.0);
    for (const OvaMember& m : ens.members) {
        if (m.model.L() != L) throw InvalidArgument("predict: ensemble members disagree on L");
        const auto margins = m.partition ? m.model.margins(agglomerate(x, *m.partition)) : m.model.margins(x);
        for (std::size_t l = 0; l < L; ++l) mean[l] += detail::sigmoid(margins[l]);
    }
    for (double& v : mean) v /= static_cast<double>(ens.members.size());
    return top_k(mean, k);
}

inline Predictions predict(const OvaEnsemble& ens, const SparseMatrix& X, std::size_t k) {
    Predictions out;
    out.reserve(X.rows());
    for (const SparseVec& x : X.row_data()) out.push_back(predict(ens, x, k));
    return out;
}

// ---------------------------------------------------------------------------
// Model files. Weights are stored sparsely as [[feature, value], ...] rows.

inline nlohmann::json to_json(const OvaModel& m) {
    const auto& c = m.config();
    nlohmann::json w = nlohmann::json::array();
    for (std::size_t l = 0; l < m.L(); ++l) {
        nlohmann::json row = nlohmann::json::array();
        auto wl = m.weights(l);
        for (std::size_t j = 0; j < wl.size(); ++j)
            if (wl[j] != 0.0) row.push_back(nlohmann::json::array({j, wl[j]}));
        w.push_back(std::move(row));
    }
    std::vector<double> bias(m.L());
    for (std::size_t l = 0; l < m.L(); ++l) bias[l] = m.bias(l);
    return nlohmann::json{{"d", m.d()},
                          {"L", m.L()},
                          {"config",
                           {{"loss", "logistic"},
                            {"epochs", c.epochs},
                            {"learning_rate", c.learning_rate},
                            {"l2", c.l2},
                            {"seed", c.seed},
                            {"normalize_input", c.normalize_input}}},
                          {"bias", bias},
                          {"weights", std::move(w)}};
}

inline OvaModel ova_from_json(const nlohmann::json& j) {
    try {
        OvaConfig c;
        const auto& jc = j.at("config");
        c.epochs = jc.at("epochs").get<int>();
        c.learning_rate = jc.at("learning_rate").get<double>();
        c.l2 = jc.at("l2").get<double>();
        c.seed = jc.at("seed").get<std::uint64_t>();
        c.normalize_input = jc.at("normalize_input").get<bool>();
        OvaModel m(j.at("d").get<std::size_t>(), j.at("L").get<std::size_t>(), c);
        const auto bias = j.at("bias").get<std::vector<double>>();
        const auto& w = j.at("weights");
        if (bias.size() != m.L() || w.size() != m.L()) throw DataError("model JSON: one row per label required");
        for (std::size_t l = 0; l < m.L(); ++l) {
            m.bias(l) = bias[l];
            auto wl = m.weights(l);
            for (const auto& p : w[l]) {
                const auto f = p.at(0).get<std::size_t>();
                if (f >= m.d()) throw DataError("model JSON: feature " + std::to_string(f) + " out of range");
                wl[f] = p.at(1).get<double>();
            }
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model JSON: ") + e.what());
    }
}

inline nlohmann::json to_json(const OvaEnsemble& ens) {
    nlohmann::json members = nlohmann::json::array();
    for (const OvaMember& m : ens.members)
        members.push_back({{"partition", m.partition ? to_json(*m.partition) : nlohmann::json(nullptr)},
                           {"model", to_json(m.model)}});
    return nlohmann::json{{"members", std::move(members)}};
}

inline OvaEnsemble ensemble_from_json(const nlohmann::json& j) {
    try {
        OvaEnsemble ens;
        for (const auto& jm : j.at("members")) {
            OvaMember m;
            if (!jm.at("partition").is_null()) m.partition = partition_from_json(jm.at("partition"));
            m.model = ova_from_json(jm.at("model"));
            if (m.partition && m.partition->K() != m.model.d())
                throw DataError("model JSON: partition K does not match model dimension");
            ens.members.push_back(std::move(m));
        }
        if (ens.members.empty()) throw DataError("model JSON: no members");
        return ens;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model JSON: ") + e.what());
    }
}

}  // namespace defrag

#endif  // DEFRAG_OVA_HPP
