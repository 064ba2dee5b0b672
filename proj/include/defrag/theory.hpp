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

#ifndef DEFRAG_THEORY_HPP
#define DEFRAG_THEORY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "defrag/agglomerate.hpp"
#include "defrag/repr.hpp"

namespace defrag {

struct BoundReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = true;
    std::vector<double> witnesses;  // one c per cluster
    std::vector<double> cluster_lhs;
    std::vector<double> cluster_rhs;
};

inline bool bound_holds(double lhs, double rhs) { return lhs <= rhs * (1.0 + 1e-9) + 1e-12; }

namespace detail {

// V is d_k x p. Minimizer of (u - c1)^T V V^T (u - c1), or 0 when 1^T V V^T 1 = 0.
inline double tied_weight(const Eigen::VectorXd& u, const Eigen::MatrixXd& V) {
    const Eigen::VectorXd s = V.transpose() * Eigen::VectorXd::Ones(V.rows());
    const double den = s.squaredNorm();
    if (den == 0.0) return 0.0;
    return (V.transpose() * u).dot(s) / den;
}

inline Eigen::VectorXd perp(const Eigen::VectorXd& u) {
    return (u.array() - u.mean()).matrix();
}

// ||V - 1 mu^T||_F with mu the mean row.
inline double clustering_error(const Eigen::MatrixXd& V) {
    const Eigen::RowVectorXd mu = V.colwise().mean();
    return (V.rowwise() - mu).norm();
}

inline Eigen::MatrixXd rows_of(const Eigen::MatrixXd& M, const std::vector<index_t>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), M.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = M.row(rows[r]);
    return out;
}

inline Eigen::VectorXd entries_of(const Eigen::VectorXd& v, const std::vector<index_t>& idx) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) out[static_cast<Eigen::Index>(r)] = v[idx[r]];
    return out;
}

inline void check_partition_dim(std::size_t d, const FeaturePartition& part, const char* who) {
    if (part.d() != d)
        throw InvalidArgument(std::string(who) + ": partition covers " + std::to_string(part.d()) +
                              " features, expected " + std::to_string(d));
}

}  // namespace detail

/// Dense copy of X (n x d), rows are points.
inline Eigen::MatrixXd dense_features(const Dataset& ds) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ds.n()), static_cast<Eigen::Index>(ds.d()));
    for (std::size_t i = 0; i < ds.n(); ++i)
        for (const Entry& e : ds.features().row(i)) X(static_cast<Eigen::Index>(i), e.index) = e.value;
    return X;
}

/// (u - c1)^T Z_k Z_k^T (u - c1) for an arbitrary c.
inline double lemma1_objective(const Eigen::MatrixXd& Zk, const Eigen::VectorXd& u, double c) {
    return (Zk.transpose() * (u.array() - c).matrix()).squaredNorm();
}

/// Per cluster: lhs_k at the minimizing c versus ||Delta_k^T w_k^perp||^2,
/// with Delta_k = Z_k - 1 mu^T and mu the mean row of Z_k.
inline BoundReport lemma1_check(const Eigen::MatrixXd& Z, const FeaturePartition& part, const Eigen::VectorXd& w) {
    detail::check_partition_dim(static_cast<std::size_t>(Z.rows()), part, "lemma1_check");
    if (w.size() != Z.rows()) throw InvalidArgument("lemma1_check: w must have one entry per row of Z");
    BoundReport r;
    for (std::size_t k = 0; k < part.K(); ++k) {
        const Eigen::MatrixXd V = detail::rows_of(Z, part.cluster(k));
        const Eigen::VectorXd u = detail::entries_of(w, part.cluster(k));
        const double c = detail::tied_weight(u, V);
        const double lhs = lemma1_objective(V, u, c);
        const Eigen::RowVectorXd mu = V.colwise().mean();
        const Eigen::MatrixXd delta = V.rowwise() - mu;
        const double rhs = (delta.transpose() * detail::perp(u)).squaredNorm();
        r.witnesses.push_back(c);
        r.cluster_lhs.push_back(lhs);
        r.cluster_rhs.push_back(rhs);
        r.lhs += lhs;
        r.rhs += rhs;
        r.holds = r.holds && bound_holds(lhs, rhs);
    }
    return r;
}

enum class Loss { Logistic, Hinge };

/// Loss of score s against a +-1 target; both choices are 1-Lipschitz in s.
inline double loss_value(Loss loss, double s, double y) {
    const double m = y * s;
    if (loss == Loss::Hinge) return std::max(0.0, 1.0 - m);
    return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

inline double lipschitz(Loss) { return 1.0; }

/// Compares l(w^T x; y) with l(w~^T x~; y) where x~ is the SUM agglomeration,
/// w~ the per-cluster witnesses and y the +-1 indicator of `label`.
/// The bound is L * sum_k ||w_Fk^perp|| err_k over the full representatives p^j.
inline BoundReport thm1_check(const Dataset& ds, const FeaturePartition& part, const Eigen::VectorXd& w,
                              Loss loss = Loss::Logistic, index_t label = 0,
                              std::optional<std::vector<index_t>> subset = std::nullopt) {
    detail::check_partition_dim(ds.d(), part, "thm1_check");
    if (static_cast<std::size_t>(w.size()) != ds.d()) throw InvalidArgument("thm1_check: w must have d entries");
    if (ds.L() > 0 && label >= ds.L()) throw InvalidArgument("thm1_check: label out of range");
    const Eigen::MatrixXd X = dense_features(ds);
    const Eigen::MatrixXd P = X.transpose();  // row j is p^j

    BoundReport r;
    Eigen::VectorXd w_tilde(static_cast<Eigen::Index>(part.K()));
    Eigen::MatrixXd X_tilde = Eigen::MatrixXd::Zero(X.rows(), static_cast<Eigen::Index>(part.K()));
    for (std::size_t k = 0; k < part.K(); ++k) {
        const auto& F = part.cluster(k);
        const Eigen::MatrixXd Pk = detail::rows_of(P, F);
        const Eigen::VectorXd u = detail::entries_of(w, F);
        const double c = detail::tied_weight(u, Pk);
        w_tilde[static_cast<Eigen::Index>(k)] = c;
        X_tilde.col(static_cast<Eigen::Index>(k)) = Pk.colwise().sum().transpose();
        const double term = detail::perp(u).norm() * detail::clustering_error(Pk);
        r.witnesses.push_back(c);
        r.cluster_rhs.push_back(lipschitz(loss) * term);
        r.rhs += lipschitz(loss) * term;
    }
    const Eigen::VectorXd s = X * w;
    const Eigen::VectorXd s_tilde = X_tilde * w_tilde;

    std::vector<index_t> points;
    if (subset) {
        points = *subset;
    } else {
        points.resize(ds.n());
        std::iota(points.begin(), points.end(), index_t{0});
    }
    double sq = 0.0;
    for (index_t i : points) {
        if (i >= ds.n()) throw InvalidArgument("thm1_check: subset point out of range");
        const double y = ds.L() > 0 && ds.labels().row(i)[label] != 0.0 ? 1.0 : -1.0;
        const double diff = loss_value(loss, s[i], y) - loss_value(loss, s_tilde[i], y);
        sq += diff * diff;
    }
    r.lhs = std::sqrt(sq);
    r.holds = bound_holds(r.lhs, r.rhs);
    return r;
}

/// Label features z^l = sum_i y^i_l x^i against their agglomerations, scored
/// with delta = c+ - c- and per-cluster witnesses from the full q^j.
inline BoundReport thm2_check(const Dataset& ds, const FeaturePartition& part, const Eigen::VectorXd& c_plus,
                              const Eigen::VectorXd& c_minus,
                              std::optional<std::vector<index_t>> label_subset = std::nullopt) {
    detail::check_partition_dim(ds.d(), part, "thm2_check");
    if (static_cast<std::size_t>(c_plus.size()) != ds.d() || static_cast<std::size_t>(c_minus.size()) != ds.d())
        throw InvalidArgument("thm2_check: centroids must have d entries");
    const Eigen::MatrixXd X = dense_features(ds);
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ds.n()), static_cast<Eigen::Index>(ds.L()));
    for (std::size_t i = 0; i < ds.n(); ++i)
        for (const Entry& e : ds.labels().row(i)) Y(static_cast<Eigen::Index>(i), e.index) = e.value;
    const Eigen::MatrixXd Q = X.transpose() * Y;  // row j is q^j; column l is z^l
    const Eigen::VectorXd delta = c_plus - c_minus;

    BoundReport r;
    Eigen::VectorXd delta_tilde(static_cast<Eigen::Index>(part.K()));
    Eigen::MatrixXd Z_tilde(static_cast<Eigen::Index>(part.K()), Q.cols());
    for (std::size_t k = 0; k < part.K(); ++k) {
        const auto& F = part.cluster(k);
        const Eigen::MatrixXd Qk = detail::rows_of(Q, F);
        const Eigen::VectorXd u = detail::entries_of(delta, F);
        const double c = detail::tied_weight(u, Qk);
        delta_tilde[static_cast<Eigen::Index>(k)] = c;
        Z_tilde.row(static_cast<Eigen::Index>(k)) = Qk.colwise().sum();
        const double term = detail::clustering_error(Qk) * detail::perp(u).norm();
        r.witnesses.push_back(c);
        r.cluster_rhs.push_back(term);
        r.rhs += term;
    }
    const Eigen::VectorXd s = Q.transpose() * delta;
    const Eigen::VectorXd s_tilde = Z_tilde.transpose() * delta_tilde;

    std::vector<index_t> labels;
    if (label_subset) {
        labels = *label_subset;
    } else {
        labels.resize(ds.L());
        std::iota(labels.begin(), labels.end(), index_t{0});
    }
    double sq = 0.0;
    for (index_t l : labels) {
        if (l >= ds.L()) throw InvalidArgument("thm2_check: subset label out of range");
        const double diff = s[l] - s_tilde[l];
        sq += diff * diff;
    }
    r.lhs = std::sqrt(sq);
    r.holds = bound_holds(r.lhs, r.rhs);
    return r;
}

// ---------------------------------------------------------------------------
// Randomized trials.

/// K nonempty clusters over [d], K drawn uniformly from [1, d].
inline FeaturePartition random_partition(std::size_t d, Rng& rng) {
    std::uniform_int_distribution<std::size_t> kd(1, d);
    const std::size_t K = kd(rng);
    std::vector<index_t> perm(d);
    std::iota(perm.begin(), perm.end(), index_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<index_t>> clusters(K);
    for (std::size_t k = 0; k < K; ++k) clusters[k].push_back(perm[k]);
    std::uniform_int_distribution<std::size_t> pick(0, K - 1);
    for (std::size_t t = K; t < d; ++t) clusters[pick(rng)].push_back(perm[t]);
    for (auto& c : clusters) std::sort(c.begin(), c.end());
    return FeaturePartition(d, std::move(clusters));
}

struct Lemma1Instance {
    Eigen::MatrixXd Z;
    FeaturePartition part;
    Eigen::VectorXd w;
};

/// Gaussian instances, some with rows built as a shared mean plus small noise
/// and some with exactly identical rows inside each cluster.
inline Lemma1Instance random_lemma1_instance(Rng& rng, std::size_t max_d = 128, std::size_t max_p = 64) {
    std::uniform_int_distribution<std::size_t> dd(2, max_d), pd(1, max_p);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_int_distribution<int> flavor(0, 3);
    const std::size_t d = dd(rng), p = pd(rng);
    Lemma1Instance inst{Eigen::MatrixXd(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(p)),
                        random_partition(d, rng), Eigen::VectorXd(static_cast<Eigen::Index>(d))};
    const int f = flavor(rng);
    for (std::size_t k = 0; k < inst.part.K(); ++k) {
        Eigen::RowVectorXd mu(static_cast<Eigen::Index>(p));
        for (auto& v : mu) v = g(rng);
        const double noise = f == 0 ? 1.0 : f == 1 ? 0.05 : f == 2 ? 0.0 : 3.0;
        for (index_t j : inst.part.cluster(k))
            for (std::size_t c = 0; c < p; ++c)
                inst.Z(j, static_cast<Eigen::Index>(c)) = (f == 3 ? 0.0 : mu[static_cast<Eigen::Index>(c)]) + noise * g(rng);
    }
    for (auto& v : inst.w) v = g(rng);
    return inst;
}

/// Sparse nonnegative dataset with `density` expected fill and random labels.
inline Dataset random_sparse_dataset(Rng& rng, std::size_t n, std::size_t d, std::size_t L, double density) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<SparseVec> rows, labels;
    rows.reserve(n);
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Entry> e;
        for (std::size_t j = 0; j < d; ++j)
            if (u(rng) < density) e.push_back({static_cast<index_t>(j), 0.1 + u(rng)});
        rows.push_back(SparseVec::from_sorted(d, std::move(e)));
        std::vector<Entry> y;
        for (std::size_t l = 0; l < L; ++l)
            if (u(rng) < 0.3) y.push_back({static_cast<index_t>(l), 1.0});
        labels.push_back(SparseVec::from_sorted(L, std::move(y)));
    }
    return Dataset(SparseMatrix(d, std::move(rows)), SparseMatrix(L, std::move(labels)));
}

struct TrialSummary {
    std::string theorem;
    std::size_t trials = 0;
    std::size_t failures = 0;
    /// Smallest rhs * (1 + 1e-9) + 1e-12 - lhs over all trials.
    double worst_slack = std::numeric_limits<double>::infinity();
    /// Largest lhs / rhs among trials whose rhs exceeds the absolute tolerance.
    double worst_ratio = 0.0;

    bool passed() const noexcept { return failures == 0; }
    void record(const BoundReport& r) {
        ++trials;
        if (!r.holds) ++failures;
        worst_slack = std::min(worst_slack, r.rhs * (1.0 + 1e-9) + 1e-12 - r.lhs);
        if (r.rhs > 1e-12) worst_ratio = std::max(worst_ratio, r.lhs / r.rhs);
    }
};

/// Partition for a random trial: a DEFRAG-X tree on full representatives or
/// a uniformly random partition, alternately.
inline FeaturePartition trial_partition(const Dataset& ds, std::size_t trial, Rng& rng) {
    if (trial % 2 == 0) return random_partition(ds.d(), rng);
    TreeOptions opts;
    std::uniform_int_distribution<std::size_t> d0(2, 16);
    opts.d0 = d0(rng);
    opts.seed = rng();
    return leaves(make_tree(normalize(build_repr_x(ds, 1.0)), opts));
}

inline TrialSummary run_lemma1_trials(std::size_t trials, std::uint64_t seed) {
    TrialSummary s{"lemma1"};
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(detail::child_seed(detail::root_seed(seed), static_cast<unsigned>(t)));
        const auto inst = random_lemma1_instance(rng);
        s.record(lemma1_check(inst.Z, inst.part, inst.w));
    }
    return s;
}

inline TrialSummary run_thm1_trials(std::size_t trials, std::uint64_t seed) {
    TrialSummary s{"thm1"};
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(detail::child_seed(detail::root_seed(seed), static_cast<unsigned>(t)));
        std::uniform_int_distribution<std::size_t> nd(2, 128), dd(2, 96), ld(1, 8);
        std::uniform_real_distribution<double> dens(0.02, 0.3);
        const Dataset ds = random_sparse_dataset(rng, nd(rng), dd(rng), ld(rng), dens(rng));
        const auto part = trial_partition(ds, t, rng);
        std::normal_distribution<double> g(0.0, 1.0);
        Eigen::VectorXd w(static_cast<Eigen::Index>(ds.d()));
        for (auto& v : w) v = g(rng);
        const Loss loss = t % 3 == 2 ? Loss::Hinge : Loss::Logistic;
        std::uniform_int_distribution<index_t> lab(0, static_cast<index_t>(ds.L() - 1));
        s.record(thm1_check(ds, part, w, loss, lab(rng)));
    }
    return s;
}

inline TrialSummary run_thm2_trials(std::size_t trials, std::uint64_t seed) {
    TrialSummary s{"thm2"};
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(detail::child_seed(detail::root_seed(seed), static_cast<unsigned>(t)));
        std::uniform_int_distribution<std::size_t> nd(2, 128), dd(2, 96), ld(1, 24);
        std::uniform_real_distribution<double> dens(0.02, 0.3);
        const Dataset ds = random_sparse_dataset(rng, nd(rng), dd(rng), ld(rng), dens(rng));
        const auto part = trial_partition(ds, t, rng);
        std::normal_distribution<double> g(0.0, 1.0);
        Eigen::VectorXd cp(static_cast<Eigen::Index>(ds.d())), cm(static_cast<Eigen::Index>(ds.d()));
        for (auto& v : cp) v = g(rng);
        for (auto& v : cm) v = g(rng);
        s.record(thm2_check(ds, part, cp, cm));
    }
    return s;
}

}  // namespace defrag

#endif  // DEFRAG_THEORY_HPP
