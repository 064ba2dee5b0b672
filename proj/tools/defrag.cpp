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

// defrag: command-line front end for clustering, agglomeration, OVA
// training and evaluation, imputation, reranking and bound verification.

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "defrag/defrag.hpp"

using json = nlohmann::json;
using namespace defrag;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInvariant = 3 };

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// "-" means stdout.
void with_output(const std::string& path, const std::function<void(std::ostream&)>& write) {
    if (path == "-") {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    write(out);
    if (!out) throw DataError("error writing " + path);
}

void emit(const json& j, const std::string& path = "-") {
    with_output(path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

Dataset load(const std::string& path, bool one_based) { return load_xc(path, ParseOptions{one_based}); }

std::vector<std::size_t> parse_k_list(const std::string& s) {
    std::vector<std::size_t> ks;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t k = 0;
        try {
            k = std::stoul(tok);
        } catch (const std::exception&) {
            throw InvalidArgument("invalid --k entry '" + tok + "'");
        }
        if (k < 1) throw InvalidArgument("--k entries must be at least 1");
        ks.push_back(k);
    }
    if (ks.empty()) throw InvalidArgument("--k needs at least one value");
    return ks;
}

struct ClusterFlags {
    std::string mode = "x";
    std::size_t leaf_size = 8;
    std::string split = "kmeans";
    double doc_fraction = 0.25;
    double label_fraction = 0.05;
    bool no_normalize = false;
    std::uint64_t seed = 0;
    unsigned threads = 0;

    void add_to(CLI::App* app) {
        app->add_option("--mode", mode, "Representation: x (feature values) or xy (label aggregates)")
            ->check(CLI::IsMember({"x", "xy"}));
        app->add_option("--leaf-size", leaf_size, "Maximum cluster size d0")->check(CLI::PositiveNumber);
        app->add_option("--split", split, "Node split: kmeans or ndcg")->check(CLI::IsMember({"kmeans", "ndcg"}));
        app->add_option("--doc-fraction", doc_fraction, "Fraction of most voluminous points kept");
        app->add_option("--label-fraction", label_fraction, "Fraction of most popular labels kept (xy)");
        app->add_flag("--no-normalize", no_normalize, "Keep representatives unnormalized");
        app->add_option("--seed", seed, "Random seed");
    }

    TreeOptions tree_options() const {
        TreeOptions o;
        o.d0 = leaf_size;
        o.split_kind = split == "ndcg" ? SplitKind::NDCG : SplitKind::KMeans;
        o.seed = seed;
        o.threads = threads;
        return o;
    }

    ReprSet reprs(const Dataset& ds) const {
        ReprSet rs = mode == "xy" ? build_repr_xy(ds, doc_fraction, label_fraction) : build_repr_x(ds, doc_fraction);
        return no_normalize ? rs : normalize(std::move(rs));
    }
};

json quality_json(const ClusterQualityReport& r) {
    json j{{"lmi", r.lmi}, {"balance_factor", r.balance}, {"normalized_entropy", r.normalized_entropy}};
    j["clustering_seconds"] = r.clustering_seconds ? json(*r.clustering_seconds) : json(nullptr);
    return j;
}

json precision_rows(const Predictions& preds, const SparseMatrix& truth, const std::vector<std::size_t>& ks,
                    const PropensityModel* prop) {
    json row;
    for (std::size_t k : ks) {
        row["P@" + std::to_string(k)] = precision_at_k(preds, truth, k);
        row["nDCG@" + std::to_string(k)] = ndcg_at_k(preds, truth, k);
        row["coverage@" + std::to_string(k)] = coverage_at_k(preds, truth, k);
        if (prop) {
            row["PSP@" + std::to_string(k)] = psp_at_k(preds, truth, *prop, k);
            row["PSnDCG@" + std::to_string(k)] = psndcg_at_k(preds, truth, *prop, k);
        }
    }
    return row;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feature agglomeration toolkit for extreme multi-label classification"};
    app.require_subcommand(1);
    bool one_based = false;
    unsigned threads = 0;
    app.add_flag("--one-based", one_based, "Feature and label ids in input files start at 1");
    app.add_option("--threads", threads, "Worker threads (0 = available parallelism)");

    std::function<int()> action;

    // stats -----------------------------------------------------------------
    std::string data_path, output = "-";
    auto* stats_cmd = app.add_subcommand("stats", "Dataset statistics as JSON");
    stats_cmd->add_option("data", data_path, "XC-format dataset")->required();
    stats_cmd->callback([&] {
        action = [&] {
            const auto s = stats(load(data_path, one_based));
            emit(json{{"n", s.n}, {"d", s.d}, {"L", s.L}, {"avg_features", s.avg_features},
                      {"avg_labels", s.avg_labels}});
            return kOk;
        };
    });

    // cluster ---------------------------------------------------------------
    ClusterFlags cf;
    std::size_t ensemble_m = 1;
    std::string part_format = "json";
    auto* cluster_cmd = app.add_subcommand("cluster", "Build a balanced feature partition");
    cluster_cmd->add_option("data", data_path, "XC-format training data")->required();
    cluster_cmd->add_option("-o,--output", output, "Partition file ('-' for stdout)")->required();
    cluster_cmd->add_option("--format", part_format, "Partition file format")->check(CLI::IsMember({"json", "text"}));
    cluster_cmd->add_option("--ensemble", ensemble_m, "Number of partitions (seeds seed..seed+m-1)")
        ->check(CLI::PositiveNumber);
    cf.add_to(cluster_cmd);
    cluster_cmd->callback([&] {
        action = [&] {
            if (ensemble_m > 1 && part_format == "text")
                throw InvalidArgument("--format text holds a single partition; use json with --ensemble");
            const Dataset ds = load(data_path, one_based);
            cf.threads = threads;
            Stopwatch sw;
            const auto parts = ensemble(cf.reprs(ds), ensemble_m, cf.tree_options());
            const double secs = sw.seconds();
            with_output(output, [&](std::ostream& o) {
                if (part_format == "text") {
                    write_partition_text(o, parts.front());
                } else if (parts.size() == 1) {
                    o << to_json(parts.front()).dump() << '\n';
                } else {
                    json all = json::array();
                    for (const auto& p : parts) all.push_back(to_json(p));
                    o << json{{"partitions", all}}.dump() << '\n';
                }
            });
            json report{{"K", parts.front().K()},
                        {"d", ds.d()},
                        {"balance_factor", balance_factor(parts.front())},
                        {"normalized_entropy", ds.d() >= 2 ? normalized_entropy(parts.front()) : 0.0},
                        {"clustering_seconds", secs}};
            if (output != "-") emit(report);
            else std::cerr << report.dump() << '\n';
            return kOk;
        };
    });

    // agglomerate -----------------------------------------------------------
    std::string part_path, agg_mode = "sum";
    auto* agg_cmd = app.add_subcommand("agglomerate", "Collapse each feature cluster into one feature");
    agg_cmd->add_option("data", data_path, "XC-format dataset")->required();
    agg_cmd->add_option("--partition", part_path, "Partition file (JSON or text)")->required();
    agg_cmd->add_option("--mode", agg_mode, "sum or avg")->check(CLI::IsMember({"sum", "avg"}));
    agg_cmd->add_option("-o,--output", output, "Output XC file ('-' for stdout)");
    agg_cmd->callback([&] {
        action = [&] {
            const Dataset ds = load(data_path, one_based);
            const auto part = load_partition(part_path);
            const auto mode = agg_mode == "avg" ? AgglomerationMode::Average : AgglomerationMode::Sum;
            const Dataset out = agglomerate(ds, part, mode);
            with_output(output, [&](std::ostream& o) { write_xc(o, out); });
            return kOk;
        };
    });

    // cluster-metrics -------------------------------------------------------
    double clustering_seconds = -1.0;
    auto* cm_cmd = app.add_subcommand("cluster-metrics", "LMI, balance factor and normalized entropy");
    cm_cmd->add_option("data", data_path, "XC-format dataset")->required();
    cm_cmd->add_option("--partition", part_path, "Partition file")->required();
    cm_cmd->add_option("--clustering-seconds", clustering_seconds, "Wall time to report alongside");
    cm_cmd->callback([&] {
        action = [&] {
            const Dataset ds = load(data_path, one_based);
            const auto part = load_partition(part_path);
            std::optional<double> secs;
            if (clustering_seconds >= 0.0) secs = clustering_seconds;
            emit(quality_json(evaluate_clustering(ds, part, secs)));
            return kOk;
        };
    });

    // train -----------------------------------------------------------------
    OvaConfig oc;
    bool agglomerated = false;
    auto* train_cmd = app.add_subcommand("train", "Train one-vs-rest logistic models");
    train_cmd->add_option("data", data_path, "XC-format training data")->required();
    train_cmd->add_option("-o,--output", output, "Model file")->required();
    train_cmd->add_option("--partition", part_path, "Train on data agglomerated with this partition");
    train_cmd->add_flag("--agglomerate", agglomerated, "Cluster the features first, then train on the agglomeration");
    train_cmd->add_option("--ensemble", ensemble_m, "Members, each on its own clustering (implies --agglomerate)")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--epochs", oc.epochs, "SGD passes")->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--lr", oc.learning_rate, "Initial learning rate");
    train_cmd->add_option("--l2", oc.l2, "L2 regularization strength");
    train_cmd->add_option("--max-labels", oc.max_labels, "Label count guard");
    train_cmd->add_flag("--allow-large", oc.allow_large, "Lift the label count guard");
    cf.add_to(train_cmd);
    train_cmd->callback([&] {
        action = [&] {
            if (!part_path.empty() && (agglomerated || ensemble_m > 1))
                throw InvalidArgument("--partition cannot be combined with --agglomerate or --ensemble");
            const Dataset ds = load(data_path, one_based);
            oc.seed = cf.seed;
            oc.threads = threads;
            cf.threads = threads;
            OvaEnsemble ens;
            double cluster_secs = 0.0, train_secs = 0.0;
            if (!part_path.empty()) {
                auto part = load_partition(part_path);
                Stopwatch sw;
                ens.members.push_back({part, train_ova(agglomerate(ds, part), oc)});
                train_secs = sw.seconds();
            } else if (agglomerated || ensemble_m > 1) {
                Stopwatch sw;
                const auto parts = ensemble(cf.reprs(ds), ensemble_m, cf.tree_options());
                cluster_secs = sw.seconds();
                Stopwatch tw;
                for (const auto& p : parts) ens.members.push_back({p, train_ova(agglomerate(ds, p), oc)});
                train_secs = tw.seconds();
            } else {
                Stopwatch sw;
                ens.members.push_back({std::nullopt, train_ova(ds, oc)});
                train_secs = sw.seconds();
            }
            with_output(output, [&](std::ostream& o) { o << to_json(ens).dump() << '\n'; });
            emit(json{{"members", ens.members.size()},
                      {"model_dim", ens.members.front().model.d()},
                      {"clustering_seconds", cluster_secs},
                      {"training_seconds", train_secs}});
            return kOk;
        };
    });

    // predict ---------------------------------------------------------------
    std::string model_path, cooc_path;
    std::size_t k = 5;
    double lambda = 0.0;
    auto* predict_cmd = app.add_subcommand("predict", "Rank labels for every point");
    predict_cmd->add_option("model", model_path, "Model file from train")->required();
    predict_cmd->add_option("data", data_path, "XC-format test data")->required();
    predict_cmd->add_option("-o,--output", output, "Score file ('-' for stdout)")->required();
    predict_cmd->add_option("--k", k, "Labels per point")->check(CLI::PositiveNumber);
    predict_cmd->add_option("--impute", cooc_path, "Impute features with this co-occurrence file first");
    predict_cmd->add_option("--lambda", lambda, "Weight of the observed vector in the imputation blend")
        ->check(CLI::Range(0.0, 1.0));
    predict_cmd->callback([&] {
        action = [&] {
            const auto ens = ensemble_from_json(read_json(model_path));
            Dataset ds = load(data_path, one_based);
            if (ds.d() != ens.input_dim())
                throw DataError("test data has " + std::to_string(ds.d()) + " features, model expects " +
                                std::to_string(ens.input_dim()));
            Stopwatch sw;
            Predictions preds;
            if (!cooc_path.empty()) {
                const auto c = cooc_from_json(read_json(cooc_path));
                std::vector<SparseVec> rows;
                for (const SparseVec& x : ds.features().row_data()) rows.push_back(impute_blend(c, x, lambda));
                preds = predict(ens, SparseMatrix(ds.d(), std::move(rows)), k);
            } else {
                preds = predict(ens, ds.features(), k);
            }
            const double secs = sw.seconds();
            with_output(output, [&](std::ostream& o) { write_predictions(o, preds); });
            if (output != "-")
                emit(json{{"points", ds.n()},
                          {"mean_prediction_seconds", ds.n() ? secs / static_cast<double>(ds.n()) : 0.0}});
            return kOk;
        };
    });

    // eval ------------------------------------------------------------------
    std::string scores_path, train_path, k_list = "1,3,5";
    bool with_propensity = false;
    double prop_a = 0.55, prop_b = 1.5;
    std::vector<double> buckets;
    auto* eval_cmd = app.add_subcommand("eval", "Precision, nDCG, coverage and propensity-scored metrics");
    eval_cmd->add_option("scores", scores_path, "Score file from predict or rerank")->required();
    eval_cmd->add_option("truth", data_path, "XC-format test data holding the true labels")->required();
    eval_cmd->add_option("--k", k_list, "Comma-separated cutoffs");
    eval_cmd->add_flag("--propensity", with_propensity, "Add PSP@k and PSnDCG@k (needs --train)");
    eval_cmd->add_option("--train", train_path, "Training data for propensities and popularity buckets");
    eval_cmd->add_option("--A", prop_a, "Propensity constant A");
    eval_cmd->add_option("--B", prop_b, "Propensity constant B");
    eval_cmd->add_option("--buckets", buckets, "Popularity percentile edges for macro precision@1 (needs --train)")
        ->delimiter(',');
    eval_cmd->callback([&] {
        action = [&] {
            const auto ks = parse_k_list(k_list);
            if ((with_propensity || !buckets.empty()) && train_path.empty())
                throw InvalidArgument("--propensity and --buckets need --train");
            const auto preds = load_predictions(scores_path);
            const Dataset truth = load(data_path, one_based);
            std::optional<Dataset> train;
            if (!train_path.empty()) train = load(train_path, one_based);
            std::optional<PropensityModel> prop;
            if (with_propensity) prop = propensities(train->labels(), prop_a, prop_b);
            json out = precision_rows(preds, truth.labels(), ks, prop ? &*prop : nullptr);
            if (!buckets.empty()) {
                json rows = json::array();
                for (const auto& b : percentile_macro_precision(preds, truth.labels(), train->labels(), 1, buckets))
                    rows.push_back({{"lo", b.lo}, {"hi", b.hi}, {"labels", b.labels},
                                    {"macro_precision", b.macro_precision}});
                out["percentile_macro_precision@1"] = rows;
            }
            emit(out);
            return kOk;
        };
    });

    // cooc ------------------------------------------------------------------
    bool row_norm = false;
    auto* cooc_cmd = app.add_subcommand("cooc", "Block-diagonal pseudo co-occurrence matrix");
    cooc_cmd->add_option("data", data_path, "XC-format training data")->required();
    cooc_cmd->add_option("--partition", part_path, "Partition file")->required();
    cooc_cmd->add_option("-o,--output", output, "Output JSON ('-' for stdout)");
    cooc_cmd->add_flag("--row-normalize", row_norm, "Rescale block rows to sum to 1");
    cooc_cmd->callback([&] {
        action = [&] {
            const Dataset ds = load(data_path, one_based);
            auto c = build_cooc(ds, load_partition(part_path));
            if (row_norm) c = row_normalize(std::move(c));
            with_output(output, [&](std::ostream& o) { o << to_json(c).dump() << '\n'; });
            return kOk;
        };
    });

    // impute ----------------------------------------------------------------
    auto* impute_cmd = app.add_subcommand("impute", "Replace every feature vector by its imputation");
    impute_cmd->add_option("data", data_path, "XC-format dataset")->required();
    impute_cmd->add_option("--cooc", cooc_path, "Co-occurrence file from cooc")->required();
    impute_cmd->add_option("--lambda", lambda, "Weight of the observed vector in the blend")
        ->check(CLI::Range(0.0, 1.0));
    impute_cmd->add_option("-o,--output", output, "Output XC file ('-' for stdout)");
    impute_cmd->callback([&] {
        action = [&] {
            const Dataset ds = load(data_path, one_based);
            const auto c = cooc_from_json(read_json(cooc_path));
            std::vector<SparseVec> rows;
            for (const SparseVec& x : ds.features().row_data()) rows.push_back(impute_blend(c, x, lambda));
            const Dataset out(SparseMatrix(ds.d(), std::move(rows)), ds.labels());
            with_output(output, [&](std::ostream& o) { write_xc(o, out); });
            return kOk;
        };
    });

    // erase -----------------------------------------------------------------
    double fraction = 0.5;
    std::uint64_t seed = 0;
    auto* erase_cmd = app.add_subcommand("erase", "Randomly drop a fraction of each point's nonzeros");
    erase_cmd->add_option("data", data_path, "XC-format dataset")->required();
    erase_cmd->add_option("--fraction", fraction, "Fraction of stored entries removed")->check(CLI::Range(0.0, 1.0));
    erase_cmd->add_option("--seed", seed, "Random seed");
    erase_cmd->add_option("-o,--output", output, "Output XC file ('-' for stdout)");
    erase_cmd->callback([&] {
        action = [&] {
            const Dataset ds = load(data_path, one_based);
            Rng rng(detail::root_seed(seed));
            const Dataset out = erase(ds, fraction, rng);
            with_output(output, [&](std::ostream& o) { write_xc(o, out); });
            return kOk;
        };
    });

    // rerank ----------------------------------------------------------------
    double alpha = 0.8, gamma = 1.0;
    std::size_t shortlist = 100;
    bool no_proto_norm = false;
    auto* rerank_cmd = app.add_subcommand("rerank", "Combine base scores with prototype affinities");
    rerank_cmd->add_option("scores", scores_path, "Base score file")->required();
    rerank_cmd->add_option("data", data_path, "XC-format test data the scores refer to")->required();
    rerank_cmd->add_option("--train", train_path, "XC-format training data for prototypes")->required();
    rerank_cmd->add_option("--partition", part_path, "Partition defining the co-occurrence blocks")->required();
    rerank_cmd->add_option("--alpha", alpha, "Weight of the base score")->check(CLI::Range(0.0, 1.0));
    rerank_cmd->add_option("--gamma", gamma, "Affinity bandwidth")->check(CLI::PositiveNumber);
    rerank_cmd->add_option("--shortlist", shortlist, "Base labels considered per point")->check(CLI::PositiveNumber);
    rerank_cmd->add_flag("--no-normalize", no_proto_norm, "Use raw prototypes and test vectors");
    rerank_cmd->add_option("-o,--output", output, "Output score file ('-' for stdout)");
    rerank_cmd->callback([&] {
        action = [&] {
            const auto base = load_predictions(scores_path);
            const Dataset test = load(data_path, one_based);
            const Dataset train = load(train_path, one_based);
            const auto c = build_cooc(train, load_partition(part_path));
            const auto ps = build_prototypes(c, train, !no_proto_norm, gamma);
            if (test.d() != train.d()) throw DataError("test and training data differ in feature dimension");
            const auto out = rerank_all(base, test.features(), ps, alpha, shortlist);
            with_output(output, [&](std::ostream& o) { write_predictions(o, out); });
            return kOk;
        };
    });

    // verify ----------------------------------------------------------------
    std::string theorem;
    std::size_t trials = 1000;
    auto* verify_cmd = app.add_subcommand("verify", "Randomized numerical check of the approximation bounds");
    verify_cmd->add_option("--theorem", theorem, "lemma1, thm1 or thm2")
        ->required()
        ->check(CLI::IsMember({"lemma1", "thm1", "thm2"}));
    verify_cmd->add_option("--trials", trials, "Number of random instances")->check(CLI::PositiveNumber);
    verify_cmd->add_option("--seed", seed, "Random seed");
    verify_cmd->callback([&] {
        action = [&] {
            Stopwatch sw;
            const TrialSummary s = theorem == "lemma1" ? run_lemma1_trials(trials, seed)
                                   : theorem == "thm1" ? run_thm1_trials(trials, seed)
                                                       : run_thm2_trials(trials, seed);
            emit(json{{"theorem", s.theorem},
                      {"trials", s.trials},
                      {"failures", s.failures},
                      {"worst_slack", s.worst_slack},
                      {"worst_ratio", s.worst_ratio},
                      {"passed", s.passed()},
                      {"seconds", sw.seconds()}});
            return s.passed() ? kOk : kInvariant;
        };
    });

    // bench -----------------------------------------------------------------
    std::size_t bench_n = 20000, bench_d = 20000, bench_nnz = 20, repeats = 3;
    double max_ratio = 2.5;
    auto* bench_cmd = app.add_subcommand("bench", "Clustering time on (n, d) versus (2n, d) inputs");
    bench_cmd->add_option("--n", bench_n, "Points in the smaller input")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--d", bench_d, "Features")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--nnz", bench_nnz, "Nonzeros per point")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--repeats", repeats, "Timed repetitions; the minimum is kept")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--max-ratio", max_ratio, "Largest acceptable time ratio");
    cf.add_to(bench_cmd);
    bench_cmd->callback([&] {
        action = [&] {
            cf.threads = threads;
            auto time_one = [&](std::size_t n) {
                const Dataset ds = make_uniform_sparse(n, bench_d, bench_nnz, 16, cf.seed);
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t r = 0; r < repeats; ++r) {
                    Stopwatch sw;
                    const auto part = leaves(make_tree(cf.reprs(ds), cf.tree_options()));
                    best = std::min(best, sw.seconds());
                    if (part.d() != bench_d) throw InvariantError("bench: partition lost features");
                }
                return best;
            };
            const double t1 = time_one(bench_n);
            const double t2 = time_one(2 * bench_n);
            const double ratio = t1 > 0.0 ? t2 / t1 : 0.0;
            emit(json{{"n", bench_n},
                      {"d", bench_d},
                      {"nnz_per_row", bench_nnz},
                      {"seconds_n", t1},
                      {"seconds_2n", t2},
                      {"ratio", ratio},
                      {"max_ratio", max_ratio},
                      {"passed", ratio <= max_ratio}});
            return ratio <= max_ratio ? kOk : kInvariant;
        };
    });

    // synth -----------------------------------------------------------------
    std::string kind, prefix;
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic train/test pair");
    synth_cmd->add_option("kind", kind, "grouped or zipf")->required()->check(CLI::IsMember({"grouped", "zipf"}));
    synth_cmd->add_option("prefix", prefix, "Writes <prefix>.train.txt and <prefix>.test.txt")->required();
    synth_cmd->add_option("--seed", seed, "Random seed");
    synth_cmd->callback([&] {
        action = [&] {
            Dataset train, test;
            if (kind == "grouped") {
                GroupedSpec spec;
                spec.seed = seed;
                auto g = make_grouped(spec);
                train = std::move(g.train);
                test = std::move(g.test);
            } else {
                ZipfSpec spec;
                spec.seed = seed;
                auto z = make_zipf(spec);
                train = std::move(z.train);
                test = std::move(z.test);
            }
            save_xc(prefix + ".train.txt", train);
            save_xc(prefix + ".test.txt", test);
            return kOk;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        return action();
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const InvariantError& e) {
        std::cerr << "invariant violated: " << e.what() << '\n';
        return kInvariant;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }
}
