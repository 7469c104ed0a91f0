// Acceptance suite: one test case per criterion, each printing a single
// [PASS]/[FAIL] line with the measured numbers.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "stylespace/embed.hpp"
#include "stylespace/eval.hpp"
#include "stylespace/graph.hpp"
#include "stylespace/io_util.hpp"
#include "stylespace/retrieve.hpp"
#include "stylespace/rng.hpp"
#include "stylespace/sampler.hpp"
#include "stylespace/synth.hpp"
#include "test_helpers.hpp"

using namespace stylespace;
using sampler::PairLabel;

namespace {

void report_line(int criterion, const std::string& name, bool pass,
                 const std::string& detail) {
    std::printf("[%s] C%d %s: %s\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
}

// ---------------------------------------------------------------------------
// Desk-scale experiment shared by the synthetic criteria.

struct DeskConfig {
    int categories = 5;
    int items_per_category = 400;
    int latent_dim = 2;
    int feature_dim = 16;
    double feature_noise = 0.10;
    double bandwidth = 0.15;
    double degree = 5.0;
    double label_noise = 0.0;

    std::array<double, 3> ratios{6, 1, 3};
    int positives = 1500;
    int neg_ratio = 16;

    std::size_t style_dim = 8;
    double lr = 0.10;
    double momentum = 0.9;
    int epochs = 30;
    int batch = 128;
    double margin = 1.0;
};

struct Run {
    synth::GeneratedCatalog gen;
    graph::ItemSplit split;
    sampler::PairDataset dataset;
    FeatureMap features;
    embed::ProjectionModel untrained;
    embed::ProjectionModel trained;
    embed::LossTrace trace;
};

Run run_pipeline(std::uint64_t seed, sampler::Strategy strategy,
                 const std::string& holdout_category, const DeskConfig& dc) {
    Run run;
    synth::SynthConfig sc;
    sc.num_categories = dc.categories;
    sc.items_per_category = dc.items_per_category;
    sc.latent_dim = dc.latent_dim;
    sc.feature_dim = dc.feature_dim;
    sc.feature_noise = dc.feature_noise;
    sc.edge_bandwidth = dc.bandwidth;
    sc.edges_per_item = dc.degree;
    sc.label_noise_rate = dc.label_noise;
    sc.seed = mix_seed(seed, "acc/synth");
    run.gen = synth::generate_catalog(sc);

    run.split = graph::split_items(run.gen.catalog, dc.ratios, mix_seed(seed, "acc/split"));

    sampler::SamplerConfig pc;
    pc.strategy = strategy;
    pc.holdout_category = holdout_category;
    pc.negatives_per_positive_train = dc.neg_ratio;
    pc.target_positive_count = dc.positives;
    pc.seed = mix_seed(seed, "acc/sample");
    run.dataset = sampler::build_pair_dataset(run.gen.catalog, run.split, pc);

    run.features = graph::feature_map(run.gen.catalog);
    run.untrained = embed::init_model(dc.feature_dim, dc.style_dim, {},
                                      mix_seed(seed, "acc/init"));
    embed::TrainConfig tc;
    tc.margin = dc.margin;
    tc.learning_rate = dc.lr;
    tc.momentum = dc.momentum;
    tc.epochs = dc.epochs;
    tc.batch_size = dc.batch;
    tc.seed = mix_seed(seed, "acc/train");
    auto trained = embed::train(run.untrained, run.features, run.dataset, tc);
    run.trained = std::move(trained.first);
    run.trace = std::move(trained.second);
    return run;
}

double auc_of(const embed::ProjectionModel& model, const FeatureMap& features,
              const std::vector<sampler::Pair>& pairs) {
    return eval::auc(eval::roc_curve(eval::pair_distances(model, features, pairs)));
}

double mean_distance(const embed::ProjectionModel& model, const FeatureMap& features,
                     const std::vector<sampler::Pair>& pairs, PairLabel label) {
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& d : eval::pair_distances(model, features, pairs)) {
        if (d.label != label) continue;
        total += d.distance;
        ++n;
    }
    return total / static_cast<double>(n);
}

// Heterogeneous-dyad-only evaluation set: strategic positives plus
// cross-category non-edge negatives, both inside the test pool.
std::vector<sampler::Pair> heterogeneous_test_set(const Run& run, std::uint64_t seed) {
    const auto& cat = run.gen.catalog;
    std::set<std::string> pool(run.split.test.begin(), run.split.test.end());
    std::size_t available = 0;
    for (const auto& e : cat.edges()) {
        if (pool.count(e.first) && pool.count(e.second) &&
            cat.at(e.first).category != cat.at(e.second).category) {
            ++available;
        }
    }
    const int want = static_cast<int>(std::min<std::size_t>(available, 400));
    auto positives = sampler::sample_positives_strategic(
        cat, run.split.test, want, mix_seed(seed, "hetero/pos"));

    std::vector<graph::Edge> candidates;
    const std::vector<std::string> ids(run.split.test.begin(), run.split.test.end());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
            if (cat.at(ids[i]).category == cat.at(ids[j]).category) continue;
            if (cat.has_edge(ids[i], ids[j])) continue;
            candidates.push_back({ids[i], ids[j]});
        }
    }
    Rng rng(mix_seed(seed, "hetero/neg"));
    rng.shuffle(candidates);

    auto pairs = positives.pairs;
    for (std::size_t i = 0; i < pairs.size() && i < candidates.size(); ++i) {
        pairs.push_back({candidates[i].first, candidates[i].second, PairLabel::negative});
    }
    return pairs;
}

int run_cli_checked(const std::string& args) {
    const std::string cmd = std::string(STYLESPACE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return status == -1 ? -1 : WEXITSTATUS(status);
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", x);
    return buf;
}

}  // namespace

TEST_CASE("C1 gradient correctness against central differences") {
    const double epsilon = 1e-5;
    Rng rng(20250101);
    double worst = 0.0;
    int done = 0;
    int attempts = 0;
    while (done < 120 && attempts < 5000) {
        ++attempts;
        const std::size_t d = 2 + rng.index(7);
        const std::size_t k = 1 + rng.index(6);
        std::vector<std::size_t> hidden;
        if (rng.uniform() < 0.5) hidden.push_back(2 + rng.index(6));
        auto model = embed::init_model(d, k, hidden, rng.next_u64());
        Vec fa(d), fb(d);
        for (double& v : fa) v = rng.uniform(-1, 1);
        for (double& v : fb) v = rng.uniform(-1, 1);
        const auto label = rng.uniform() < 0.5 ? PairLabel::positive : PairLabel::negative;
        const double margin = rng.uniform(0.3, 2.0);

        // keep clear of the nondifferentiable hinge boundary and d = 0, where
        // central differences are undefined rather than wrong
        const double dist = distance(embed::embed(model, fa), embed::embed(model, fb));
        if (label == PairLabel::negative &&
            (std::abs(dist - margin) < 50 * epsilon || dist < 50 * epsilon)) {
            continue;
        }
        worst = std::max(worst, embed::gradient_check(model, fa, fb, label, margin, epsilon));
        ++done;
    }
    const bool pass = done >= 100 && worst < 1e-4;
    report_line(1, "gradient-correctness", pass,
                "configs=" + std::to_string(done) + " max_rel_err=" + fmt(worst) + " tol=0.0001");
    CHECK(pass);
}

TEST_CASE("C2 trapezoidal AUC equals the rank-statistic oracle") {
    Rng rng(20250202);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.index(999);
        std::vector<eval::LabeledDistance> dists;
        std::size_t pos = 0, neg = 0;
        const bool ties = trial % 2 == 0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = rng.uniform(0.0, 5.0);
            if (ties) d = std::round(d * 8.0) / 8.0;
            const auto label = rng.uniform() < 0.5 ? PairLabel::positive : PairLabel::negative;
            (label == PairLabel::positive ? pos : neg) += 1;
            dists.push_back({d, label});
        }
        if (pos == 0) dists.push_back({1.0, PairLabel::positive});
        if (neg == 0) dists.push_back({1.0, PairLabel::negative});

        const double trapezoid = eval::auc(eval::roc_curve(dists));
        // exact integer-counting oracle
        std::uint64_t wins2 = 0, p = 0, ng = 0;
        for (const auto& dp : dists) {
            if (dp.label != PairLabel::positive) continue;
            ++p;
            for (const auto& dn : dists) {
                if (dn.label != PairLabel::negative) continue;
                if (dp.distance < dn.distance) wins2 += 2;
                else if (dp.distance == dn.distance) wins2 += 1;
            }
        }
        for (const auto& dn : dists) {
            if (dn.label == PairLabel::negative) ++ng;
        }
        const double oracle = static_cast<double>(wins2) /
                              (2.0 * static_cast<double>(p) * static_cast<double>(ng));
        worst = std::max(worst, std::abs(trapezoid - oracle));
    }
    const bool pass = worst < 1e-12;
    report_line(2, "auc-oracle-equivalence", pass,
                "sets=200 max_abs_diff=" + std::to_string(worst));
    CHECK(pass);
}

TEST_CASE("C3 strategic training separates synthetic styles") {
    DeskConfig dc;
    bool all_pass = true;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto run = run_pipeline(seed, sampler::Strategy::strategic, "", dc);
        const double before = auc_of(run.untrained, run.features, run.dataset.test);
        const double after = auc_of(run.trained, run.features, run.dataset.test);
        const double pos_mean = mean_distance(run.trained, run.features, run.dataset.test,
                                              PairLabel::positive);
        const double neg_mean = mean_distance(run.trained, run.features, run.dataset.test,
                                              PairLabel::negative);
        const bool pass = before <= 0.65 && after >= 0.80 && pos_mean < neg_mean;
        all_pass = all_pass && pass;
        detail += "seed" + std::to_string(seed) + "(before=" + fmt(before) +
                  " after=" + fmt(after) + " d+=" + fmt(pos_mean) + " d-=" + fmt(neg_mean) + ") ";
    }
    report_line(3, "synthetic-separation", all_pass, detail);
    CHECK(all_pass);
}

TEST_CASE("C4 strategic sampling is at least as good as naive") {
    DeskConfig dc;
    dc.label_noise = 0.10;  // apparent same-category edges exist for naive to absorb
    double strategic_sum = 0.0;
    double naive_sum = 0.0;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto strategic = run_pipeline(seed, sampler::Strategy::strategic, "", dc);
        auto naive = run_pipeline(seed, sampler::Strategy::naive, "", dc);
        auto test_pairs = heterogeneous_test_set(strategic, seed);
        const double s = auc_of(strategic.trained, strategic.features, test_pairs);
        const double n = auc_of(naive.trained, naive.features, test_pairs);
        strategic_sum += s;
        naive_sum += n;
        detail += "seed" + std::to_string(seed) + "(s=" + fmt(s) + " n=" + fmt(n) + ") ";
    }
    const bool pass = strategic_sum / 5.0 >= naive_sum / 5.0;
    report_line(4, "strategic-vs-naive", pass,
                detail + "mean_s=" + fmt(strategic_sum / 5.0) +
                    " mean_n=" + fmt(naive_sum / 5.0));
    CHECK(pass);
}

TEST_CASE("C5 holdout transferability") {
    DeskConfig dc;
    const std::string holdout = "cat02";
    auto holdout_run = run_pipeline(301, sampler::Strategy::holdout, holdout, dc);
    auto full_run = run_pipeline(301, sampler::Strategy::strategic, "", dc);
    // all three models scored on the holdout-touching test pairs
    const auto& pairs = holdout_run.dataset.test;
    const double auc_holdout = auc_of(holdout_run.trained, holdout_run.features, pairs);
    const double auc_full = auc_of(full_run.trained, full_run.features, pairs);
    const double auc_baseline = auc_of(holdout_run.untrained, holdout_run.features, pairs);
    const double ratio = eval::transfer_ratio(auc_holdout, auc_full, auc_baseline);
    bool pass = auc_holdout > auc_baseline && ratio > 0.0 && ratio < 1.0;

    // published holdout shares recomputed from the reported AUC table,
    // compared at their one-decimal display precision
    struct Published {
        const char* name;
        double holdout, full, baseline, share;
    };
    std::string arithmetic;
    for (const Published& c : {Published{"shirts", 0.824, 0.865, 0.742, 0.670},
                               Published{"shoes", 0.620, 0.700, 0.547, 0.475},
                               Published{"jeans", 0.779, 0.836, 0.724, 0.486}}) {
        const double r = eval::transfer_ratio(c.holdout, c.full, c.baseline);
        const bool ok =
            std::labs(std::lround(r * 1000.0) - std::lround(c.share * 1000.0)) <= 5;
        pass = pass && ok;
        arithmetic += std::string(c.name) + "=" + fmt(r * 100.0) + "%(pub " +
                      fmt(c.share * 100.0) + "%) ";
    }
    report_line(5, "holdout-transferability", pass,
                "auc_baseline=" + fmt(auc_baseline) + " auc_holdout=" + fmt(auc_holdout) +
                    " auc_full=" + fmt(auc_full) + " ratio=" + fmt(ratio) + " | " + arithmetic);
    CHECK(pass);
}

TEST_CASE("C6 robust retrieval suppresses mislabeled items") {
    DeskConfig dc;
    dc.label_noise = 0.05;
    dc.epochs = 8;  // partial training keeps the visual-similarity confound alive
    auto run = run_pipeline(601, sampler::Strategy::strategic, "", dc);
    const auto& cat = run.gen.catalog;

    auto index = retrieve::build_style_index(cat, run.trained, 20, 602);
    const std::set<std::string> mislabeled(run.gen.relabeled_ids.begin(),
                                           run.gen.relabeled_ids.end());
    std::vector<std::string> categories = cat.categories();

    Rng rng(603);
    std::vector<const graph::Item*> queries;
    for (const auto& it : cat.items()) queries.push_back(&it);
    rng.shuffle(queries);
    queries.resize(1000);

    int robust_bad = 0;
    int plain_bad = 0;
    bool shortlist_optimal = true;
    for (const graph::Item* q : queries) {
        auto cat_it = std::find(categories.begin(), categories.end(), q->category);
        const std::string target =
            categories[(cat_it - categories.begin() + 1) % categories.size()];
        const Vec& style = *index.style_of(q->id);

        const std::string robust = retrieve::robust_retrieve(style, index, target, 5);
        if (mislabeled.count(robust)) ++robust_bad;

        const auto& ci = index.category(target);
        // plain 1-NN within the apparent label
        std::size_t nn = 0;
        double nn_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ci.ids.size(); ++i) {
            const double d = distance(style, ci.styles[i]);
            if (d < nn_d) {
                nn_d = d;
                nn = i;
            }
        }
        if (mislabeled.count(ci.ids[nn])) ++plain_bad;

        // final-step optimality: the returned item minimizes the query
        // distance within the n-candidate shortlist around the chosen centroid
        const int c_star = retrieve::nearest_centroid(style, ci.centroids);
        std::vector<std::size_t> order(ci.ids.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            const double dx = squared_distance(ci.styles[x], ci.centroids[c_star]);
            const double dy = squared_distance(ci.styles[y], ci.centroids[c_star]);
            if (dx != dy) return dx < dy;
            return ci.ids[x] < ci.ids[y];
        });
        double best_cand = std::numeric_limits<double>::infinity();
        bool member = false;
        for (std::size_t i = 0; i < std::min<std::size_t>(5, order.size()); ++i) {
            best_cand = std::min(best_cand, distance(style, ci.styles[order[i]]));
            if (ci.ids[order[i]] == robust) member = true;
        }
        const Vec& returned_style = *index.style_of(robust);
        if (!member || distance(style, returned_style) > best_cand) shortlist_optimal = false;
    }
    const bool pass = robust_bad < plain_bad && shortlist_optimal;
    report_line(6, "robust-retrieval-label-noise", pass,
                "queries=1000 robust_mislabel=" + std::to_string(robust_bad) +
                    " plain_1nn_mislabel=" + std::to_string(plain_bad) +
                    " shortlist_optimal=" + (shortlist_optimal ? "yes" : "no"));
    CHECK(pass);
}

TEST_CASE("C7 kmeans contract over random point sets") {
    Rng rng(20250707);
    bool monotone = true;
    bool consistent = true;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 5 + rng.index(60);
        const std::size_t dim = 1 + rng.index(4);
        std::vector<Vec> points(n, Vec(dim));
        for (auto& p : points) {
            for (double& v : p) v = rng.uniform(-3, 3);
        }
        const int k = 1 + static_cast<int>(rng.index(8));
        auto r = retrieve::kmeans(points, k, rng.next_u64());
        for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
            if (r.objective_trace[i] > r.objective_trace[i - 1] + 1e-9) monotone = false;
        }
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (r.assignments[i] != retrieve::nearest_centroid(points[i], r.centroids)) {
                consistent = false;
            }
        }
    }
    // k = |points| over distinct points drives the objective to zero
    bool zero_objective = true;
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<Vec> points;
        std::set<std::pair<long, long>> seen;
        while (points.size() < 12) {
            Vec p{rng.uniform(-3, 3), rng.uniform(-3, 3)};
            auto key = std::make_pair(std::lround(p[0] * 1e6), std::lround(p[1] * 1e6));
            if (seen.insert(key).second) points.push_back(p);
        }
        auto r = retrieve::kmeans(points, 12, rng.next_u64());
        if (r.objective != 0.0) zero_objective = false;
    }
    const bool pass = monotone && consistent && zero_objective;
    report_line(7, "kmeans-contract", pass,
                std::string("monotone=") + (monotone ? "yes" : "no") +
                    " nearest-consistent=" + (consistent ? "yes" : "no") +
                    " k=n_objective_zero=" + (zero_objective ? "yes" : "no"));
    CHECK(pass);
}

TEST_CASE("C8 sampler invariants hold exhaustively") {
    DeskConfig dc;
    dc.items_per_category = 120;
    dc.label_noise = 0.05;
    bool pass = true;
    std::string detail;

    for (const auto strategy : {sampler::Strategy::strategic, sampler::Strategy::holdout}) {
        synth::SynthConfig sc;
        sc.num_categories = dc.categories;
        sc.items_per_category = dc.items_per_category;
        sc.latent_dim = dc.latent_dim;
        sc.feature_dim = dc.feature_dim;
        sc.feature_noise = dc.feature_noise;
        sc.edge_bandwidth = dc.bandwidth;
        sc.edges_per_item = dc.degree;
        sc.label_noise_rate = dc.label_noise;
        sc.seed = 801;
        auto gen = synth::generate_catalog(sc);
        auto split = graph::split_items(gen.catalog, dc.ratios, 802);

        sampler::SamplerConfig pc;
        pc.strategy = strategy;
        pc.holdout_category = strategy == sampler::Strategy::holdout ? "cat03" : "";
        pc.negatives_per_positive_train = 16;
        pc.target_positive_count = 400;
        pc.seed = 803;
        auto ds = sampler::build_pair_dataset(gen.catalog, split, pc);

        std::size_t train_pos = 0, train_neg = 0;
        for (const auto& p : ds.train) {
            const bool is_pos = p.label == PairLabel::positive;
            (is_pos ? train_pos : train_neg) += 1;
            if (is_pos) {
                if (!gen.catalog.has_edge(p.a, p.b)) pass = false;
                if (gen.catalog.at(p.a).category == gen.catalog.at(p.b).category) pass = false;
            } else {
                if (gen.catalog.has_edge(p.a, p.b)) pass = false;
            }
            if (strategy == sampler::Strategy::holdout) {
                if (gen.catalog.at(p.a).category == "cat03" ||
                    gen.catalog.at(p.b).category == "cat03") {
                    pass = false;
                }
            }
        }
        if (train_neg != 16 * train_pos) {
            bool shortfall_noted = false;
            for (const auto& note : ds.notes) {
                if (note.find("shortfall") != std::string::npos) shortfall_noted = true;
            }
            if (!shortfall_noted) pass = false;
        }

        for (const auto* block : {&ds.validation, &ds.test}) {
            std::size_t pos = 0, neg = 0;
            for (const auto& p : *block) {
                const bool is_pos = p.label == PairLabel::positive;
                (is_pos ? pos : neg) += 1;
                if (is_pos && !gen.catalog.has_edge(p.a, p.b)) pass = false;
                if (!is_pos && gen.catalog.has_edge(p.a, p.b)) pass = false;
                if (strategy == sampler::Strategy::holdout) {
                    if (gen.catalog.at(p.a).category != "cat03" &&
                        gen.catalog.at(p.b).category != "cat03") {
                        pass = false;
                    }
                }
            }
            if (std::llabs(static_cast<long long>(pos) - static_cast<long long>(neg)) > 1) {
                pass = false;
            }
        }

        // split containment
        const std::set<std::string> train(split.train.begin(), split.train.end());
        const std::set<std::string> val(split.validation.begin(), split.validation.end());
        const std::set<std::string> test(split.test.begin(), split.test.end());
        for (const auto& p : ds.train) {
            if (!train.count(p.a) || !train.count(p.b)) pass = false;
        }
        for (const auto& p : ds.validation) {
            if (!val.count(p.a) || !val.count(p.b)) pass = false;
        }
        for (const auto& p : ds.test) {
            if (!test.count(p.a) || !test.count(p.b)) pass = false;
        }

        detail += std::string(strategy == sampler::Strategy::holdout ? "holdout" : "strategic") +
                  "(train=" + std::to_string(train_pos) + "+" + std::to_string(train_neg) +
                  " test=" + std::to_string(ds.test.size()) + ") ";
    }
    report_line(8, "sampler-invariants", pass, detail);
    CHECK(pass);
}

TEST_CASE("C9 end-to-end pipeline runs are byte-identical") {
    testutil::TempDir dir("acc9");
    auto pipeline = [&](const std::string& tag) -> bool {
        const std::string items = dir.file(tag + "_items.jsonl");
        const std::string edges = dir.file(tag + "_edges.csv");
        const std::string clean_items = dir.file(tag + "_clean.jsonl");
        const std::string clean_edges = dir.file(tag + "_clean.csv");
        const std::string splits = dir.file(tag + "_splits.json");
        const std::string pairs = dir.file(tag + "_pairs.csv");
        const std::string model = dir.file(tag + "_model.json");
        const std::string report = dir.file(tag + "_report.json");
        if (run_cli_checked("synth --items " + items + " --edges " + edges +
                            " --categories 3 --items-per-category 80 --latent-dim 2"
                            " --feature-dim 8 --feature-noise 0.05 --bandwidth 0.2"
                            " --degree 4 --seed 99") != 0) {
            return false;
        }
        if (run_cli_checked("clean --items " + items + " --edges " + edges + " --out-items " +
                            clean_items + " --out-edges " + clean_edges) != 0) {
            return false;
        }
        if (run_cli_checked("split --items " + clean_items + " --edges " + clean_edges +
                            " --splits " + splits + " --ratios 6:2:2 --seed 99") != 0) {
            return false;
        }
        if (run_cli_checked("sample --items " + clean_items + " --edges " + clean_edges +
                            " --splits " + splits + " --pairs " + pairs +
                            " --strategy strategic --positives 150 --seed 99") != 0) {
            return false;
        }
        if (run_cli_checked("train --items " + clean_items + " --pairs " + pairs + " --model " +
                            model + " --dim 4 --epochs 6 --batch 32 --seed 99") != 0) {
            return false;
        }
        if (run_cli_checked("eval --items " + clean_items + " --pairs " + pairs + " --model " +
                            model + " --report " + report + " --split test") != 0) {
            return false;
        }
        return true;
    };
    bool pass = pipeline("one") && pipeline("two");
    if (pass) {
        pass = read_file(dir.file("one_model.json")) == read_file(dir.file("two_model.json")) &&
               read_file(dir.file("one_report.json")) == read_file(dir.file("two_report.json"));
    }
    report_line(9, "end-to-end-determinism", pass,
                pass ? "model.json and report.json identical across reruns"
                     : "pipeline outputs differ or a stage failed");
    CHECK(pass);
}
